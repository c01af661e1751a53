#include "polyboltz/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "polyboltz/errors.hpp"

namespace polyboltz {

namespace {

constexpr double kGramTolerance = 1e-8;
constexpr double kLostMassLimit = 0.01;

/// Orthonormal probabilists' Hermite polynomials h_0..h_n at x.
void hermite_row(int n, double x, double* out) {
    out[0] = 1.0;
    if (n >= 1) out[1] = x;
    for (int k = 1; k < n; ++k) out[k + 1] = (x * out[k] - std::sqrt(double(k)) * out[k - 1]) / std::sqrt(k + 1.0);
}

/// Generalized Laguerre polynomials L_0^{(α)}..L_n^{(α)} at x, unnormalized.
void laguerre_row(int n, double alpha, double x, double* out) {
    out[0] = 1.0;
    if (n >= 1) out[1] = 1.0 + alpha - x;
    for (int k = 1; k < n; ++k) out[k + 1] = ((2.0 * k + 1.0 + alpha - x) * out[k] - (k + alpha) * out[k - 1]) / (k + 1.0);
}

int quadrature_nodes(const BasisSpec& spec) { return std::max(spec.n_v, spec.n_i) + 3; }

}  // namespace

HermiteLaguerreBasis::HermiteLaguerreBasis(const BasisSpec& spec, double alpha) : spec_(spec), alpha_(alpha) {
    if (spec.n_v < 0 || spec.n_i < 0) throw ConfigError("basis: degrees must be nonnegative");
    if (!(alpha >= 0.0)) throw DomainError("basis: alpha must be >= 0");
    for (int deg = 0; deg <= spec.n_v; ++deg)
        for (int a = deg; a >= 0; --a)
            for (int b = deg - a; b >= 0; --b)
                for (int k = 0; k <= spec.n_i; ++k) index_.push_back({a, b, deg - a - b, k});
    if (index_.size() > kMaxBasisSize)
        throw ConfigError("basis: dimension " + std::to_string(index_.size()) + " exceeds the cap of " +
                          std::to_string(kMaxBasisSize));
    // ‖L_k^{(α)}‖² = Γ(k+α+1) / (k! Γ(α+1)) under the Gamma(α+1) weight.
    laguerre_norm_.resize(spec.n_i + 1);
    for (int k = 0; k <= spec.n_i; ++k)
        laguerre_norm_[k] = std::exp(0.5 * (std::lgamma(alpha + 1.0) + std::lgamma(k + 1.0) - std::lgamma(k + alpha + 1.0)));
}

void HermiteLaguerreBasis::eval(const Vec3& v, double I, double* out) const {
    double h[3][32];
    double l[32];
    if (spec_.n_v >= 32 || spec_.n_i >= 32) throw ConfigError("basis: degree too large");
    for (int d = 0; d < 3; ++d) hermite_row(spec_.n_v, v[d], h[d]);
    laguerre_row(spec_.n_i, alpha_, I, l);
    for (int k = 0; k <= spec_.n_i; ++k) l[k] *= laguerre_norm_[k];
    for (std::size_t i = 0; i < index_.size(); ++i) {
        const auto& ix = index_[i];
        out[i] = h[0][ix[0]] * h[1][ix[1]] * h[2][ix[2]] * l[ix[3]];
    }
}

Eigen::VectorXd HermiteLaguerreBasis::eval(const Vec3& v, double I) const {
    Eigen::VectorXd out(size());
    eval(v, I, out.data());
    return out;
}

Eigen::VectorXd HermiteLaguerreBasis::project(const PhaseFunction& psi, double* lost_mass) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(size());
    Eigen::VectorXd p(size());
    double norm2 = 0.0;
    for_each_maxwell_node(quadrature_nodes(spec_) + 4, alpha_, [&](const Vec3& v, double I, double w) {
        const double f = psi(v, I);
        eval(v, I, p.data());
        c += (w * f) * p;
        norm2 += w * f * f;
    });
    if (lost_mass) *lost_mass = norm2 > 0.0 ? 1.0 - c.squaredNorm() / norm2 : 0.0;
    return c;
}

double HermiteLaguerreBasis::gram_error() const {
    const int nq = quadrature_nodes(spec_);
    const std::size_t nodes = std::size_t(nq) * nq * nq * nq;
    Eigen::MatrixXd phi(nodes, size());
    std::size_t row = 0;
    Eigen::VectorXd p(size());
    for_each_maxwell_node(nq, alpha_, [&](const Vec3& v, double I, double w) {
        eval(v, I, p.data());
        phi.row(row++) = std::sqrt(w) * p.transpose();
    });
    Eigen::MatrixXd gram = phi.transpose() * phi;
    gram.diagonal().array() -= 1.0;
    return gram.cwiseAbs().maxCoeff();
}

double OperatorMatrix::tol0() const { return std::max(10.0 * se.maxCoeff(), 1e-6); }

namespace {

constexpr std::uint64_t kDrawsPerChunk = 16;
constexpr std::uint64_t kMinChunks = 16;
constexpr Eigen::Index kColumnBatch = 512;

/// Fixed rules of the assembly. The pair (v, v*) is written as G ± √(R0 E) ĝ with
/// I = r0(1-R0)E, I* = (1-r0)(1-R0)E; under M M* the variables G, E, r0, R0, ĝ are
/// independent with densities ∝ e^{-|G|²}, E^{2α+5/2}e^{-E}, (r0(1-r0))^α,
/// R0^{1/2}(1-R0)^{2α+1} and uniform. The integrand is polynomial in G and, once ĝ and -ĝ
/// are paired, in E for γ = 0; G, E, r0 and r use Gauss rules and the rest is sampled.
struct AssemblyRules {
    GaussRule g;
    GaussRule e;
    GaussRule r0;
    GaussRule r;
    std::vector<std::array<int, 3>> velocity;
    int n_lag = 0;
    double collision_mass = 0.0;
};

AssemblyRules make_rules(const HermiteLaguerreBasis& basis, const GasSpec& spec) {
    const BasisSpec& b = basis.spec();
    const double a = spec.alpha;
    AssemblyRules rules;
    rules.g = gauss_hermite(b.n_v + 1);
    for (double& x : rules.g.nodes) x *= std::sqrt(0.5);
    rules.e = gauss_laguerre((b.n_v + 2 * b.n_i) / 2 + 3, 2.0 * a + 2.5);
    rules.r0 = gauss_jacobi(b.n_i + 3, a, a);
    rules.r = gauss_jacobi(b.n_i + 3, a, a);
    rules.n_lag = b.n_i + 1;
    for (std::size_t i = 0; i < basis.size(); i += rules.n_lag) {
        const auto& ix = basis.index(i);
        rules.velocity.push_back({ix[0], ix[1], ix[2]});
    }
    // ∫ w(r, R) dr dR dω over (0,1)² × S².
    rules.collision_mass = 4.0 * std::numbers::pi * std::beta(a + 1.0, a + 1.0) * std::beta(1.5, 2.0 * a + 2.0);
    return rules;
}

double beta_draw(Sampler& rng, double p, double q) {
    const double x = rng.gamma(p);
    const double y = rng.gamma(q);
    return x / (x + y);
}

/// Accumulates Σ vec(V) vec(L)ᵀ where V is a velocity block and L a Laguerre block.
class ChunkAccumulator {
public:
    ChunkAccumulator(Eigen::Index n_vel, Eigen::Index n_lag)
        : v_(n_vel * n_vel, kColumnBatch), l_(kColumnBatch, n_lag * n_lag), sum_(Eigen::MatrixXd::Zero(n_vel * n_vel, n_lag * n_lag)) {}

    double* next_v() { return v_.col(cols_).data(); }
    double* next_l() { return l_.row(cols_).data(); }
    void commit() {
        if (++cols_ == kColumnBatch) flush();
    }
    void flush() {
        if (cols_ == 0) return;
        sum_.noalias() += v_.leftCols(cols_) * l_.topRows(cols_);
        cols_ = 0;
    }
    const Eigen::MatrixXd& sum() const { return sum_; }

private:
    Eigen::MatrixXd v_;
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> l_;
    Eigen::MatrixXd sum_;
    Eigen::Index cols_ = 0;
};

Eigen::MatrixXd assemble_chunk(const HermiteLaguerreBasis& basis, const GasSpec& spec, const CrossSectionModel& model,
                               const AssemblyRules& rules, std::uint64_t seed, std::uint64_t chunk) {
    const double a = spec.alpha;
    const int nv = basis.spec().n_v + 1;
    const int ng = static_cast<int>(rules.g.nodes.size());
    const int nl = rules.n_lag;
    const auto n_vel = static_cast<Eigen::Index>(rules.velocity.size());
    const std::size_t n0 = rules.r0.nodes.size();
    const std::size_t n1 = rules.r.nodes.size();
    Sampler rng(seed, 0x5350, chunk);
    ChunkAccumulator acc(n_vel, nl);

    // herm[state][dim][node * nv + m] = h_m(G_node + shift), states s, s*, s', s'*.
    std::vector<double> herm(4 * 3 * ng * nv);
    auto table = [&](int st, int d) { return herm.data() + (st * 3 + d) * ng * nv; };
    // lag[state][fraction node * nl + k]; s and s* use the r0 nodes, s' and s'* the r nodes.
    std::vector<double> lag[4];
    std::vector<double> hd[3];
    for (auto& h : hd) h.resize(nv * nv);
    std::vector<double> bw(n0 * n1);
    double row[32];

    for (std::uint64_t draw = 0; draw < kDrawsPerChunk; ++draw) {
        const double R0 = beta_draw(rng, 1.5, 2.0 * a + 2.0);
        const double R = beta_draw(rng, 1.5, 2.0 * a + 2.0);
        const Vec3 ghat0 = rng.sphere();
        const Vec3 omega = rng.sphere();
        const double cos_abs = std::abs(ghat0.dot(omega));
        for (int flip = 0; flip < 2; ++flip) {
            const Vec3 ghat = flip ? Vec3(-ghat0) : ghat0;
            const Vec3 sigma = ghat - 2.0 * ghat.dot(omega) * omega;
            for (std::size_t e = 0; e < rules.e.nodes.size(); ++e) {
                const double E = rules.e.nodes[e];
                const Vec3 shift_a = std::sqrt(R0 * E) * ghat;
                const Vec3 shift_b = std::sqrt(R * E) * sigma;
                const Vec3 shifts[4] = {shift_a, -shift_a, shift_b, -shift_b};
                for (int st = 0; st < 4; ++st)
                    for (int d = 0; d < 3; ++d)
                        for (int k = 0; k < ng; ++k)
                            hermite_row(nv - 1, rules.g.nodes[k] + shifts[st][d], table(st, d) + k * nv);

                // B at every (r0, r) node pair, times the node weights.
                const double g_norm = 2.0 * std::sqrt(R0 * E);
                for (std::size_t i = 0; i < n0; ++i)
                    for (std::size_t j = 0; j < n1; ++j) {
                        const double r0 = rules.r0.nodes[i];
                        const CollisionVars vars{g_norm, r0 * (1.0 - R0) * E, (1.0 - r0) * (1.0 - R0) * E,
                                                 rules.r.nodes[j], R};
                        bw[i * n1 + j] = rules.r0.weights[i] * rules.r.weights[j] * eval_B(model, spec, vars, cos_abs);
                    }
                for (int st = 0; st < 4; ++st) {
                    const bool pre = st < 2;
                    const GaussRule& fr = pre ? rules.r0 : rules.r;
                    const double scale = pre ? (1.0 - R0) * E : (1.0 - R) * E;
                    lag[st].resize(fr.nodes.size() * nl);
                    for (std::size_t i = 0; i < fr.nodes.size(); ++i) {
                        const double x = st % 2 == 0 ? fr.nodes[i] : 1.0 - fr.nodes[i];
                        laguerre_row(nl - 1, a, x * scale, row);
                        for (int k = 0; k < nl; ++k) lag[st][i * nl + k] = row[k] * basis.laguerre_norm(k);
                    }
                }

                const double weight = rules.e.weights[e] * rules.collision_mass * 0.5 / double(kDrawsPerChunk);
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 4; ++y) {
                        const double coef = weight * (y < 2 ? 1.0 : -1.0) * 0.5;
                        const int sy = y < 2 ? y + 2 : y - 2;
                        for (int d = 0; d < 3; ++d) {
                            const double* tx = table(x, d);
                            const double* ty = table(sy, d);
                            for (int m = 0; m < nv; ++m)
                                for (int q = 0; q < nv; ++q) {
                                    double h = 0.0;
                                    for (int k = 0; k < ng; ++k) h += rules.g.weights[k] * tx[k * nv + m] * ty[k * nv + q];
                                    hd[d][m * nv + q] = h;
                                }
                        }
                        double* vcol = acc.next_v();
                        for (Eigen::Index p = 0; p < n_vel; ++p) {
                            const auto& u = rules.velocity[p];
                            for (Eigen::Index q = 0; q < n_vel; ++q) {
                                const auto& w = rules.velocity[q];
                                vcol[p * n_vel + q] = hd[0][u[0] * nv + w[0]] * hd[1][u[1] * nv + w[1]] * hd[2][u[2] * nv + w[2]];
                            }
                        }
                        double* lrow = acc.next_l();
                        std::fill(lrow, lrow + nl * nl, 0.0);
                        for (std::size_t i = 0; i < n0; ++i)
                            for (std::size_t j = 0; j < n1; ++j) {
                                const double* lx = &lag[x][i * nl];
                                const double* ly = sy < 2 ? &lag[sy][i * nl] : &lag[sy][j * nl];
                                const double c = coef * bw[i * n1 + j];
                                for (int k = 0; k < nl; ++k)
                                    for (int q = 0; q < nl; ++q) lrow[k * nl + q] += c * lx[k] * ly[q];
                            }
                        acc.commit();
                    }
            }
        }
    }
    acc.flush();

    const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXd out(n, n);
    const Eigen::MatrixXd& sum = acc.sum();
    for (Eigen::Index p = 0; p < n_vel; ++p)
        for (Eigen::Index q = 0; q < n_vel; ++q)
            for (int k = 0; k < nl; ++k)
                for (int l = 0; l < nl; ++l) out(p * nl + k, q * nl + l) = sum(p * n_vel + q, k * nl + l);
    if (!out.allFinite()) throw NumericError("assemble: non-finite matrix entries");
    return out;
}

/// The operator commutes with signed permutations of the velocity axes, and the basis maps
/// to ± itself under them. Averaging over that group of 48 elements is exact and removes
/// the part of the sampling noise that breaks the symmetry.
class AxisGroup {
public:
    explicit AxisGroup(const HermiteLaguerreBasis& basis) {
        const std::size_t n = basis.size();
        std::array<int, 3> perm = {0, 1, 2};
        do {
            for (int flips = 0; flips < 8; ++flips) {
                std::vector<Eigen::Index> target(n);
                Eigen::VectorXd sign(n);
                for (std::size_t i = 0; i < n; ++i) {
                    const auto& ix = basis.index(i);
                    std::array<int, 4> image = {0, 0, 0, ix[3]};
                    double sg = 1.0;
                    for (int d = 0; d < 3; ++d) {
                        image[perm[d]] = ix[d];
                        if ((flips >> d & 1) && ix[d] % 2 == 1) sg = -sg;
                    }
                    target[i] = find(basis, image);
                    sign[i] = sg;
                }
                targets_.push_back(std::move(target));
                signs_.push_back(std::move(sign));
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }

    Eigen::MatrixXd average(const Eigen::MatrixXd& a) const {
        const Eigen::Index n = a.rows();
        Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t g = 0; g < targets_.size(); ++g) {
            const auto& t = targets_[g];
            const Eigen::VectorXd& sg = signs_[g];
            for (Eigen::Index j = 0; j < n; ++j)
                for (Eigen::Index i = 0; i < n; ++i) out(i, j) += sg[i] * sg[j] * a(t[i], t[j]);
        }
        return out / double(targets_.size());
    }

private:
    static Eigen::Index find(const HermiteLaguerreBasis& basis, const std::array<int, 4>& ix) {
        for (std::size_t i = 0; i < basis.size(); ++i)
            if (basis.index(i) == ix) return static_cast<Eigen::Index>(i);
        throw BasisError("basis is not closed under axis permutations");
    }

    std::vector<std::vector<Eigen::Index>> targets_;
    std::vector<Eigen::VectorXd> signs_;
};

}  // namespace

OperatorMatrix assemble(const HermiteLaguerreBasis& basis, const GasSpec& spec, const CrossSectionModel& model,
                        const QuadratureSpec& quad) {
    spec.validate();
    model.validate();
    quad.validate();
    quad.require_monte_carlo("assemble");
    const std::uint64_t seed = quad.require_seed();
    if (basis.alpha() != spec.alpha) throw ConfigError("assemble: basis alpha differs from gas alpha");
    const double err = basis.gram_error();
    if (!(err <= kGramTolerance))
        throw BasisError("assemble: Gram matrix deviates from identity by " + std::to_string(err));

    const AssemblyRules rules = make_rules(basis, spec);
    const AxisGroup group(basis);
    const auto n = static_cast<Eigen::Index>(basis.size());
    const std::uint64_t n_chunks = std::max(kMinChunks, (quad.samples + kDrawsPerChunk - 1) / kDrawsPerChunk);

    // Chunk matrices are produced in parallel blocks and folded in chunk order; the
    // standard errors are batch means over chunks.
    const int block = std::max(1, num_threads());
    std::vector<Eigen::MatrixXd> chunk_mean(block);
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd m2_raw = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd m2_sym = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd m2_asym = Eigen::MatrixXd::Zero(n, n);
    std::uint64_t count = 0;
    for (std::uint64_t first = 0; first < n_chunks; first += block) {
        const std::uint64_t last = std::min(n_chunks, first + block);
        ChunkErrors errors;
#pragma omp parallel for schedule(static)
        for (std::int64_t c = static_cast<std::int64_t>(first); c < static_cast<std::int64_t>(last); ++c) {
            try {
                chunk_mean[c - first] =
                    group.average(assemble_chunk(basis, spec, model, rules, seed, static_cast<std::uint64_t>(c)));
            } catch (...) {
                errors.record(static_cast<std::uint64_t>(c), std::current_exception());
            }
        }
        errors.rethrow();
        for (std::uint64_t c = first; c < last; ++c) {
            const Eigen::MatrixXd& x = chunk_mean[c - first];
            ++count;
            const Eigen::MatrixXd d = x - mean;
            mean += d / double(count);
            const Eigen::MatrixXd d2 = x - mean;
            m2_raw += d.cwiseProduct(d2);
            m2_sym += (0.5 * (d + d.transpose())).cwiseProduct(0.5 * (d2 + d2.transpose()));
            m2_asym += (d - d.transpose()).cwiseProduct(d2 - d2.transpose());
        }
    }

    const double scale = 1.0 / (double(count) * double(count - 1));
    OperatorMatrix out;
    out.raw = mean;
    out.a = 0.5 * (mean + mean.transpose());
    out.raw_se = (m2_raw * scale).cwiseSqrt();
    out.se = (m2_sym * scale).cwiseSqrt();
    out.asym_se = (m2_asym * scale).cwiseSqrt();
    out.max_asymmetry = (mean - mean.transpose()).cwiseAbs().maxCoeff();
    out.max_asym_se = out.asym_se.maxCoeff();
    out.samples = count * kDrawsPerChunk;
    out.refinement_warning = out.raw_se.maxCoeff() > 0.1 * mean.cwiseAbs().maxCoeff();
    return out;
}

Spectrum spectrum(const OperatorMatrix& a) {
    if (a.a.rows() != a.a.cols() || a.a.rows() == 0) throw DomainError("spectrum: matrix must be square and nonempty");
    if (!a.a.isApprox(a.a.transpose(), 1e-14)) throw DomainError("spectrum: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a.a, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericError("spectrum: eigensolver did not converge");
    Spectrum out;
    out.tol0 = a.tol0();
    const Eigen::VectorXd& ev = solver.eigenvalues();
    for (Eigen::Index i = ev.size() - 1; i >= 0; --i) out.eigenvalues.push_back(ev[i]);
    for (double l : out.eigenvalues) {
        if (std::abs(l) <= out.tol0) ++out.kernel_dim;
        else if (l > out.tol0) ++out.positive;
        else if (out.gap == 0.0) out.gap = -l;
    }
    return out;
}

KernelCheck kernel_check(const OperatorMatrix& a, const HermiteLaguerreBasis& basis, const GasSpec& spec) {
    if (a.a.rows() != static_cast<Eigen::Index>(basis.size()))
        throw DomainError("kernel_check: matrix and basis sizes differ");
    spec.validate();
    const std::vector<PhaseFunction> invariants = {
        [](const Vec3&, double) { return 1.0; },
        [](const Vec3& v, double) { return v[0]; },
        [](const Vec3& v, double) { return v[1]; },
        [](const Vec3& v, double) { return v[2]; },
        [](const Vec3& v, double I) { return 0.5 * v.squaredNorm() + I; },
    };
    KernelCheck out;
    out.tol0 = a.tol0();
    out.pass = true;
    for (std::size_t i = 0; i < invariants.size(); ++i) {
        double lost = 0.0;
        const Eigen::VectorXd c = basis.project(invariants[i], &lost);
        if (lost > kLostMassLimit)
            throw BasisError("kernel_check: basis loses " + std::to_string(100.0 * lost) +
                             "% of collision invariant " + std::to_string(i));
        const double res = (a.a * c).norm();
        out.residuals.push_back(res);
        out.coefficient_norms.push_back(c.norm());
        out.lost_mass.push_back(lost);
        if (!(res <= out.tol0 * c.norm())) out.pass = false;
    }
    const Eigen::VectorXd control = basis.project([](const Vec3& v, double) { return v[0] * v[0]; });
    out.control_residual = (a.a * control).norm();
    out.control_norm = control.norm();
    return out;
}

}  // namespace polyboltz
