#include "polyboltz/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "polyboltz/errors.hpp"

namespace polyboltz {

void QuadratureSpec::validate() const {
    if (samples == 0) throw ConfigError("quadrature.samples must be positive");
    if (nodes < 2 || nodes > 200) throw ConfigError("quadrature.nodes must be in [2, 200]");
    if (!(v_max > 0.0)) throw ConfigError("quadrature.v_max must be positive");
    if (!(i_max > 0.0)) throw ConfigError("quadrature.i_max must be positive");
    if (!(margin >= 0.0 && margin < 0.5)) throw ConfigError("quadrature.margin must be in [0, 0.5)");
}

std::uint64_t QuadratureSpec::require_seed() const {
    if (!seed) throw ConfigError("quadrature.seed is required for Monte Carlo evaluation");
    return *seed;
}

void QuadratureSpec::require_monte_carlo(const char* what) const {
    if (scheme != Scheme::MonteCarlo) {
        throw ConfigError(std::string(what) + " supports only the MonteCarlo scheme");
    }
}

double z_score(const Estimate& a, const Estimate& b) {
    const double se = std::hypot(a.std_err, b.std_err);
    const double d = a.value - b.value;
    if (se == 0.0) return d == 0.0 ? 0.0 : std::copysign(INFINITY, d);
    return d / se;
}

bool within_se(const Estimate& e, double k, double floor) {
    return std::abs(e.value) <= k * e.std_err + floor;
}

void set_num_threads(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int num_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk) {
    return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ chunk);
}

Sampler::Sampler(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk)
    : engine_(mix_seed(seed, stream, chunk)) {}

double Sampler::uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Sampler::normal() { return normal_(engine_); }

Vec3 Sampler::normal3() {
    const double a = normal();
    const double b = normal();
    const double c = normal();
    return {a, b, c};
}

Vec3 Sampler::sphere() {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform();
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {rho * std::cos(phi), rho * std::sin(phi), z};
}

double Sampler::gamma(double shape) {
    return std::gamma_distribution<double>(shape, 1.0)(engine_);
}

LogisticDraw logistic_from_uniform(double u, double eps) {
    const double L = std::log((1.0 - eps) / eps);
    const double t = L * (2.0 * u - 1.0);
    const double x = 1.0 / (1.0 + std::exp(-t));
    return {x, 2.0 * L * x * (1.0 - x)};
}

LogisticDraw logistic_draw(Sampler& s, double eps) { return logistic_from_uniform(s.uniform(), eps); }

void RunningStats::add(const double* x) {
    ++count;
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double d = x[i] - mean[i];
        mean[i] += d * inv;
        m2[i] += d * (x[i] - mean[i]);
    }
}

void RunningStats::merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(count);
    const double nb = static_cast<double>(other.count);
    const double n = na + nb;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        const double d = other.mean[i] - mean[i];
        mean[i] += d * nb / n;
        m2[i] += other.m2[i] + d * d * na * nb / n;
    }
    count += other.count;
}

std::vector<Estimate> RunningStats::estimates() const {
    std::vector<Estimate> out(mean.size());
    for (std::size_t i = 0; i < mean.size(); ++i) {
        out[i].value = mean[i];
        out[i].samples = count;
        out[i].std_err = count > 1 ? std::sqrt(m2[i] / static_cast<double>(count - 1) /
                                               static_cast<double>(count))
                                   : INFINITY;
    }
    return out;
}

namespace {

RunningStats reduce_range(std::vector<RunningStats>& parts, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return parts[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    RunningStats left = reduce_range(parts, lo, mid);
    left.merge(reduce_range(parts, mid, hi));
    return left;
}

}  // namespace

RunningStats pairwise_reduce(std::vector<RunningStats>& parts) {
    if (parts.empty()) return RunningStats();
    return reduce_range(parts, 0, parts.size());
}

void ChunkErrors::record(std::uint64_t chunk, std::exception_ptr e) {
    std::lock_guard<std::mutex> lock(mutex_);
    if (chunk < first_) {
        first_ = chunk;
        error_ = e;
    }
}

void ChunkErrors::rethrow() const {
    if (error_) std::rethrow_exception(error_);
}

namespace {

GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& off) {
    const Eigen::Index n = diag.size();
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    J.diagonal() = diag;
    for (Eigen::Index i = 0; i + 1 < n; ++i) J(i, i + 1) = J(i + 1, i) = off(i);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
    if (eig.info() != Eigen::Success) throw NumericError("Golub-Welsch eigensolve failed");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[i] = eig.eigenvalues()(i);
        const double q = eig.eigenvectors()(0, i);
        rule.weights[i] = q * q;
    }
    return rule;
}

}  // namespace

GaussRule gauss_hermite(int n) {
    if (n < 1) throw DomainError("gauss_hermite: need at least one node");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(static_cast<double>(k));
    return golub_welsch(diag, off);
}

GaussRule gauss_laguerre(int n, double alpha) {
    if (n < 1) throw DomainError("gauss_laguerre: need at least one node");
    if (!(alpha > -1.0)) throw DomainError("gauss_laguerre: alpha must exceed -1");
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    for (int k = 0; k < n; ++k) diag(k) = 2.0 * k + 1.0 + alpha;
    for (int k = 1; k < n; ++k) off(k - 1) = std::sqrt(k * (k + alpha));
    return golub_welsch(diag, off);
}

GaussRule gauss_jacobi(int n, double p, double q) {
    if (n < 1) throw DomainError("gauss_jacobi: need at least one node");
    if (!(p > -1.0) || !(q > -1.0)) throw DomainError("gauss_jacobi: exponents must exceed -1");
    // Monic Jacobi recurrence on [-1, 1] with weight (1-t)^q (1+t)^p, mapped to x = (1+t)/2.
    const double a = q;
    const double b = p;
    Eigen::VectorXd diag(n);
    Eigen::VectorXd off(std::max(n - 1, 0));
    diag(0) = (b - a) / (a + b + 2.0);
    for (int k = 1; k < n; ++k) {
        const double s = 2.0 * k + a + b;
        diag(k) = (b * b - a * a) / (s * (s + 2.0));
        off(k - 1) = std::sqrt(4.0 * k * (k + a) * (k + b) * (k + a + b) / (s * s * (s + 1.0) * (s - 1.0)));
    }
    GaussRule rule = golub_welsch(diag, off);
    for (double& x : rule.nodes) x = 0.5 * (1.0 + x);
    return rule;
}

}  // namespace polyboltz
