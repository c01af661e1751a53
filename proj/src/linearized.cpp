#include "polyboltz/linearized.hpp"

#include <cmath>
#include <numbers>

#include "polyboltz/delta.hpp"
#include "polyboltz/errors.hpp"

namespace polyboltz {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSliceFloor = 1e-300;

double pw(double x, double a) { return a == 0.0 ? 1.0 : std::pow(x, a); }

/// Half the Maxwellian exponent, |v|²/4 + I/2.
double half_energy(const ParticleState& p) { return 0.25 * p.v.squaredNorm() + 0.5 * p.I; }

struct KSample {
    double k1, k2, k3, nu;
};

/// Per-sample 𝒦_i g(v, I) integrands for (v*, I*) drawn from M*.
KSample k_sample(const PhaseFunction& g, const Collision& c, const GasSpec& spec, const CrossSectionModel& model,
                 double vol) {
    const double ha = 0.5 * spec.alpha;
    const double base = vol * c.weight * eval_B(model, spec, c.vars, c.cos_abs);
    const double e_star = half_energy(c.s_star);
    KSample k;
    k.nu = base * g(c.s.v, c.s.I);
    k.k1 = base * pw(c.s.I / c.s_star.I, ha) * std::exp(e_star - half_energy(c.s)) * g(c.s_star.v, c.s_star.I);
    k.k2 = base * pw(c.s.I / c.post_star.I, ha) * std::exp(e_star - half_energy(c.post)) *
           g(c.post_star.v, c.post_star.I);
    k.k3 = base * pw(c.s.I / c.post.I, ha) * std::exp(e_star - half_energy(c.post_star)) * g(c.post.v, c.post.I);
    if (!std::isfinite(k.k1 + k.k2 + k.k3 + k.nu)) throw NumericError("linearized operator: non-finite integrand");
    return k;
}

void check_inputs(const GasSpec& spec, const CrossSectionModel& model, const QuadratureSpec& quad, const char* what) {
    spec.validate();
    model.validate();
    quad.validate();
    quad.require_monte_carlo(what);
}

/// κ2 or κ3 at one (r, R, σ), zero outside the slice.
double kappa_h(Branch branch, const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I,
               const Vec3& x, double y, double r, double R, const Vec3& sigma) {
    const HAnchor anchor{v, I, r, R, sigma};
    const ParticleState star = h_inverse_raw(branch, anchor, {x, y});
    if (!(star.I > kSliceFloor)) return 0.0;
    const double a = spec.alpha;
    const Vec3 G = 0.5 * (v + star.v);
    const Vec3 g = v - star.v;
    const double gn = g.norm();
    if (!(gn > 0.0)) return 0.0;
    const double dist = (sigma - g / gn).norm();
    const double bs = b_sigma_density(model, spec, {gn, I, star.I, r, R}, dist);
    // The partner of x in the collision and its internal energy.
    const ParticleState other{2.0 * G - x, branch == Branch::K2 ? r * y / (1.0 - r) : (1.0 - r) * y / r};
    return maxwellian_prefactor(a) * pw(y, -0.5 * a) * collision_weight(a, r, R) * pw(I, 0.5 * a) *
           pw(star.I, a) * bs * h_jacobian(branch, r, R) *
           std::exp(-0.5 * star.I - 0.5 * other.I - 0.25 * star.v.squaredNorm() - 0.25 * other.v.squaredNorm());
}

double kappa_1(const GasSpec& spec, const CrossSectionModel& model, const ParticleState& s, const ParticleState& star,
               double r, double R, double cos_abs) {
    const double a = spec.alpha;
    const double gn = (s.v - star.v).norm();
    const double B = eval_B(model, spec, {gn, s.I, star.I, r, R}, cos_abs);
    return maxwellian_prefactor(a) * pw(s.I * star.I, 0.5 * a) * collision_weight(a, r, R) * B *
           std::exp(-half_energy(s) - half_energy(star));
}

}  // namespace

std::string kernel_name(KernelId k) {
    switch (k) {
        case KernelId::K1: return "k1";
        case KernelId::K2: return "k2";
        case KernelId::K3: return "k3";
    }
    return "?";
}

std::string verdict_name(HsVerdict v) {
    switch (v) {
        case HsVerdict::Finite: return "FINITE";
        case HsVerdict::Divergent: return "DIVERGENT";
        case HsVerdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

Estimate eval_k1(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& v_star,
                 double I_star, const QuadratureSpec& quad) {
    check_inputs(spec, model, quad, "eval_k1");
    const double vol = delta_volume(quad.margin);
    const double span = 1.0 - 2.0 * quad.margin;
    const ParticleState s{v, I}, star{v_star, I_star};
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x6b31, [&](Sampler& rng) {
        const double r = quad.margin + span * rng.uniform();
        const double R = quad.margin + span * rng.uniform();
        // Only |ω·ĝ| matters, and it is uniform on (0,1) for ω uniform on S².
        const double cos_abs = rng.uniform();
        return vol * kappa_1(spec, model, s, star, r, R, cos_abs);
    });
}

namespace {

Estimate eval_kh(Branch branch, const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I,
                 const Vec3& x, double y, const QuadratureSpec& quad, std::uint64_t stream) {
    check_inputs(spec, model, quad, "eval_k2/eval_k3");
    if (!(y > 0.0)) throw DomainError("kernel second argument: y must be positive");
    const double vol = delta_volume(quad.margin);
    const double span = 1.0 - 2.0 * quad.margin;
    return mc_estimate_scalar(quad.samples, quad.require_seed(), stream, [&](Sampler& rng) {
        const double r = quad.margin + span * rng.uniform();
        const double R = quad.margin + span * rng.uniform();
        return vol * kappa_h(branch, spec, model, v, I, x, y, r, R, rng.sphere());
    });
}

}  // namespace

Estimate eval_k2(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& x, double y,
                 const QuadratureSpec& quad) {
    return eval_kh(Branch::K2, spec, model, v, I, x, y, quad, 0x6b32);
}

Estimate eval_k3(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& x, double y,
                 const QuadratureSpec& quad) {
    return eval_kh(Branch::K3, spec, model, v, I, x, y, quad, 0x6b33);
}

Estimate eval_kernel(KernelId which, const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I,
                     const Vec3& x, double y, const QuadratureSpec& quad) {
    switch (which) {
        case KernelId::K1: return eval_k1(spec, model, v, I, x, y, quad);
        case KernelId::K2: return eval_k2(spec, model, v, I, x, y, quad);
        case KernelId::K3: return eval_k3(spec, model, v, I, x, y, quad);
    }
    throw DomainError("unknown kernel");
}

KParts apply_K_parts(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                     const CrossSectionModel& model, const QuadratureSpec& quad) {
    check_inputs(spec, model, quad, "apply_K");
    const double a = spec.alpha;
    const double vol = delta_volume(quad.margin);
    const auto est = mc_estimate(6, quad.samples, quad.require_seed(), 0x4b, [&](Sampler& rng, double* out) {
        const KSample k = k_sample(g, collide(s, draw_delta(rng, a, quad.margin), a), spec, model, vol);
        out[0] = k.k1;
        out[1] = k.k2;
        out[2] = k.k3;
        out[3] = k.nu;
        out[4] = k.k3 + k.k2 - k.k1;
        out[5] = out[4] - k.nu;
    });
    return {est[0], est[1], est[2], est[3], est[4], est[5]};
}

Estimate apply_K(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad) {
    return apply_K_parts(g, s, spec, model, quad).K;
}

Estimate apply_L(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad) {
    return apply_K_parts(g, s, spec, model, quad).L;
}

Estimate delta_apply(KernelId which, const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                     const CrossSectionModel& model, const QuadratureSpec& quad) {
    const KParts p = apply_K_parts(g, s, spec, model, quad);
    switch (which) {
        case KernelId::K1: return p.k1;
        case KernelId::K2: return p.k2;
        case KernelId::K3: return p.k3;
    }
    throw DomainError("unknown kernel");
}

Estimate kernel_apply(KernelId which, const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                      const CrossSectionModel& model, const QuadratureSpec& quad, int inner) {
    check_inputs(spec, model, quad, "kernel_apply");
    if (inner < 1) throw DomainError("kernel_apply: inner sample count must be positive");
    const double a = spec.alpha;
    const double vol = delta_volume(quad.margin);
    const double span = 1.0 - 2.0 * quad.margin;
    const double shape = 0.5 * a + 1.0;
    const double log_norm_y = std::lgamma(shape) + shape * std::log(2.0);
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x6b61, [&](Sampler& rng) {
        const Vec3 x = std::sqrt(2.0) * rng.normal3();
        const double y = 2.0 * rng.gamma(shape);
        const double log_q = -1.5 * std::log(4.0 * kPi) - 0.25 * x.squaredNorm() + 0.5 * a * std::log(y) - 0.5 * y -
                             log_norm_y;
        double acc = 0.0;
        for (int i = 0; i < inner; ++i) {
            const double r = quad.margin + span * rng.uniform();
            const double R = quad.margin + span * rng.uniform();
            if (which == KernelId::K1) {
                acc += kappa_1(spec, model, s, {x, y}, r, R, rng.uniform());
            } else {
                const Branch b = which == KernelId::K2 ? Branch::K2 : Branch::K3;
                acc += kappa_h(b, spec, model, s.v, s.I, x, y, r, R, rng.sphere());
            }
        }
        return vol * acc / inner * g(x, y) * std::exp(-log_q);
    });
}

PairedInner k_symmetry(const PhaseFunction& g, const PhaseFunction& h, const GasSpec& spec,
                       const CrossSectionModel& model, const QuadratureSpec& quad) {
    check_inputs(spec, model, quad, "k_symmetry");
    const double a = spec.alpha;
    const double vol = delta_volume(quad.margin);
    const auto est = mc_estimate(3, quad.samples, quad.require_seed(), 0x53594d, [&](Sampler& rng, double* out) {
        const ParticleState s{rng.normal3(), rng.gamma(a + 1.0)};
        const Collision c = collide(s, draw_delta(rng, a, quad.margin), a);
        const KSample kg = k_sample(g, c, spec, model, vol);
        const KSample kh = k_sample(h, c, spec, model, vol);
        const double inv_m = 1.0 / maxwellian(a, s.v, s.I);
        out[0] = (kg.k3 + kg.k2 - kg.k1) * h(s.v, s.I) * inv_m;
        out[1] = (kh.k3 + kh.k2 - kh.k1) * g(s.v, s.I) * inv_m;
        out[2] = out[0] - out[1];
    });
    return {est[0], est[1], est[2]};
}

Estimate l_quadratic_form(const PhaseFunction& g, const GasSpec& spec, const CrossSectionModel& model,
                          const QuadratureSpec& quad) {
    check_inputs(spec, model, quad, "l_quadratic_form");
    const double a = spec.alpha;
    const double vol = delta_volume(quad.margin);
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x4c4c, [&](Sampler& rng) {
        const ParticleState s{rng.normal3(), rng.gamma(a + 1.0)};
        const KSample k = k_sample(g, collide(s, draw_delta(rng, a, quad.margin), a), spec, model, vol);
        return (k.k3 + k.k2 - k.k1 - k.nu) * g(s.v, s.I) / maxwellian(a, s.v, s.I);
    });
}

HsVerdict classify_ladder(const std::vector<Estimate>& values, double* last_growth) {
    if (values.size() < 2) return HsVerdict::Inconclusive;
    bool monotone = true;
    double growth = 0.0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        growth = (values[i].value - values[i - 1].value) / std::abs(values[i - 1].value);
        if (!(growth > 0.0)) monotone = false;
    }
    if (last_growth) *last_growth = growth;
    if (!std::isfinite(values.back().value)) return HsVerdict::Divergent;
    if (std::abs(growth) <= 0.05) return HsVerdict::Finite;
    if (monotone && growth > 0.10) return HsVerdict::Divergent;
    return HsVerdict::Inconclusive;
}

namespace {

/// Weight of the κ2/κ3 squared integrand after the (v, I) -> (v', E) or (v'*, E) change of
/// variables, for one margin. Returns 0 outside the admissible set.
double hs_h_weight(Branch branch, const GasSpec& spec, const CrossSectionModel& model, const Vec3& v_star,
                   double I_star, const Vec3& anchor, double e_unit, const Vec3& sigma, const LogisticDraw& r,
                   const LogisticDraw& R, double omega_vol) {
    const double a = spec.alpha;
    const double gm = spec.gamma;
    const double share = branch == Branch::K2 ? r.x : 1.0 - r.x;
    const double rate = share * (1.0 - R.x);
    const double E = e_unit / rate;
    const double lambda = std::sqrt(R.x * E);
    const Vec3 G = branch == Branch::K2 ? Vec3(anchor - lambda * sigma) : Vec3(anchor + lambda * sigma);
    const Vec3 v = 2.0 * G - v_star;
    const double I = E - (G - v_star).squaredNorm() - I_star;
    if (!(I > 0.0)) return 0.0;
    const Vec3 g = v - v_star;
    const double gn = g.norm();
    if (!(gn > 0.0)) return 0.0;
    const double dist = (sigma - g / gn).norm();
    const double bs = b_sigma_density(model, spec, {gn, I, I_star, r.x, R.x}, dist);
    const double y = (branch == Branch::K2 ? 1.0 - r.x : r.x) * (1.0 - R.x) * E;
    const double w = collision_weight(a, r.x, R.x);
    const double pref = 1.0 / std::pow(std::tgamma(a + 1.0), 2);
    return omega_vol * 8.0 * pref * pw(I, a) * pw(y, -a) * w * w * bs * bs * h_jacobian(branch, r.x, R.x) *
           std::tgamma(2.0 * a + 1.0) * std::tgamma(gm + 1.0) / (std::pow(rate, gm + 1.0) * pw(E, gm)) * 4.0 * kPi *
           r.inv_density * R.inv_density;
}

}  // namespace

HsLadder hs_norm_estimate(KernelId which, const GasSpec& spec, const CrossSectionModel& model,
                          const QuadratureSpec& quad, const std::vector<double>& margins, bool require_assumptions) {
    check_inputs(spec, model, quad, "hs_norm_estimate");
    if (margins.empty()) throw DomainError("hs_norm_estimate: empty margin ladder");
    for (double eps : margins)
        if (!(eps > 0.0 && eps < 0.5)) throw DomainError("hs_norm_estimate: margins must lie in (0, 0.5)");
    if (require_assumptions) {
        const AssumptionReport rep = verify_assumptions(model, spec, quad);
        const char* needed = which == KernelId::K1 ? "upper_bound" : which == KernelId::K2 ? "k2_integrability"
                                                                                           : "k3_integrability";
        for (const char* name : {"upper_bound", needed}) {
            const CheckResult* c = rep.find(name);
            if (c && !c->pass) {
                throw DomainError("hs_norm_estimate: model fails the " + std::string(name) + " assumption (" +
                                  c->detail + ")");
            }
        }
    }
    const double a = spec.alpha;
    const double gm = spec.gamma;
    const std::size_t n = margins.size();
    const auto est = mc_estimate(n, quad.samples, quad.require_seed(), 0x4853 + static_cast<int>(which),
                                 [&](Sampler& rng, double* out) {
        const double ur = rng.uniform();
        const double uR = rng.uniform();
        if (which == KernelId::K1) {
            const ParticleState s{rng.normal3(), rng.gamma(a + 1.0)};
            const ParticleState star{rng.normal3(), rng.gamma(a + 1.0)};
            const double cos_abs = rng.uniform();
            const double gn = (s.v - star.v).norm();
            for (std::size_t k = 0; k < n; ++k) {
                const LogisticDraw r = logistic_from_uniform(ur, margins[k]);
                const LogisticDraw R = logistic_from_uniform(uR, margins[k]);
                const double B = eval_B(model, spec, {gn, s.I, star.I, r.x, R.x}, cos_abs);
                const double w = collision_weight(a, r.x, R.x);
                out[k] = delta_volume(margins[k]) * 4.0 * kPi * r.inv_density * R.inv_density * w * w * B * B;
            }
            return;
        }
        const Vec3 v_star = rng.normal3();
        const Vec3 anchor = rng.normal3();
        const double I_star = rng.gamma(2.0 * a + 1.0);
        const double e_unit = rng.gamma(gm + 1.0);
        const Vec3 sigma = rng.sphere();
        const Branch b = which == KernelId::K2 ? Branch::K2 : Branch::K3;
        for (std::size_t k = 0; k < n; ++k) {
            out[k] = hs_h_weight(b, spec, model, v_star, I_star, anchor, e_unit, sigma,
                                 logistic_from_uniform(ur, margins[k]), logistic_from_uniform(uR, margins[k]),
                                 delta_volume(margins[k]));
        }
    });
    HsLadder out;
    out.which = which;
    out.margins = margins;
    out.values = est;
    out.verdict = classify_ladder(est, &out.last_growth);
    return out;
}

Estimate kernel_row_bound(KernelId which, const ParticleState& s, const GasSpec& spec,
                          const CrossSectionModel& model, const QuadratureSpec& quad) {
    check_inputs(spec, model, quad, "kernel_row_bound");
    const double a = spec.alpha;
    const double eps = quad.margin > 0.0 ? quad.margin : 1e-9;
    const double omega_vol = delta_volume(eps);
    const double M = maxwellian(a, s.v, s.I);
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x524f57 + static_cast<int>(which),
                              [&](Sampler& rng) {
        const LogisticDraw r = logistic_draw(rng, eps);
        const LogisticDraw R = logistic_draw(rng, eps);
        const double dens = omega_vol * 4.0 * kPi * r.inv_density * R.inv_density;
        if (which == KernelId::K1) {
            const ParticleState star{rng.normal3(), rng.gamma(a + 1.0)};
            const double gn = (s.v - star.v).norm();
            const double B = eval_B(model, spec, {gn, s.I, star.I, r.x, R.x}, rng.uniform());
            const double w = collision_weight(a, r.x, R.x);
            return dens * M * w * w * B * B;
        }
        const ParticleState star{rng.normal3(), rng.gamma(2.0 * a + 1.0)};
        const Vec3 sigma = rng.sphere();
        const Vec3 G = 0.5 * (s.v + star.v);
        const Vec3 g = s.v - star.v;
        const double gn = g.norm();
        if (!(gn > 0.0)) return 0.0;
        const double E = 0.25 * gn * gn + s.I + star.I;
        const double lambda = std::sqrt(R.x * E);
        const bool k2 = which == KernelId::K2;
        // Second argument (x, y) and the remaining post-collision partner.
        const double y = (k2 ? 1.0 - r.x : r.x) * (1.0 - R.x) * E;
        const ParticleState other{k2 ? Vec3(G + lambda * sigma) : Vec3(G - lambda * sigma),
                                  (k2 ? r.x : 1.0 - r.x) * (1.0 - R.x) * E};
        const double dist = (sigma - g / gn).norm();
        const double bs = b_sigma_density(model, spec, {gn, s.I, star.I, r.x, R.x}, dist);
        const double w = collision_weight(a, r.x, R.x);
        const double C = maxwellian_prefactor(a);
        return dens * C * C * pw(s.I, a) * pw(y, -a) * std::exp(-0.5 * other.v.squaredNorm() - other.I) * w * w *
               bs * bs * h_jacobian(k2 ? Branch::K2 : Branch::K3, r.x, R.x) * std::pow(2.0 * kPi, 1.5) *
               std::tgamma(2.0 * a + 1.0);
    });
}

}  // namespace polyboltz
