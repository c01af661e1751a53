#include "polyboltz/equilibrium.hpp"

#include <cmath>
#include <numbers>

#include "polyboltz/delta.hpp"
#include "polyboltz/errors.hpp"

namespace polyboltz {

void MaxwellianParams::validate() const {
    if (!(n > 0.0) || !std::isfinite(n)) throw ConfigError("maxwellian.n must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("maxwellian.T must be positive");
    if (!u.allFinite()) throw ConfigError("maxwellian.u must be finite");
}

double maxwellian_prefactor(double alpha) {
    return 1.0 / (std::pow(2.0 * std::numbers::pi, 1.5) * std::tgamma(alpha + 1.0));
}

double eval_maxwellian(const MaxwellianParams& p, const GasSpec& spec, const ParticleState& s) {
    const double a = spec.alpha;
    const double pref = p.n * maxwellian_prefactor(a) / std::pow(p.T, a + 2.5);
    const double ia = a == 0.0 ? 1.0 : std::pow(s.I, a);
    return pref * ia * std::exp(-(0.5 * (s.v - p.u).squaredNorm() + s.I) / p.T);
}

double maxwellian(double alpha, const Vec3& v, double I) {
    const double ia = alpha == 0.0 ? 1.0 : std::pow(I, alpha);
    return maxwellian_prefactor(alpha) * ia * std::exp(-0.5 * v.squaredNorm() - I);
}

double sqrt_maxwellian(double alpha, const Vec3& v, double I) {
    const double ia = alpha == 0.0 ? 1.0 : std::pow(I, 0.5 * alpha);
    return std::sqrt(maxwellian_prefactor(alpha)) * ia * std::exp(-0.25 * v.squaredNorm() - 0.5 * I);
}

Distribution maxwellian_distribution(const MaxwellianParams& params, const GasSpec& spec) {
    params.validate();
    Distribution d;
    d.f = [params, spec](const Vec3& v, double I) { return eval_maxwellian(params, spec, {v, I}); };
    d.v_max = std::max(8.0, params.u.norm() + 8.0 * std::sqrt(params.T));
    d.i_max = 40.0 * params.T;
    d.label = "maxwellian";
    return d;
}

Distribution perturbed_maxwellian(const GasSpec& spec, PhaseFunction eps, std::string label) {
    Distribution d;
    const double alpha = spec.alpha;
    d.f = [alpha, eps = std::move(eps)](const Vec3& v, double I) { return maxwellian(alpha, v, I) * (1.0 + eps(v, I)); };
    d.label = std::move(label);
    return d;
}

namespace {

bool outside(const Distribution& f, const Vec3& v, double I) {
    return v.norm() > f.v_max || I > f.i_max;
}

MomentsResult moments_tensor(const Distribution& f, const GasSpec& spec, const QuadratureSpec& quad) {
    double n = 0.0, abs_total = 0.0, abs_tail = 0.0;
    Vec3 mom = Vec3::Zero();
    double e2 = 0.0;
    for_each_maxwell_node(quad.nodes, spec.alpha, [&](const Vec3& v, double I, double w) {
        const double c = w * f.f(v, I) / maxwellian(spec.alpha, v, I);
        n += c;
        mom += c * v;
        e2 += c * (0.5 * v.squaredNorm() + I);
        abs_total += std::abs(c);
        if (outside(f, v, I)) abs_tail += std::abs(c);
    });
    MomentsResult out;
    const std::uint64_t nodes = static_cast<std::uint64_t>(std::pow(quad.nodes, 4));
    out.n = {n, 0.0, nodes};
    const Vec3 u = mom / n;
    for (int i = 0; i < 3; ++i) out.u[i] = {u(i), 0.0, nodes};
    out.energy = {e2 - 0.5 * n * u.squaredNorm(), 0.0, nodes};
    out.tail_fraction = abs_total > 0.0 ? abs_tail / abs_total : 0.0;
    return out;
}

MomentsResult moments_mc(const Distribution& f, const GasSpec& spec, const QuadratureSpec& quad) {
    const std::uint64_t seed = quad.require_seed();
    const double a = spec.alpha;
    auto ratio = [&](const Vec3& v, double I) { return f.f(v, I) / maxwellian(a, v, I); };
    // First pass: density, momentum and the tail share.
    const auto first = mc_estimate(6, quad.samples, seed, 0x4d4f4d, [&](Sampler& s, double* out) {
        const Vec3 v = s.normal3();
        const double I = s.gamma(a + 1.0);
        const double w = ratio(v, I);
        out[0] = w;
        out[1] = w * v.x();
        out[2] = w * v.y();
        out[3] = w * v.z();
        out[4] = std::abs(w);
        out[5] = outside(f, v, I) ? std::abs(w) : 0.0;
    });
    const double n = first[0].value;
    const Vec3 u(first[1].value / n, first[2].value / n, first[3].value / n);
    // Second pass over the same samples: influence functions of u and the energy
    // moment about the estimated u give their standard errors directly.
    const auto second = mc_estimate(4, quad.samples, seed, 0x4d4f4d, [&](Sampler& s, double* out) {
        const Vec3 v = s.normal3();
        const double I = s.gamma(a + 1.0);
        const double w = ratio(v, I);
        const Vec3 dv = v - u;
        for (int i = 0; i < 3; ++i) out[i] = w * dv(i) / n;
        out[3] = w * (0.5 * dv.squaredNorm() + I);
    });
    MomentsResult out;
    out.n = first[0];
    for (int i = 0; i < 3; ++i) out.u[i] = {u(i), second[i].std_err, second[i].samples};
    out.energy = second[3];
    out.tail_fraction = first[4].value > 0.0 ? first[5].value / first[4].value : 0.0;
    return out;
}

}  // namespace

MomentsResult moments(const Distribution& f, const GasSpec& spec, const QuadratureSpec& quad) {
    spec.validate();
    quad.validate();
    MomentsResult out = quad.scheme == Scheme::Tensor ? moments_tensor(f, spec, quad) : moments_mc(f, spec, quad);
    out.truncation_warning = out.tail_fraction > 1e-6;
    return out;
}

Estimate entropy_production(const Distribution& f, const GasSpec& spec, const CrossSectionModel& model,
                            const QuadratureSpec& quad) {
    spec.validate();
    model.validate();
    quad.validate();
    quad.require_monte_carlo("entropy_production");
    const double a = spec.alpha;
    const double vol = delta_volume(quad.margin);
    auto ratio = [&](const ParticleState& p) {
        const double fv = f.f(p.v, p.I);
        if (!(fv > 0.0)) throw DomainError("entropy_production: f is not positive at a quadrature node");
        return fv / maxwellian(a, p.v, p.I);
    };
    // With (v,I) ~ M and (v*,I*) ~ M*, F/(M M*) = ρρ* for ρ = f/M, and F'/F = ρ'ρ'*/(ρρ*)
    // because M M* / (I I*)^α is collision invariant.
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x454e54, [&](Sampler& s) {
        const ParticleState p{s.normal3(), s.gamma(a + 1.0)};
        const Collision c = collide(p, draw_delta(s, a, quad.margin), a);
        const double pre = ratio(c.s) * ratio(c.s_star);
        const double post = ratio(c.post) * ratio(c.post_star);
        const double B = eval_B(model, spec, c.vars, c.cos_abs);
        const double value = -0.25 * vol * c.weight * B * (post - pre) * std::log(post / pre);
        if (!std::isfinite(value)) throw NumericError("entropy_production: non-finite integrand");
        return value;
    });
}

}  // namespace polyboltz
