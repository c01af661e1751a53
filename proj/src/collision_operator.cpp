#include "polyboltz/collision_operator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "polyboltz/delta.hpp"
#include "polyboltz/errors.hpp"

namespace polyboltz {

namespace {

double ipow(double x, double a) { return a == 0.0 ? 1.0 : std::pow(x, a); }

void check_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw NumericError(std::string("collision integrand: non-finite ") + what);
}

/// (gain - loss) weighted by (I I*)^α, i.e. f'f'*(I I*/(I'I'*))^α - f f*.
double gain_minus_loss(const Distribution& f, double alpha, const ParticleState& s, const ParticleState& s_star,
                       const ParticleState& post, const ParticleState& post_star) {
    const double ratio = alpha == 0.0 ? 1.0 : std::pow(s.I * s_star.I / (post.I * post_star.I), alpha);
    const double gain = f.f(post.v, post.I) * f.f(post_star.v, post_star.I) * ratio;
    check_finite(gain, "gain term f'f'*/(I'I'*)^a");
    const double loss = f.f(s.v, s.I) * f.f(s_star.v, s_star.I);
    check_finite(loss, "loss term f f*");
    return gain - loss;
}

double q_sample(const Distribution& f, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                double margin, Sampler& rng) {
    const double a = spec.alpha;
    const DeltaDraw d = draw_delta(rng, a, margin);
    const Collision c = collide(s, d, a);
    const double B = eval_B(model, spec, c.vars, c.cos_abs);
    const double value = delta_volume(margin) * c.weight * B *
                         gain_minus_loss(f, a, c.s, c.s_star, c.post, c.post_star) /
                         maxwellian(a, d.star.v, d.star.I);
    check_finite(value, "Q sample");
    return value;
}

}  // namespace

Estimate eval_Q(const Distribution& f, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                const QuadratureSpec& quad) {
    quad.validate();
    quad.require_monte_carlo("eval_Q");
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x51,
                              [&](Sampler& rng) { return q_sample(f, s, spec, model, quad.margin, rng); });
}

WReconstruction reconstruct(const WPoint& p) {
    if (!(p.E > 0.0)) throw DomainError("W point: E must be positive");
    if (p.I < 0.0) throw DomainError("W point: I < 0");
    if (p.I_prime < 0.0) throw DomainError("W point: I' < 0");
    WReconstruction w;
    const Vec3 half_g = p.v - p.G;
    w.s_star = {2.0 * p.G - p.v, p.E - half_g.squaredNorm() - p.I};
    if (w.s_star.I < 0.0) throw DomainError("W point: reconstructed I* = E - |v-G|^2 - I is negative");
    const Vec3 d = p.v_prime - p.G;
    w.R = d.squaredNorm() / p.E;
    if (!(w.R < 1.0)) throw DomainError("W point: R = |v'-G|^2/E is not below 1");
    if (!(w.R > 0.0)) throw DomainError("W point: v' = G leaves sigma undefined");
    w.sigma = d / d.norm();
    const double internal = (1.0 - w.R) * p.E;
    w.post_star = {2.0 * p.G - p.v_prime, internal - p.I_prime};
    if (w.post_star.I < 0.0) throw DomainError("W point: reconstructed I'* = (1-R)E - I' is negative");
    w.r = p.I_prime / internal;
    return w;
}

WPoint w_point_from_collision(const ParticleState& s, const ParticleState& s_star, const CollisionParams& p) {
    const auto [post, post_star] = post_collision(s, s_star, p);
    const CenterOfMass cm = center_of_mass(s, s_star);
    return {s.v, s.I, post.v, post.I, cm.G, cm.E};
}

double eval_W(const GasSpec& spec, const CrossSectionModel& model, const WPoint& p) {
    const WReconstruction w = reconstruct(p);
    const Vec3 g = p.v - w.s_star.v;
    const double gn = g.norm();
    if (!(gn > 0.0)) throw DomainError("W point: v = v* leaves g/|g| undefined");
    const double dist = (w.sigma - g / gn).norm();
    const CollisionVars vars{gn, p.I, w.s_star.I, w.r, w.R};
    const double a = spec.alpha;
    return 8.0 * b_sigma_density(model, spec, vars, dist) *
           ipow(p.I_prime * w.post_star.I * p.I * w.s_star.I, a) * std::pow(p.E, -2.5 - 2.0 * a);
}

Estimate eval_Q_equiv(const Distribution& f, const ParticleState& s, const GasSpec& spec,
                      const CrossSectionModel& model, const QuadratureSpec& quad, bool double_cover) {
    quad.validate();
    quad.require_monte_carlo("eval_Q_equiv");
    const double a = spec.alpha;
    const double cover = double_cover ? 2.0 : 1.0;
    // Proposal: G = (v + v*)/2 with v* ~ N(0,1); E = |v-G|² + I + I* with I* ~ Gamma(α+1);
    // v' uniform in the ball |v'-G| < √E; I' uniform on (0, E - |v'-G|²).
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x5145, [&](Sampler& rng) {
        const Vec3 v_star = rng.normal3();
        const double I_star = rng.gamma(a + 1.0);
        const Vec3 G = 0.5 * (s.v + v_star);
        const double E = (s.v - G).squaredNorm() + s.I + I_star;
        const double rad = std::sqrt(E) * std::cbrt(rng.uniform());
        const Vec3 v_prime = G + rad * rng.sphere();
        const double room = E - rad * rad;
        const double I_prime = room * rng.uniform();

        const double dens_G = 8.0 * maxwellian(0.0, v_star, 0.0);
        const double dens_Istar = ipow(I_star, a) * std::exp(-I_star) / std::tgamma(a + 1.0);
        const double dens_v = 3.0 / (4.0 * std::numbers::pi * E * std::sqrt(E));
        const double q = dens_G * dens_Istar * dens_v / room;

        const WPoint p{s.v, s.I, v_prime, I_prime, G, E};
        const WReconstruction w = reconstruct(p);
        const double W = eval_W(spec, model, p);
        const ParticleState post{v_prime, I_prime};
        const double fp = f.f(post.v, post.I) * f.f(w.post_star.v, w.post_star.I);
        const double fs = f.f(s.v, s.I) * f.f(w.s_star.v, w.s_star.I);
        const double bracket = fp / ipow(I_prime * w.post_star.I, a) - fs / ipow(s.I * w.s_star.I, a);
        const double value = cover * W * bracket / q;
        check_finite(value, "Q_equiv sample");
        return value;
    });
}

Estimate weak_residual(const Distribution& f, const PhaseFunction& phi, const GasSpec& spec,
                       const CrossSectionModel& model, const QuadratureSpec& quad) {
    quad.validate();
    quad.require_monte_carlo("weak_residual");
    const double a = spec.alpha;
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x5752, [&](Sampler& rng) {
        const ParticleState s{rng.normal3(), rng.gamma(a + 1.0)};
        const double q = q_sample(f, s, spec, model, quad.margin, rng);
        return q * phi(s.v, s.I) / maxwellian(a, s.v, s.I);
    });
}

}  // namespace polyboltz
