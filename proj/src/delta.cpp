#include "polyboltz/delta.hpp"

#include <cmath>
#include <numbers>

namespace polyboltz {

double collision_weight(double alpha, double r, double R) {
    const double w = (1.0 - R) * std::sqrt(R);
    if (alpha == 0.0) return w;
    return std::pow(r * (1.0 - r), alpha) * std::pow(1.0 - R, 2.0 * alpha) * w;
}

DeltaDraw draw_delta(Sampler& s, double alpha, double margin) {
    DeltaDraw d;
    d.star.v = s.normal3();
    d.star.I = s.gamma(alpha + 1.0);
    const double span = 1.0 - 2.0 * margin;
    d.r = margin + span * s.uniform();
    d.R = margin + span * s.uniform();
    d.omega_local = s.sphere();
    return d;
}

double delta_volume(double margin) {
    const double span = 1.0 - 2.0 * margin;
    return 4.0 * std::numbers::pi * span * span;
}

Collision collide(const ParticleState& s, const DeltaDraw& d, double alpha) {
    Collision c;
    c.s = s;
    c.s_star = d.star;
    const Vec3 g = s.v - d.star.v;
    const double gn = g.norm();
    const Vec3 ghat = gn > 0.0 ? Vec3(g / gn) : Vec3::UnitZ();
    const Vec3 omega = frame_along(ghat) * d.omega_local;
    c.cos_abs = gn > 0.0 ? std::abs(d.omega_local.z()) : 0.0;

    const Vec3 G = 0.5 * (s.v + d.star.v);
    const double E = 0.25 * gn * gn + s.I + d.star.I;
    const Vec3 sigma = ghat - 2.0 * ghat.dot(omega) * omega;
    const double lambda = std::sqrt(d.R * E);
    const double internal = (1.0 - d.R) * E;
    c.post = {G + lambda * sigma, d.r * internal};
    c.post_star = {G - lambda * sigma, (1.0 - d.r) * internal};
    c.vars = {gn, s.I, d.star.I, d.r, d.R};
    c.weight = collision_weight(alpha, d.r, d.R);
    return c;
}

}  // namespace polyboltz
