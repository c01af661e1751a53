#pragma once

#include "polyboltz/cross_section.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

/// (r(1-r))^α (1-R)^{2α+1} R^{1/2}, the parameter weight of the collision measure.
double collision_weight(double alpha, double r, double R);

/// One point of Δ = (0,1)² × S² × ℝ₊ × ℝ³ drawn against the partner Maxwellian:
/// (v*, I*) has density M*, (r, R) is uniform on [ε,1-ε]², and ω is uniform on S²
/// in the frame of ĝ, so probes at different (v, I) share the same collision angles.
struct DeltaDraw {
    ParticleState star;
    double r;
    double R;
    Vec3 omega_local;
};

DeltaDraw draw_delta(Sampler& s, double alpha, double margin);

/// Lebesgue measure of the (r, R, ω) box, 4π(1-2ε)².
double delta_volume(double margin);

struct Collision {
    ParticleState s;
    ParticleState s_star;
    ParticleState post;
    ParticleState post_star;
    CollisionVars vars;
    double cos_abs;
    double weight;
};

Collision collide(const ParticleState& s, const DeltaDraw& d, double alpha);

}  // namespace polyboltz
