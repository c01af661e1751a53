#pragma once

#include "polyboltz/cross_section.hpp"
#include "polyboltz/equilibrium.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

/// Q(f,f)(v,I) in the (v*, I*, r, R, ω) parametrization.
Estimate eval_Q(const Distribution& f, const ParticleState& s, const GasSpec& spec,
                const CrossSectionModel& model, const QuadratureSpec& quad);

/// Q(f,f)(v,I) in the (G, E, v', I') parametrization. `double_cover` counts both
/// ω branches of the σ Jacobian; switching it off halves the result.
Estimate eval_Q_equiv(const Distribution& f, const ParticleState& s, const GasSpec& spec,
                      const CrossSectionModel& model, const QuadratureSpec& quad, bool double_cover = true);

/// ∫∫ Q(f,f) φ dI dv with Q evaluated directly (gain minus loss), not through the weak form.
Estimate weak_residual(const Distribution& f, const PhaseFunction& phi, const GasSpec& spec,
                       const CrossSectionModel& model, const QuadratureSpec& quad);

struct WPoint {
    Vec3 v;
    double I;
    Vec3 v_prime;
    double I_prime;
    Vec3 G;
    double E;
};

/// Quantities implied by a (v, I, v', I', G, E) point.
struct WReconstruction {
    ParticleState s_star;
    ParticleState post_star;
    Vec3 sigma;
    double r;
    double R;
};

/// Throws DomainError naming the violated constraint when the point is not admissible.
WReconstruction reconstruct(const WPoint& p);

WPoint w_point_from_collision(const ParticleState& s, const ParticleState& s_star, const CollisionParams& p);

/// W = 8/|σ - ĝ| (I' I'* I I*)^α E^{-5/2-2α} B.
double eval_W(const GasSpec& spec, const CrossSectionModel& model, const WPoint& p);

}  // namespace polyboltz
