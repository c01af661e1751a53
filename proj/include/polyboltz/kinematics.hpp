#pragma once

#include <utility>

#include <Eigen/Core>

namespace polyboltz {

using Vec3 = Eigen::Vector3d;

struct ParticleState {
    Vec3 v = Vec3::Zero();
    double I = 0.0;
};

/// Borgnakke-Larsen parameters: R is the kinetic share of E after the
/// collision, r splits the remaining internal energy between the partners.
struct CollisionParams {
    double r = 0.5;
    double R = 0.5;
    Vec3 omega = Vec3::UnitZ();
};

struct SigmaParams {
    Vec3 sigma;
    /// dω/dσ for one ω branch, 1/(2|σ - ĝ|); +inf when σ = ĝ.
    double weight;
    /// |ω·ĝ| = |σ - ĝ|/2, the factor that cancels `weight` in every built-in model.
    double cos_abs;
    bool singular;
};

struct CenterOfMass {
    Vec3 G;
    double E;
    Vec3 g;
};

struct Fractions {
    double r;
    double R;
};

enum class Branch { K2, K3 };

/// Fixed first argument (v, I) and integration variables (r, R, σ) of the
/// h change of variables used for the k2 / k3 kernels.
struct HAnchor {
    Vec3 v = Vec3::Zero();
    double I = 0.0;
    double r = 0.5;
    double R = 0.5;
    Vec3 sigma = Vec3::UnitZ();
};

struct HPoint {
    Vec3 x;
    double y;
};

double total_energy(const ParticleState& s, const ParticleState& s_star);
CenterOfMass center_of_mass(const ParticleState& s, const ParticleState& s_star);

/// T_ω(z) = z - 2(z·ω)ω. Throws DomainError when |ω| differs from 1 by more than 1e-12.
Vec3 reflect(const Vec3& z, const Vec3& omega);

std::pair<ParticleState, ParticleState> post_collision(const ParticleState& s,
                                                       const ParticleState& s_star,
                                                       const CollisionParams& p);

/// The (r', R') that map the post-collision pair back onto (s, s_star).
Fractions pre_fractions(const ParticleState& s, const ParticleState& s_star);

SigmaParams sigma_of_omega(const Vec3& g, const Vec3& omega);

/// J_T = R^{1/2} (1-R) E^{5/2} / 16.
double bl_jacobian(double R, double E);

/// a = 1/((1-r)(1-R)) for K2 and 1/(r(1-R)) for K3.
double h_scale(Branch branch, double r, double R);

/// Jacobian of h^{-1}: 8a.
double h_jacobian(Branch branch, double r, double R);

HPoint h_map(Branch branch, const HAnchor& anchor, const ParticleState& s_star);

/// Reconstructs (v*, I*) without checking admissibility; I* may come out negative.
ParticleState h_inverse_raw(Branch branch, const HAnchor& anchor, const HPoint& point);

/// As h_inverse_raw, but throws DomainError when the point is outside H.
ParticleState h_inverse(Branch branch, const HAnchor& anchor, const HPoint& point);

bool in_domain(Branch branch, const HAnchor& anchor, const HPoint& point);

/// Columns e1, e2, n of a right-handed orthonormal frame whose third axis is n.
Eigen::Matrix3d frame_along(const Vec3& n);

}  // namespace polyboltz
