#include "polyboltz/kinematics.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Geometry>

#include "polyboltz/errors.hpp"

namespace polyboltz {

namespace {

void check_fraction(double x, const char* name) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw DomainError(std::string("collision parameter ") + name + " = " + std::to_string(x) +
                          " outside [0,1]");
    }
}

void check_unit(const Vec3& omega) {
    if (!omega.allFinite() || std::abs(omega.norm() - 1.0) > 1e-12) {
        throw DomainError("scattering direction is not a unit vector");
    }
}

}  // namespace

double total_energy(const ParticleState& s, const ParticleState& s_star) {
    return 0.25 * (s.v - s_star.v).squaredNorm() + s.I + s_star.I;
}

CenterOfMass center_of_mass(const ParticleState& s, const ParticleState& s_star) {
    return {0.5 * (s.v + s_star.v), total_energy(s, s_star), s.v - s_star.v};
}

Vec3 reflect(const Vec3& z, const Vec3& omega) {
    check_unit(omega);
    return z - 2.0 * z.dot(omega) * omega;
}

std::pair<ParticleState, ParticleState> post_collision(const ParticleState& s,
                                                       const ParticleState& s_star,
                                                       const CollisionParams& p) {
    check_fraction(p.r, "r");
    check_fraction(p.R, "R");
    check_unit(p.omega);
    const CenterOfMass cm = center_of_mass(s, s_star);
    if (cm.E <= 0.0) return {s, s_star};

    const double gn = cm.g.norm();
    // With g = 0 the direction ĝ is undefined; any choice is a measure-zero convention.
    const Vec3 sigma = gn > 0.0 ? reflect(cm.g / gn, p.omega) : p.omega;
    const double lambda = std::sqrt(p.R * cm.E);
    const double internal = (1.0 - p.R) * cm.E;
    ParticleState out{cm.G + lambda * sigma, p.r * internal};
    ParticleState out_star{cm.G - lambda * sigma, (1.0 - p.r) * internal};
    return {out, out_star};
}

Fractions pre_fractions(const ParticleState& s, const ParticleState& s_star) {
    const double E = total_energy(s, s_star);
    if (!(E > 0.0)) throw DomainError("pre_fractions: zero total energy, fractions undefined");
    const double kinetic = 0.25 * (s.v - s_star.v).squaredNorm();
    const double internal = s.I + s_star.I;
    const double R = kinetic / E;
    if (internal <= 0.0) {
        if (s.I > 0.0) throw NumericError("pre_fractions: R' = 1 with I > 0");
        return {0.0, R};
    }
    return {s.I / internal, R};
}

SigmaParams sigma_of_omega(const Vec3& g, const Vec3& omega) {
    const double gn = g.norm();
    if (!(gn > 0.0)) throw DomainError("sigma_of_omega: relative velocity is zero");
    const Vec3 ghat = g / gn;
    const Vec3 sigma = reflect(ghat, omega);
    const double d = (sigma - ghat).norm();
    SigmaParams out;
    out.sigma = sigma;
    out.cos_abs = std::abs(omega.dot(ghat));
    out.singular = !(d > 0.0);
    out.weight = out.singular ? std::numeric_limits<double>::infinity() : 0.5 / d;
    return out;
}

double bl_jacobian(double R, double E) {
    return std::sqrt(R) * (1.0 - R) * std::pow(E, 2.5) / 16.0;
}

double h_scale(Branch branch, double r, double R) {
    const double share = branch == Branch::K2 ? 1.0 - r : r;
    return 1.0 / (share * (1.0 - R));
}

double h_jacobian(Branch branch, double r, double R) {
    return 8.0 * h_scale(branch, r, R);
}

HPoint h_map(Branch branch, const HAnchor& anchor, const ParticleState& s_star) {
    const ParticleState s{anchor.v, anchor.I};
    const CenterOfMass cm = center_of_mass(s, s_star);
    if (!(cm.E > 0.0)) throw DomainError("h_map: zero total energy");
    const double lambda = std::sqrt(anchor.R * cm.E);
    const double sign = branch == Branch::K2 ? -1.0 : 1.0;
    return {cm.G + sign * lambda * anchor.sigma, cm.E / h_scale(branch, anchor.r, anchor.R)};
}

ParticleState h_inverse_raw(Branch branch, const HAnchor& anchor, const HPoint& point) {
    const double E = h_scale(branch, anchor.r, anchor.R) * point.y;
    const double lambda = std::sqrt(anchor.R * E);
    const double sign = branch == Branch::K2 ? 1.0 : -1.0;
    const Vec3 G = point.x + sign * lambda * anchor.sigma;
    return {2.0 * G - anchor.v, E - anchor.I - (G - anchor.v).squaredNorm()};
}

ParticleState h_inverse(Branch branch, const HAnchor& anchor, const HPoint& point) {
    ParticleState s = h_inverse_raw(branch, anchor, point);
    if (s.I < 0.0) {
        throw DomainError("h_inverse: reconstructed I* = " + std::to_string(s.I) +
                          " < 0, point outside the domain H");
    }
    return s;
}

bool in_domain(Branch branch, const HAnchor& anchor, const HPoint& point) {
    if (!(point.y > 0.0)) return false;
    return h_inverse_raw(branch, anchor, point).I > 0.0;
}

Eigen::Matrix3d frame_along(const Vec3& n) {
    Eigen::Index k = 0;
    n.cwiseAbs().minCoeff(&k);
    const Vec3 a = Vec3::Unit(k);
    const Vec3 e1 = n.cross(a).normalized();
    const Vec3 e2 = n.cross(e1);
    Eigen::Matrix3d m;
    m.col(0) = e1;
    m.col(1) = e2;
    m.col(2) = n;
    return m;
}

}  // namespace polyboltz
