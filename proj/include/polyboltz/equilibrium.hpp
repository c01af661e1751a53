#pragma once

#include <array>
#include <functional>
#include <string>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

struct MaxwellianParams {
    double n = 1.0;
    Vec3 u = Vec3::Zero();
    double T = 1.0;

    void validate() const;
};

/// 1/((2π)^{3/2} Γ(α+1)), the normalization shared by M, ν and the kernels.
double maxwellian_prefactor(double alpha);

double eval_maxwellian(const MaxwellianParams& params, const GasSpec& spec, const ParticleState& s);

/// Normalized Maxwellian M(v, I) = C I^α e^{-v²/2 - I}.
double maxwellian(double alpha, const Vec3& v, double I);

/// M^{1/2}.
double sqrt_maxwellian(double alpha, const Vec3& v, double I);

using PhaseFunction = std::function<double(const Vec3& v, double I)>;

/// A distribution f(v, I) with the box outside of which it is declared negligible.
/// `f` is called concurrently from several threads.
struct Distribution {
    PhaseFunction f;
    double v_max = 8.0;
    double i_max = 40.0;
    std::string label;
};

Distribution maxwellian_distribution(const MaxwellianParams& params, const GasSpec& spec);

/// f = M (1 + eps(v, I)) around the normalized Maxwellian.
Distribution perturbed_maxwellian(const GasSpec& spec, PhaseFunction eps, std::string label);

struct MomentsResult {
    Estimate n;
    std::array<Estimate, 3> u;
    /// ∫ (|v-u|²/2 + I) f, equal to (α + 5/2) n T for a Maxwellian.
    Estimate energy;
    /// Share of the density quadrature carried by nodes outside the declared box.
    double tail_fraction = 0.0;
    bool truncation_warning = false;
};

MomentsResult moments(const Distribution& f, const GasSpec& spec, const QuadratureSpec& quad);

/// D(f) = ∫ Q(f,f) log(f / I^α), evaluated in its symmetrized form
/// -¼ ∫ (F' - F) log(F'/F) with F = f f* / (I I*)^α.
Estimate entropy_production(const Distribution& f, const GasSpec& spec, const CrossSectionModel& model,
                            const QuadratureSpec& quad);

}  // namespace polyboltz
