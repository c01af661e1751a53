#pragma once

#include <string>
#include <vector>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/equilibrium.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

enum class KernelId { K1, K2, K3 };

std::string kernel_name(KernelId k);

/// k1(v, I, v*, I*), integrating over (r, R, ω).
Estimate eval_k1(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& v_star,
                 double I_star, const QuadratureSpec& quad);

/// k2(v, I, x, y), integrating over the slice of (r, R, σ) where h^{-1}(x, y) is admissible.
Estimate eval_k2(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& x,
                 double y, const QuadratureSpec& quad);

Estimate eval_k3(const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I, const Vec3& x,
                 double y, const QuadratureSpec& quad);

Estimate eval_kernel(KernelId which, const GasSpec& spec, const CrossSectionModel& model, const Vec3& v, double I,
                     const Vec3& x, double y, const QuadratureSpec& quad);

/// Pieces of 𝒦g(v, I) = 𝒦₃g + 𝒦₂g - 𝒦₁g, all from the same samples.
struct KParts {
    Estimate k1;
    Estimate k2;
    Estimate k3;
    Estimate nu_g;
    Estimate K;
    Estimate L;
};

KParts apply_K_parts(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                     const CrossSectionModel& model, const QuadratureSpec& quad);

Estimate apply_K(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad);

/// 𝒦g(v, I) - ν(v, I) g(v, I).
Estimate apply_L(const PhaseFunction& g, const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad);

/// 𝒦_i g(v, I) through the kernel: ∫ k_i(v, I, x, y) g(x, y) dx dy, with an outer Monte Carlo
/// over (x, y) ~ N(0, 2) × Gamma(α/2 + 1, 2) and `inner` kernel samples per outer point.
Estimate kernel_apply(KernelId which, const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                      const CrossSectionModel& model, const QuadratureSpec& quad, int inner = 8);

/// The Δ-form of a single 𝒦_i g(v, I).
Estimate delta_apply(KernelId which, const PhaseFunction& g, const ParticleState& s, const GasSpec& spec,
                     const CrossSectionModel& model, const QuadratureSpec& quad);

struct PairedInner {
    Estimate first;
    Estimate second;
    Estimate difference;
};

/// ⟨𝒦g, h⟩ and ⟨g, 𝒦h⟩ on shared samples; `difference` is their paired difference.
PairedInner k_symmetry(const PhaseFunction& g, const PhaseFunction& h, const GasSpec& spec,
                       const CrossSectionModel& model, const QuadratureSpec& quad);

/// ⟨ℒg, g⟩.
Estimate l_quadratic_form(const PhaseFunction& g, const GasSpec& spec, const CrossSectionModel& model,
                          const QuadratureSpec& quad);

enum class HsVerdict { Finite, Divergent, Inconclusive };

std::string verdict_name(HsVerdict v);

struct HsLadder {
    KernelId which = KernelId::K1;
    std::vector<double> margins;
    std::vector<Estimate> values;
    double last_growth = 0.0;
    HsVerdict verdict = HsVerdict::Inconclusive;
};

/// Ladder of the Cauchy-Schwarz Hilbert-Schmidt bound |Ω_ε| ∬ ∫_{Ω_ε} κ² for kernel `which`,
/// where κ is the kernel integrand over (r, R, σ) and Ω_ε = [ε,1-ε]² × S². The margins share
/// random numbers, so the ladder is smooth in ε.
HsLadder hs_norm_estimate(KernelId which, const GasSpec& spec, const CrossSectionModel& model,
                          const QuadratureSpec& quad, const std::vector<double>& margins = kDefaultMargins,
                          bool require_assumptions = false);

HsVerdict classify_ladder(const std::vector<Estimate>& values, double* last_growth = nullptr);

/// |Ω_ε| ∫∫ ∫_{Ω_ε} κ(v, I, x, y)² dx dy, a bound on ‖k(v, I, ·)‖².
Estimate kernel_row_bound(KernelId which, const ParticleState& s, const GasSpec& spec,
                          const CrossSectionModel& model, const QuadratureSpec& quad);

}  // namespace polyboltz
