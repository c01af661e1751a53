#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/equilibrium.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

struct BasisSpec {
    /// Maximum total degree of the 3D Hermite part.
    int n_v = 4;
    /// Maximum Laguerre degree in I.
    int n_i = 4;
};

inline constexpr std::size_t kMaxBasisSize = 1000;

/// e_i = M^{1/2} p_i with p_i a product of probabilists' Hermite polynomials in v and
/// generalized Laguerre polynomials L^{(α)} in I, normalized so that {e_i} is orthonormal
/// in L²(ℝ³ × ℝ₊). Index 0 is the constant polynomial, so e_0 = M^{1/2}.
class HermiteLaguerreBasis {
public:
    HermiteLaguerreBasis(const BasisSpec& spec, double alpha);

    std::size_t size() const { return index_.size(); }
    double alpha() const { return alpha_; }
    const BasisSpec& spec() const { return spec_; }
    /// (n1, n2, n3, k) of basis function i.
    const std::array<int, 4>& index(std::size_t i) const { return index_[i]; }

    /// Polynomial parts p_i(v, I) for all i.
    void eval(const Vec3& v, double I, double* out) const;
    Eigen::VectorXd eval(const Vec3& v, double I) const;

    /// Coefficients ⟨e_i, M^{1/2} ψ⟩ by tensor Gauss quadrature. `lost_mass` receives
    /// 1 - |c|²/‖M^{1/2}ψ‖².
    Eigen::VectorXd project(const PhaseFunction& psi, double* lost_mass = nullptr) const;

    /// max |⟨e_i, e_j⟩ - δ_ij| under tensor quadrature.
    double gram_error() const;

    /// Normalization of the Laguerre factor of degree k.
    double laguerre_norm(int k) const { return laguerre_norm_[k]; }

private:
    BasisSpec spec_;
    double alpha_;
    std::vector<std::array<int, 4>> index_;
    std::vector<double> laguerre_norm_;
};

struct OperatorMatrix {
    /// Symmetrized matrix ⟨e_i, ℒ e_j⟩.
    Eigen::MatrixXd a;
    /// Standard errors of the symmetrized entries.
    Eigen::MatrixXd se;
    /// Unsymmetrized estimate and its entry standard errors.
    Eigen::MatrixXd raw;
    Eigen::MatrixXd raw_se;
    /// Standard errors of raw - rawᵀ.
    Eigen::MatrixXd asym_se;
    double max_asymmetry = 0.0;
    /// Largest standard error of an asymmetry entry.
    double max_asym_se = 0.0;
    std::uint64_t samples = 0;
    bool refinement_warning = false;

    double tol0() const;
};

/// Galerkin matrix ⟨e_i, ℒ e_j⟩ of ℒ = 𝒦 - ν Id. Entries are estimated together from the
/// same samples: Gauss rules in the center-of-mass velocity, the total energy and the two
/// internal splits, Monte Carlo over the kinetic fractions and the two directions. The
/// integrand is exchange-symmetrized in the left factor, so asymmetry measures noise.
/// `quad.samples` counts direction draws; (r, R) always cover the whole unit square.
OperatorMatrix assemble(const HermiteLaguerreBasis& basis, const GasSpec& spec, const CrossSectionModel& model,
                        const QuadratureSpec& quad);

struct Spectrum {
    /// Descending.
    std::vector<double> eigenvalues;
    double tol0 = 0.0;
    int kernel_dim = 0;
    int positive = 0;
    /// -λ for the first eigenvalue below -tol0.
    double gap = 0.0;
};

Spectrum spectrum(const OperatorMatrix& a);

struct KernelCheck {
    std::vector<double> residuals;
    std::vector<double> coefficient_norms;
    std::vector<double> lost_mass;
    double tol0 = 0.0;
    double control_residual = 0.0;
    double control_norm = 0.0;
    bool pass = false;
};

/// Applies A to the projections of M^{1/2}{1, v1, v2, v3, |v|²/2 + I} and, as a control,
/// M^{1/2} v1².
KernelCheck kernel_check(const OperatorMatrix& a, const HermiteLaguerreBasis& basis, const GasSpec& spec);

}  // namespace polyboltz
