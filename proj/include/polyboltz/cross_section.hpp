#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

struct MoleculeSpec {
    int atoms = 2;
    bool vibrating = false;
    bool linear = true;
};

/// α = (D-5)/2 from the internal degrees of freedom of the molecule.
double alpha_from_molecule(int atoms, bool vibrating, bool linear);

struct GasSpec {
    double alpha = 0.5;
    double gamma = 0.0;
    std::optional<MoleculeSpec> molecule;

    static GasSpec from_molecule(const MoleculeSpec& m, double gamma);
    void validate() const;
};

/// The collision scalars every model depends on.
struct CollisionVars {
    double g_norm;
    double I;
    double I_star;
    double r;
    double R;

    double energy() const { return 0.25 * g_norm * g_norm + I + I_star; }
};

enum class ModelKind { TotalEnergy, Partitioned, AngularWeighted, Custom };

struct CustomModel {
    std::string name = "custom";
    /// B with the angular factor stripped.
    std::function<double(const GasSpec&, const CollisionVars&)> reduced;
    /// true: B carries |ω·ĝ|; false: B is independent of the angle.
    bool abs_cos_factor = true;
    std::function<double(const GasSpec&, double r, double R)> phi;
    std::function<double(const GasSpec&, double r, double R)> psi;
};

struct CrossSectionModel {
    ModelKind kind = ModelKind::TotalEnergy;
    double c = 1.0;
    /// TotalEnergy only: use c|ω·ĝ|E^{γ/2} instead of the speed/energy sum.
    bool energy_form = false;
    std::shared_ptr<const CustomModel> custom;

    static CrossSectionModel total_energy(double c = 1.0, bool energy_form = false);
    static CrossSectionModel partitioned(double c = 1.0);
    static CrossSectionModel angular_weighted(double b = 1.0);
    static CrossSectionModel from_custom(std::shared_ptr<const CustomModel> m);

    std::string name() const;
    void validate() const;
    bool has_abs_cos_factor() const;
};

/// |g|^γ + I^{γ/2} + I*^{γ/2}.
double speed_energy_sum(double gamma, double g_norm, double I, double I_star);

/// B without its angular factor.
double reduced_B(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& c);

/// B given |ω·ĝ|.
double eval_B(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& c, double cos_abs);

double eval_B(const CrossSectionModel& model, const GasSpec& spec, const ParticleState& s,
              const ParticleState& s_star, const CollisionParams& p);

/// B/|σ - ĝ|, the density of the ω-integral in σ coordinates with both ω branches
/// counted. For models carrying |ω·ĝ| this is fused to reduced_B/2.
double b_sigma_density(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& c,
                       double sigma_ghat_distance);

double envelope_phi(const CrossSectionModel& model, const GasSpec& spec, double r, double R);
double envelope_psi(const CrossSectionModel& model, const GasSpec& spec, double r, double R);

struct LadderResult {
    std::vector<double> margins;
    std::vector<double> values;
    /// Relative growth at the finest refinement.
    double last_growth = 0.0;
    bool divergent = false;
};

inline const std::vector<double> kDefaultMargins{1e-2, 1e-3, 1e-4, 1e-5};

/// ∫∫ f over [ε,1-ε]² for a ladder of margins; divergent when the last
/// refinement still grows by more than `growth_tol`.
LadderResult integrability_ladder(const std::function<double(double r, double R)>& f,
                                  const std::vector<double>& margins = kDefaultMargins,
                                  double growth_tol = 0.10);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
    std::vector<double> values;
};

struct AssumptionReport {
    std::vector<CheckResult> checks;

    bool all_pass() const;
    const CheckResult* find(const std::string& name) const;
    std::vector<std::string> failures() const;
};

/// Numerical evidence for microreversibility, the envelope sandwich, envelope
/// symmetry and the integrability conditions on Ψγ and Φγ.
AssumptionReport verify_assumptions(const CrossSectionModel& model, const GasSpec& spec,
                                    const QuadratureSpec& probes);

}  // namespace polyboltz
