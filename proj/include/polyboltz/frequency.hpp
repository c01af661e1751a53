#pragma once

#include <string>
#include <vector>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

namespace polyboltz {

/// ν(v, I) = ∫_Δ B (r(1-r))^α (1-R)^{2α+1} R^{1/2} M* dr dR dω dI* dv*.
Estimate eval_nu(const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad);

struct NuGrid {
    std::vector<double> speeds;
    std::vector<double> energies;

    static NuGrid uniform(double v_max, double i_max, int n_speed, int n_energy);
    std::size_t size() const { return speeds.size() * energies.size(); }
};

/// ν on a (|v|, I) grid, all points from the same samples. Neighbour differences
/// carry paired standard errors.
struct NuProfile {
    NuGrid grid;
    /// Row-major: index = speed_index * energies.size() + energy_index.
    std::vector<Estimate> nu;
    /// ν(s_{i+1}, e_j) - ν(s_i, e_j), index i * energies.size() + j.
    std::vector<Estimate> d_speed;
    /// ν(s_i, e_{j+1}) - ν(s_i, e_j), index i * (energies.size() - 1) + j.
    std::vector<Estimate> d_energy;

    const Estimate& at(std::size_t i_speed, std::size_t i_energy) const {
        return nu[i_speed * grid.energies.size() + i_energy];
    }
};

NuProfile nu_profile(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                     const QuadratureSpec& quad);

struct CoercivityResult {
    NuProfile profile;
    /// ν / (|v|^γ + I^{γ/2} + 1) per grid point.
    std::vector<Estimate> ratios;
    Estimate c_hat;
    std::size_t argmin = 0;
    bool pass = false;
};

CoercivityResult coercivity_fit(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                                const QuadratureSpec& quad);

enum class Trend { Increasing, Decreasing, Constant, Mixed };

std::string trend_name(Trend t);

struct DirectionSummary {
    Trend trend = Trend::Mixed;
    int increasing = 0;
    int decreasing = 0;
    int ties = 0;
};

struct MonotonyReport {
    NuProfile profile;
    DirectionSummary along_speed;
    DirectionSummary along_energy;
    Trend overall = Trend::Mixed;
};

/// Sign of each neighbour difference, with |d| <= 3 s.e. counted as a tie.
MonotonyReport monotony_check(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                              const QuadratureSpec& quad);

}  // namespace polyboltz
