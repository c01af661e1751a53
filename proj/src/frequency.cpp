#include "polyboltz/frequency.hpp"

#include <algorithm>
#include <cmath>

#include "polyboltz/delta.hpp"
#include "polyboltz/errors.hpp"

namespace polyboltz {

namespace {

double nu_sample(const ParticleState& s, const DeltaDraw& d, const GasSpec& spec, const CrossSectionModel& model,
                 double vol) {
    const Collision c = collide(s, d, spec.alpha);
    return vol * c.weight * eval_B(model, spec, c.vars, c.cos_abs);
}

void check_inputs(const GasSpec& spec, const CrossSectionModel& model, const QuadratureSpec& quad) {
    spec.validate();
    model.validate();
    quad.validate();
    quad.require_monte_carlo("collision frequency");
}

}  // namespace

Estimate eval_nu(const ParticleState& s, const GasSpec& spec, const CrossSectionModel& model,
                 const QuadratureSpec& quad) {
    check_inputs(spec, model, quad);
    const double vol = delta_volume(quad.margin);
    return mc_estimate_scalar(quad.samples, quad.require_seed(), 0x4e55, [&](Sampler& rng) {
        return nu_sample(s, draw_delta(rng, spec.alpha, quad.margin), spec, model, vol);
    });
}

NuGrid NuGrid::uniform(double v_max, double i_max, int n_speed, int n_energy) {
    if (n_speed < 1 || n_energy < 1) throw ConfigError("grid needs at least one point per direction");
    NuGrid g;
    for (int i = 0; i < n_speed; ++i) g.speeds.push_back(n_speed == 1 ? 0.0 : v_max * i / (n_speed - 1));
    for (int j = 0; j < n_energy; ++j) g.energies.push_back(n_energy == 1 ? 0.0 : i_max * j / (n_energy - 1));
    return g;
}

NuProfile nu_profile(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                     const QuadratureSpec& quad) {
    check_inputs(spec, model, quad);
    if (grid.size() == 0) throw ConfigError("nu_profile: empty grid");
    const std::size_t ns = grid.speeds.size();
    const std::size_t ne = grid.energies.size();
    const std::size_t n = ns * ne;
    const std::size_t nds = (ns - 1) * ne;
    const std::size_t nde = ns * (ne - 1);
    const double vol = delta_volume(quad.margin);
    const auto est = mc_estimate(n + nds + nde, quad.samples, quad.require_seed(), 0x4e55,
                                 [&](Sampler& rng, double* out) {
        const DeltaDraw d = draw_delta(rng, spec.alpha, quad.margin);
        const double* vals = out;
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ne; ++j)
                out[i * ne + j] = nu_sample({grid.speeds[i] * Vec3::UnitZ(), grid.energies[j]}, d, spec, model, vol);
        double* ds = out + n;
        for (std::size_t i = 0; i + 1 < ns; ++i)
            for (std::size_t j = 0; j < ne; ++j) *ds++ = vals[(i + 1) * ne + j] - vals[i * ne + j];
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j + 1 < ne; ++j) *ds++ = vals[i * ne + j + 1] - vals[i * ne + j];
    });
    NuProfile p;
    p.grid = grid;
    p.nu.assign(est.begin(), est.begin() + n);
    p.d_speed.assign(est.begin() + n, est.begin() + n + nds);
    p.d_energy.assign(est.begin() + n + nds, est.end());
    return p;
}

CoercivityResult coercivity_fit(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                                const QuadratureSpec& quad) {
    if (grid.speeds.size() < 10 || grid.energies.size() < 10) {
        throw ConfigError("coercivity_fit: grid needs at least 10 x 10 points");
    }
    CoercivityResult out;
    out.profile = nu_profile(spec, model, grid, quad);
    const std::size_t ne = grid.energies.size();
    double best = INFINITY;
    for (std::size_t k = 0; k < out.profile.nu.size(); ++k) {
        const double sp = grid.speeds[k / ne];
        const double en = grid.energies[k % ne];
        const double denom = std::pow(sp, spec.gamma) + std::pow(en, 0.5 * spec.gamma) + 1.0;
        const Estimate& e = out.profile.nu[k];
        out.ratios.push_back({e.value / denom, e.std_err / denom, e.samples});
        if (out.ratios.back().value < best) {
            best = out.ratios.back().value;
            out.argmin = k;
        }
    }
    out.c_hat = out.ratios[out.argmin];
    out.pass = std::all_of(out.ratios.begin(), out.ratios.end(),
                           [](const Estimate& r) { return r.value - 3.0 * r.std_err > 0.0; });
    return out;
}

std::string trend_name(Trend t) {
    switch (t) {
        case Trend::Increasing: return "MONOTONE-INCREASING";
        case Trend::Decreasing: return "MONOTONE-DECREASING";
        case Trend::Constant: return "CONSTANT";
        case Trend::Mixed: return "MIXED";
    }
    return "?";
}

namespace {

DirectionSummary summarize(const std::vector<Estimate>& diffs, double scale) {
    DirectionSummary s;
    for (const Estimate& d : diffs) {
        const double band = 3.0 * d.std_err + 1e-12 * scale;
        if (d.value > band)
            ++s.increasing;
        else if (d.value < -band)
            ++s.decreasing;
        else
            ++s.ties;
    }
    if (s.increasing == 0 && s.decreasing == 0)
        s.trend = Trend::Constant;
    else if (s.decreasing == 0)
        s.trend = Trend::Increasing;
    else if (s.increasing == 0)
        s.trend = Trend::Decreasing;
    else
        s.trend = Trend::Mixed;
    return s;
}

}  // namespace

MonotonyReport monotony_check(const GasSpec& spec, const CrossSectionModel& model, const NuGrid& grid,
                              const QuadratureSpec& quad) {
    MonotonyReport rep;
    rep.profile = nu_profile(spec, model, grid, quad);
    double scale = 0.0;
    for (const Estimate& e : rep.profile.nu) scale = std::max(scale, std::abs(e.value));
    rep.along_speed = summarize(rep.profile.d_speed, scale);
    rep.along_energy = summarize(rep.profile.d_energy, scale);
    const Trend a = rep.along_speed.trend;
    const Trend b = rep.along_energy.trend;
    if (a == b)
        rep.overall = a;
    else if (a == Trend::Constant || b == Trend::Constant)
        rep.overall = a == Trend::Constant ? b : a;
    else
        rep.overall = Trend::Mixed;
    return rep;
}

}  // namespace polyboltz
