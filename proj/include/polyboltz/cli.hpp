#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/equilibrium.hpp"
#include "polyboltz/frequency.hpp"
#include "polyboltz/linearized.hpp"
#include "polyboltz/quadrature.hpp"
#include "polyboltz/spectral.hpp"

namespace polyboltz {

inline const std::vector<std::string> kCommands = {"verify", "qtest", "kernel-table", "hs-norm",
                                                   "nu",     "coercivity", "monotony", "spectrum"};

struct KernelPoint {
    Vec3 v;
    double I;
    Vec3 x;
    double y;
};

/// Everything a run depends on. Identical configs give byte-identical artifacts.
struct RunConfig {
    std::uint64_t seed = 0;
    GasSpec gas;
    CrossSectionModel model;
    QuadratureSpec quad;
    /// Per-command sample counts overriding quad.samples.
    std::map<std::string, std::uint64_t> samples;
    std::vector<ParticleState> probes;
    /// Named perturbations ε of f = M(1 + ε) for qtest.
    std::vector<std::string> perturbations;
    std::vector<KernelId> kernels;
    std::vector<KernelPoint> kernel_points;
    std::vector<double> margins = kDefaultMargins;
    /// Expected hs-norm verdicts, by kernel name.
    std::map<std::string, std::string> expect_verdict;
    std::optional<std::string> expect_trend;
    NuGrid grid;
    BasisSpec basis;

    QuadratureSpec quad_for(const std::string& command) const;
};

/// Parses a config document; throws ConfigError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);
/// Reads a JSON (.json) or TOML (any other extension) config file.
nlohmann::json read_config_file(const std::filesystem::path& path);

/// f = M(1 + ε) for the named perturbation ε; ε > -1 everywhere.
PhaseFunction named_perturbation(const std::string& name);
std::vector<std::string> perturbation_names();

struct RunOutcome {
    int exit_code = 0;
    std::vector<std::string> failures;
};

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumeric = 3, kExitCheck = 4 };

/// Runs one command and writes `<command>.csv` and `<command>.json` into `out_dir`.
RunOutcome run(const std::string& command, const RunConfig& config, const std::filesystem::path& out_dir);

/// %.17g.
std::string format_double(double x);

}  // namespace polyboltz
