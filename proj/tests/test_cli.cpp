#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "polyboltz/cli.hpp"
#include "polyboltz/errors.hpp"

using namespace polyboltz;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("polyboltz_test_cli_" + std::to_string(::getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(POLYBOLTZ_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

json base_config() {
    return json::parse(R"({
        "seed": 7,
        "gas": {"alpha": 0.5, "gamma": 0.0},
        "model": {"kind": "total_energy", "c": 1.0},
        "quadrature": {"samples": 2000}
    })");
}

}  // namespace

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(base_config());
    CHECK(cfg.seed == 7);
    CHECK(cfg.quad.seed == 7u);
    CHECK(cfg.gas.alpha == 0.5);
    CHECK(cfg.model.kind == ModelKind::TotalEnergy);
    CHECK(cfg.probes.size() == 5);
    CHECK(cfg.kernels.size() == 3);
    CHECK(cfg.basis.n_v == 4);

    json doc = base_config();
    doc["nu"] = {{"samples", 123}};
    CHECK(parse_config(doc).quad_for("nu").samples == 123u);
    CHECK(parse_config(doc).quad_for("verify").samples == 2000u);

    json molecule = base_config();
    molecule["gas"] = {{"molecule", {{"atoms", 3}, {"vibrating", true}}}};
    CHECK(parse_config(molecule).gas.alpha == 2.0);
}

TEST_CASE("config errors name the field") {
    auto message = [](const json& doc) {
        try {
            parse_config(doc);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    json doc = base_config();
    doc.erase("seed");
    CHECK(message(doc).find("seed") != std::string::npos);

    doc = base_config();
    doc["gas"]["alpha"] = -1.0;
    CHECK(message(doc).find("gas") != std::string::npos);

    doc = base_config();
    doc["gas"] = {{"alpha", 1.0}, {"molecule", {{"atoms", 2}, {"linear", true}}}};
    CHECK(message(doc).find("molecule") != std::string::npos);

    doc = base_config();
    doc["model"]["kind"] = "hard_spheres";
    CHECK(message(doc).find("model.kind") != std::string::npos);

    doc = base_config();
    doc["quadrature"]["samples"] = "many";
    CHECK(message(doc).find("quadrature.samples") != std::string::npos);

    doc = base_config();
    doc["qtest"] = {{"perturbations", {"nope"}}};
    CHECK(message(doc).find("nope") != std::string::npos);

    doc = base_config();
    doc["probes"] = {{0.0, 0.0, 0.0}};
    CHECK_FALSE(message(doc).empty());
}

TEST_CASE("named perturbations keep f positive") {
    Sampler s(1, 0, 0);
    for (const auto& name : perturbation_names()) {
        const PhaseFunction eps = named_perturbation(name);
        for (int i = 0; i < 2000; ++i) CHECK(eps(3.0 * s.normal3(), 5.0 * s.gamma(1.0)) > -1.0);
    }
}

TEST_CASE("format_double round-trips") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("verify: exit codes and failure list") {
    const fs::path dir = scratch("verify");
    json good = base_config();
    good["verify"] = {{"samples", 2000}};
    write(dir / "good.json", good.dump());
    CHECK(run_cli("verify --config " + (dir / "good.json").string() + " --out " + (dir / "good").string()) == 0);
    const json report = json::parse(slurp(dir / "good" / "verify.json"));
    CHECK(report["status"] == "PASS");
    CHECK(report["all_pass"] == true);
    CHECK(fs::exists(dir / "good" / "verify.csv"));

    json bad = good;
    bad["gas"]["alpha"] = 0.0;
    write(dir / "bad.json", bad.dump());
    CHECK(run_cli("verify --config " + (dir / "bad.json").string() + " --out " + (dir / "bad").string()) == 4);
    const json failed = json::parse(slurp(dir / "bad" / "verify.json"));
    CHECK(failed["status"] == "FAIL");
    bool listed = false;
    for (const auto& f : failed["failures"]) listed = listed || f == "k2_integrability";
    CHECK(listed);
}

TEST_CASE("configuration and usage errors exit with 2") {
    const fs::path dir = scratch("errors");
    json doc = base_config();
    doc.erase("seed");
    write(dir / "noseed.json", doc.dump());
    CHECK(run_cli("nu --config " + (dir / "noseed.json").string() + " --out " + dir.string()) == 2);
    write(dir / "broken.toml", "seed = 1\n[gas\nalpha = 0.5\n");
    CHECK(run_cli("nu --config " + (dir / "broken.toml").string() + " --out " + dir.string()) == 2);
    CHECK(run_cli("nu --config " + (dir / "missing.toml").string()) == 2);
    CHECK(run_cli("frobnicate --config " + (dir / "noseed.json").string()) == 2);

    // Coercivity needs a 10 x 10 grid; the library refusal is reported as a configuration error.
    write(dir / "small.json", base_config().dump());
    CHECK(run_cli("coercivity --config " + (dir / "small.json").string() + " --out " + dir.string()) == 2);
    const json report = json::parse(slurp(dir / "coercivity.json"));
    CHECK(report["error"] == "config");
}

TEST_CASE("TOML and JSON configs are equivalent") {
    const fs::path dir = scratch("formats");
    write(dir / "run.toml", R"(seed = 7

[gas]
alpha = 0.5
gamma = 0.0

[model]
kind = "total_energy"
c = 1.0

[quadrature]
samples = 2000
)");
    write(dir / "run.json", base_config().dump());
    CHECK(run_cli("nu --config " + (dir / "run.toml").string() + " --out " + (dir / "toml").string()) == 0);
    CHECK(run_cli("nu --config " + (dir / "run.json").string() + " --out " + (dir / "json").string()) == 0);
    CHECK(slurp(dir / "toml" / "nu.csv") == slurp(dir / "json" / "nu.csv"));
}

TEST_CASE("artifacts are byte-identical across runs and thread counts") {
    const fs::path dir = scratch("determinism");
    json doc = base_config();
    doc["gas"]["gamma"] = 1.0;
    doc["kernel-table"] = {{"samples", 3000}};
    write(dir / "run.json", doc.dump());
    const std::string cfg = " --config " + (dir / "run.json").string();
    for (const std::string command : {"nu", "kernel-table"}) {
        CHECK(run_cli(command + cfg + " --out " + (dir / "a").string()) == 0);
        CHECK(run_cli(command + cfg + " --out " + (dir / "b").string() + " --threads 1") == 0);
        CHECK(run_cli(command + cfg + " --out " + (dir / "c").string() + " --threads 3") == 0);
        for (const std::string ext : {".csv", ".json"}) {
            const std::string a = slurp(dir / "a" / (command + ext));
            CHECK_FALSE(a.empty());
            CHECK(a == slurp(dir / "b" / (command + ext)));
            CHECK(a == slurp(dir / "c" / (command + ext)));
        }
    }
    // --seed overrides the config seed.
    CHECK(run_cli("nu" + cfg + " --out " + (dir / "d").string() + " --seed 8") == 0);
    CHECK(slurp(dir / "a" / "nu.csv") != slurp(dir / "d" / "nu.csv"));
}
