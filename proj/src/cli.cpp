#include "polyboltz/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "polyboltz/collision_operator.hpp"
#include "polyboltz/errors.hpp"

namespace polyboltz {

using nlohmann::json;

namespace {

json toml_to_json(const toml::node& node);

json toml_table_to_json(const toml::table& t) {
    json out = json::object();
    for (const auto& [key, value] : t) out[std::string(key.str())] = toml_to_json(value);
    return out;
}

json toml_to_json(const toml::node& node) {
    if (const auto* t = node.as_table()) return toml_table_to_json(*t);
    if (const auto* a = node.as_array()) {
        json out = json::array();
        for (const auto& v : *a) out.push_back(toml_to_json(v));
        return out;
    }
    if (const auto* v = node.as_integer()) return v->get();
    if (const auto* v = node.as_floating_point()) return v->get();
    if (const auto* v = node.as_boolean()) return v->get();
    if (const auto* v = node.as_string()) return v->get();
    throw ConfigError("config: unsupported TOML value (dates and times are not accepted)");
}

/// Field access with the dotted path in every error message.
class Reader {
public:
    Reader(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {}

    bool has(const char* key) const { return doc_.is_object() && doc_.contains(key); }
    std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

    Reader child(const char* key) const {
        static const json empty = json::object();
        if (!has(key)) return Reader(empty, where(key));
        if (!doc_.at(key).is_object()) throw ConfigError("config: " + where(key) + " must be a table");
        return Reader(doc_.at(key), where(key));
    }

    double number(const char* key, double fallback) const {
        if (!has(key)) return fallback;
        const json& v = doc_.at(key);
        if (!v.is_number()) throw ConfigError("config: " + where(key) + " must be a number");
        return v.get<double>();
    }

    std::uint64_t count(const char* key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const json& v = doc_.at(key);
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            throw ConfigError("config: " + where(key) + " must be a nonnegative integer");
        return v.get<std::uint64_t>();
    }

    bool flag(const char* key, bool fallback) const {
        if (!has(key)) return fallback;
        const json& v = doc_.at(key);
        if (!v.is_boolean()) throw ConfigError("config: " + where(key) + " must be true or false");
        return v.get<bool>();
    }

    std::string text(const char* key, const std::string& fallback) const {
        if (!has(key)) return fallback;
        const json& v = doc_.at(key);
        if (!v.is_string()) throw ConfigError("config: " + where(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<std::vector<double>> rows(const char* key, std::size_t width) const {
        std::vector<std::vector<double>> out;
        if (!has(key)) return out;
        const json& v = doc_.at(key);
        if (!v.is_array()) throw ConfigError("config: " + where(key) + " must be an array");
        for (const json& row : v) {
            if (!row.is_array() || row.size() != width)
                throw ConfigError("config: " + where(key) + " entries must have " + std::to_string(width) + " numbers");
            std::vector<double> r;
            for (const json& x : row) {
                if (!x.is_number()) throw ConfigError("config: " + where(key) + " entries must be numbers");
                r.push_back(x.get<double>());
            }
            out.push_back(std::move(r));
        }
        return out;
    }

    std::vector<std::string> strings(const char* key) const {
        std::vector<std::string> out;
        if (!has(key)) return out;
        const json& v = doc_.at(key);
        if (!v.is_array()) throw ConfigError("config: " + where(key) + " must be an array of strings");
        for (const json& x : v) {
            if (!x.is_string()) throw ConfigError("config: " + where(key) + " must be an array of strings");
            out.push_back(x.get<std::string>());
        }
        return out;
    }

    std::vector<double> numbers(const char* key) const {
        std::vector<double> out;
        if (!has(key)) return out;
        const json& v = doc_.at(key);
        if (!v.is_array()) throw ConfigError("config: " + where(key) + " must be an array of numbers");
        for (const json& x : v) {
            if (!x.is_number()) throw ConfigError("config: " + where(key) + " must be an array of numbers");
            out.push_back(x.get<double>());
        }
        return out;
    }

private:
    const json& doc_;
    std::string path_;
};

KernelId parse_kernel(const std::string& name, const std::string& where) {
    if (name == "k1") return KernelId::K1;
    if (name == "k2") return KernelId::K2;
    if (name == "k3") return KernelId::K3;
    throw ConfigError("config: " + where + " has unknown kernel '" + name + "' (expected k1, k2 or k3)");
}

GasSpec parse_gas(const Reader& r) {
    GasSpec gas;
    gas.gamma = r.number("gamma", 0.0);
    if (r.has("molecule")) {
        const Reader m = r.child("molecule");
        MoleculeSpec mol;
        const std::uint64_t atoms = m.count("atoms", 2);
        mol.atoms = static_cast<int>(atoms);
        mol.vibrating = m.flag("vibrating", false);
        mol.linear = m.flag("linear", true);
        try {
            gas = GasSpec::from_molecule(mol, gas.gamma);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("config: gas.molecule: ") + e.what());
        }
        if (r.has("alpha")) gas.alpha = r.number("alpha", gas.alpha);
    } else {
        gas.alpha = r.number("alpha", 0.5);
    }
    try {
        gas.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: gas: ") + e.what());
    }
    return gas;
}

CrossSectionModel parse_model(const Reader& r) {
    const std::string kind = r.text("kind", "total_energy");
    const double c = r.number("c", 1.0);
    CrossSectionModel model;
    if (kind == "total_energy") model = CrossSectionModel::total_energy(c, r.flag("energy_form", false));
    else if (kind == "partitioned") model = CrossSectionModel::partitioned(c);
    else if (kind == "angular_weighted") model = CrossSectionModel::angular_weighted(c);
    else
        throw ConfigError("config: model.kind must be total_energy, partitioned or angular_weighted, got '" + kind +
                          "'");
    try {
        model.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: model: ") + e.what());
    }
    return model;
}

std::vector<ParticleState> default_probes() {
    return {{Vec3(0.0, 0.0, 0.0), 1.0},
            {Vec3(0.5, -0.3, 0.2), 0.5},
            {Vec3(1.0, 0.0, 0.0), 2.0},
            {Vec3(-0.7, 1.1, 0.4), 0.2},
            {Vec3(0.3, 0.3, -1.5), 3.0}};
}

std::vector<KernelPoint> default_kernel_points() {
    return {{Vec3(0.0, 0.0, 0.0), 1.0, Vec3(0.5, 0.0, 0.0), 1.0},
            {Vec3(0.5, -0.3, 0.2), 0.5, Vec3(-0.2, 0.4, 0.1), 0.8},
            {Vec3(1.0, 0.0, 0.0), 2.0, Vec3(0.0, 1.0, 0.0), 0.5}};
}

}  // namespace

QuadratureSpec RunConfig::quad_for(const std::string& command) const {
    QuadratureSpec q = quad;
    q.seed = seed;
    if (const auto it = samples.find(command); it != samples.end()) q.samples = it->second;
    return q;
}

json read_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    if (path.extension() == ".json") {
        try {
            return json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError("config: " + path.string() + ": " + e.what());
        }
    }
    try {
        return toml_table_to_json(toml::parse(text, path.string()));
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "config: " << path.string() << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(msg.str());
    }
}

RunConfig parse_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a table");
    const Reader root(doc, "");
    RunConfig cfg;
    if (!root.has("seed")) throw ConfigError("config: seed is required");
    cfg.seed = root.count("seed", 0);
    cfg.gas = parse_gas(root.child("gas"));
    cfg.model = parse_model(root.child("model"));

    const Reader q = root.child("quadrature");
    const std::string scheme = q.text("scheme", "monte_carlo");
    if (scheme == "monte_carlo") cfg.quad.scheme = Scheme::MonteCarlo;
    else if (scheme == "tensor") cfg.quad.scheme = Scheme::Tensor;
    else throw ConfigError("config: quadrature.scheme must be monte_carlo or tensor");
    cfg.quad.samples = q.count("samples", cfg.quad.samples);
    cfg.quad.nodes = static_cast<int>(q.count("nodes", cfg.quad.nodes));
    cfg.quad.v_max = q.number("v_max", cfg.quad.v_max);
    cfg.quad.i_max = q.number("i_max", cfg.quad.i_max);
    cfg.quad.margin = q.number("margin", cfg.quad.margin);
    cfg.quad.seed = cfg.seed;
    try {
        cfg.quad.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: quadrature: ") + e.what());
    }

    for (const std::string& command : kCommands) {
        const Reader section = root.child(command.c_str());
        if (section.has("samples")) cfg.samples[command] = section.count("samples", 0);
    }

    for (const auto& row : root.rows("probes", 4)) cfg.probes.push_back({Vec3(row[0], row[1], row[2]), row[3]});
    if (cfg.probes.empty()) cfg.probes = default_probes();
    for (const auto& p : cfg.probes)
        if (!(p.I >= 0.0)) throw ConfigError("config: probes must have I >= 0");

    const Reader qt = root.child("qtest");
    cfg.perturbations = qt.strings("perturbations");
    if (cfg.perturbations.empty()) cfg.perturbations = {"sin_v1", "tanh_energy", "bump"};
    for (const auto& name : cfg.perturbations) named_perturbation(name);

    const Reader kt = root.child("kernel-table");
    for (const auto& name : kt.strings("kernels")) cfg.kernels.push_back(parse_kernel(name, kt.where("kernels")));
    for (const auto& row : kt.rows("points", 8))
        cfg.kernel_points.push_back({Vec3(row[0], row[1], row[2]), row[3], Vec3(row[4], row[5], row[6]), row[7]});
    if (cfg.kernel_points.empty()) cfg.kernel_points = default_kernel_points();

    const Reader hs = root.child("hs-norm");
    if (hs.has("kernels")) {
        cfg.kernels.clear();
        for (const auto& name : hs.strings("kernels")) cfg.kernels.push_back(parse_kernel(name, hs.where("kernels")));
    }
    if (cfg.kernels.empty()) cfg.kernels = {KernelId::K1, KernelId::K2, KernelId::K3};
    if (hs.has("margins")) cfg.margins = hs.numbers("margins");
    if (cfg.margins.size() < 2) throw ConfigError("config: hs-norm.margins needs at least two entries");
    for (double m : cfg.margins)
        if (!(m > 0.0 && m < 0.5)) throw ConfigError("config: hs-norm.margins must lie in (0, 0.5)");
    if (hs.has("expect")) {
        const Reader ex = hs.child("expect");
        for (const char* k : {"k1", "k2", "k3"})
            if (ex.has(k)) {
                const std::string v = ex.text(k, "");
                if (v != "FINITE" && v != "DIVERGENT" && v != "INCONCLUSIVE")
                    throw ConfigError("config: " + ex.where(k) + " must be FINITE, DIVERGENT or INCONCLUSIVE");
                cfg.expect_verdict[k] = v;
            }
    }

    const Reader mono = root.child("monotony");
    if (mono.has("expect")) {
        const std::string v = mono.text("expect", "");
        if (v != "MONOTONE-INCREASING" && v != "MONOTONE-DECREASING" && v != "CONSTANT" && v != "MIXED")
            throw ConfigError("config: monotony.expect must be MONOTONE-INCREASING, MONOTONE-DECREASING, CONSTANT or MIXED");
        cfg.expect_trend = v;
    }

    const Reader grid = root.child("grid");
    const std::uint64_t ns = grid.count("n_speed", 5);
    const std::uint64_t ne = grid.count("n_energy", 5);
    try {
        cfg.grid = NuGrid::uniform(grid.number("v_max", 6.0), grid.number("i_max", 10.0), static_cast<int>(ns),
                                   static_cast<int>(ne));
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("config: grid: ") + e.what());
    }

    const Reader basis = root.child("basis");
    cfg.basis.n_v = static_cast<int>(basis.count("n_v", 4));
    cfg.basis.n_i = static_cast<int>(basis.count("n_i", 4));
    return cfg;
}

PhaseFunction named_perturbation(const std::string& name) {
    if (name == "linear_v1") return [](const Vec3& v, double) { return 0.1 * std::tanh(v[0]); };
    if (name == "sin_v1") return [](const Vec3& v, double) { return 0.5 * std::sin(v[0]); };
    if (name == "tanh_energy") return [](const Vec3&, double I) { return 0.5 * std::tanh(I - 1.5); };
    if (name == "bump")
        return [](const Vec3& v, double) { return 0.8 * std::exp(-(v - Vec3(1.0, 0.0, 0.0)).squaredNorm()) - 0.2; };
    if (name == "shear")
        return [](const Vec3& v, double I) { return 0.3 * std::sin(v[0] * v[1]) + 0.3 * std::tanh(v[2] - 0.5 * I); };
    if (name == "hot_tail") return [](const Vec3& v, double I) { return 0.6 * std::tanh(0.1 * (v.squaredNorm() + I)) - 0.3; };
    throw ConfigError("config: unknown perturbation '" + name + "'");
}

std::vector<std::string> perturbation_names() {
    return {"linear_v1", "sin_v1", "tanh_energy", "bump", "shear", "hot_tail"};
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw NumericError("cannot write " + path.string());
        write_row(header);
    }
    void write_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

std::vector<std::string> cells(std::initializer_list<double> values) {
    std::vector<std::string> out;
    for (double v : values) out.push_back(format_double(v));
    return out;
}

json estimate_json(const Estimate& e) { return json{{"value", e.value}, {"std_err", e.std_err}}; }

void write_json(const std::filesystem::path& path, const json& doc) {
    std::ofstream out(path);
    if (!out) throw NumericError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
}

json config_echo(const RunConfig& cfg, const std::string& command) {
    const QuadratureSpec q = cfg.quad_for(command);
    return json{{"seed", cfg.seed},
                {"alpha", cfg.gas.alpha},
                {"gamma", cfg.gas.gamma},
                {"model", cfg.model.name()},
                {"c", cfg.model.c},
                {"samples", q.samples}};
}

struct CommandResult {
    json report;
    std::vector<std::string> failures;
};

CommandResult run_verify(const RunConfig& cfg, const std::filesystem::path& dir) {
    const AssumptionReport rep = verify_assumptions(cfg.model, cfg.gas, cfg.quad_for("verify"));
    CsvWriter csv(dir / "verify.csv", {"check", "pass", "values", "detail"});
    json checks = json::array();
    for (const auto& c : rep.checks) {
        std::string values;
        for (std::size_t i = 0; i < c.values.size(); ++i) values += (i ? ";" : "") + format_double(c.values[i]);
        std::string detail = c.detail;
        std::replace(detail.begin(), detail.end(), ',', ';');
        csv.write_row({c.name, c.pass ? "PASS" : "FAIL", values, detail});
        checks.push_back({{"name", c.name}, {"pass", c.pass}, {"values", c.values}, {"detail", c.detail}});
    }
    return {json{{"checks", checks}, {"all_pass", rep.all_pass()}}, rep.failures()};
}

CommandResult run_qtest(const RunConfig& cfg, const std::filesystem::path& dir) {
    const QuadratureSpec q = cfg.quad_for("qtest");
    std::vector<Distribution> dists = {maxwellian_distribution({}, cfg.gas)};
    for (const auto& name : cfg.perturbations)
        dists.push_back(perturbed_maxwellian(cfg.gas, named_perturbation(name), name));
    CsvWriter csv(dir / "qtest.csv",
                  {"distribution", "v1", "v2", "v3", "I", "q", "q_std_err", "q_equiv", "q_equiv_std_err", "z"});
    std::vector<std::string> failures;
    json rows = json::array();
    for (std::size_t d = 0; d < dists.size(); ++d) {
        for (const auto& p : cfg.probes) {
            const Estimate a = eval_Q(dists[d], p, cfg.gas, cfg.model, q);
            const Estimate b = eval_Q_equiv(dists[d], p, cfg.gas, cfg.model, q);
            const double z = z_score(a, b);
            auto row = cells({p.v[0], p.v[1], p.v[2], p.I, a.value, a.std_err, b.value, b.std_err, z});
            row.insert(row.begin(), dists[d].label);
            csv.write_row(row);
            const std::string at = dists[d].label + " at (" + format_double(p.v[0]) + " " + format_double(p.v[1]) +
                                   " " + format_double(p.v[2]) + " " + format_double(p.I) + ")";
            if (!(std::abs(z) <= 3.0)) failures.push_back("parametrizations disagree for " + at);
            if (d == 0 && !within_se(a, 3.0)) failures.push_back("Q(M) nonzero for " + at);
            rows.push_back({{"distribution", dists[d].label}, {"q", estimate_json(a)}, {"q_equiv", estimate_json(b)}, {"z", z}});
        }
    }
    json entropy = json::array();
    for (std::size_t d = 1; d < dists.size(); ++d) {
        const Estimate D = entropy_production(dists[d], cfg.gas, cfg.model, q);
        if (!(D.value + 3.0 * D.std_err < 0.0))
            failures.push_back("entropy production not negative for " + dists[d].label);
        entropy.push_back({{"distribution", dists[d].label}, {"D", estimate_json(D)}});
    }
    return {json{{"rows", rows}, {"entropy_production", entropy}}, failures};
}

CommandResult run_kernel_table(const RunConfig& cfg, const std::filesystem::path& dir) {
    const QuadratureSpec q = cfg.quad_for("kernel-table");
    CsvWriter csv(dir / "kernel-table.csv",
                  {"kernel", "v1", "v2", "v3", "I", "x1", "x2", "x3", "y", "k_value", "std_err"});
    json rows = json::array();
    for (KernelId k : cfg.kernels)
        for (const auto& p : cfg.kernel_points) {
            const Estimate e = eval_kernel(k, cfg.gas, cfg.model, p.v, p.I, p.x, p.y, q);
            auto row = cells({p.v[0], p.v[1], p.v[2], p.I, p.x[0], p.x[1], p.x[2], p.y, e.value, e.std_err});
            row.insert(row.begin(), kernel_name(k));
            csv.write_row(row);
            rows.push_back({{"kernel", kernel_name(k)}, {"value", estimate_json(e)}});
        }
    return {json{{"rows", rows}}, {}};
}

CommandResult run_hs_norm(const RunConfig& cfg, const std::filesystem::path& dir) {
    const QuadratureSpec q = cfg.quad_for("hs-norm");
    CsvWriter csv(dir / "hs-norm.csv", {"kernel", "margin", "value", "std_err"});
    json verdicts = json::object();
    std::vector<std::string> failures;
    for (KernelId k : cfg.kernels) {
        const HsLadder ladder = hs_norm_estimate(k, cfg.gas, cfg.model, q, cfg.margins);
        for (std::size_t i = 0; i < ladder.margins.size(); ++i) {
            auto row = cells({ladder.margins[i], ladder.values[i].value, ladder.values[i].std_err});
            row.insert(row.begin(), kernel_name(k));
            csv.write_row(row);
        }
        const std::string verdict = verdict_name(ladder.verdict);
        verdicts[kernel_name(k)] = {{"verdict", verdict}, {"last_growth", ladder.last_growth}};
        if (const auto it = cfg.expect_verdict.find(kernel_name(k)); it != cfg.expect_verdict.end() && it->second != verdict)
            failures.push_back(kernel_name(k) + " verdict " + verdict + ", expected " + it->second);
    }
    return {json{{"verdicts", verdicts}}, failures};
}

CommandResult run_nu(const RunConfig& cfg, const std::filesystem::path& dir) {
    const NuProfile prof = nu_profile(cfg.gas, cfg.model, cfg.grid, cfg.quad_for("nu"));
    CsvWriter csv(dir / "nu.csv", {"speed", "I", "nu", "std_err"});
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < cfg.grid.speeds.size(); ++i)
        for (std::size_t j = 0; j < cfg.grid.energies.size(); ++j) {
            const Estimate& e = prof.at(i, j);
            csv.write_row(cells({cfg.grid.speeds[i], cfg.grid.energies[j], e.value, e.std_err}));
            lo = std::min(lo, e.value);
            hi = std::max(hi, e.value);
        }
    std::vector<std::string> failures;
    if (!(lo > 0.0)) failures.push_back("nu is not positive on the grid");
    return {json{{"nu_min", lo}, {"nu_max", hi}}, failures};
}

CommandResult run_coercivity(const RunConfig& cfg, const std::filesystem::path& dir) {
    const CoercivityResult res = coercivity_fit(cfg.gas, cfg.model, cfg.grid, cfg.quad_for("coercivity"));
    CsvWriter csv(dir / "coercivity.csv", {"speed", "I", "nu", "nu_std_err", "ratio", "ratio_std_err"});
    const std::size_t ne = cfg.grid.energies.size();
    for (std::size_t k = 0; k < res.ratios.size(); ++k) {
        const Estimate& nu = res.profile.nu[k];
        csv.write_row(cells({cfg.grid.speeds[k / ne], cfg.grid.energies[k % ne], nu.value, nu.std_err,
                             res.ratios[k].value, res.ratios[k].std_err}));
    }
    std::vector<std::string> failures;
    if (!res.pass) failures.push_back("coercivity ratio not positive beyond 3 s.e. at grid minimum");
    return {json{{"c_hat", estimate_json(res.c_hat)},
                 {"argmin", {{"speed", cfg.grid.speeds[res.argmin / ne]}, {"I", cfg.grid.energies[res.argmin % ne]}}},
                 {"pass", res.pass}},
            failures};
}

json direction_json(const DirectionSummary& d) {
    return {{"trend", trend_name(d.trend)}, {"increasing", d.increasing}, {"decreasing", d.decreasing}, {"ties", d.ties}};
}

CommandResult run_monotony(const RunConfig& cfg, const std::filesystem::path& dir) {
    const MonotonyReport rep = monotony_check(cfg.gas, cfg.model, cfg.grid, cfg.quad_for("monotony"));
    CsvWriter csv(dir / "monotony.csv", {"direction", "speed", "I", "difference", "std_err"});
    const auto& g = cfg.grid;
    const std::size_t ne = g.energies.size();
    for (std::size_t i = 0; i + 1 < g.speeds.size(); ++i)
        for (std::size_t j = 0; j < ne; ++j) {
            const Estimate& d = rep.profile.d_speed[i * ne + j];
            auto row = cells({g.speeds[i], g.energies[j], d.value, d.std_err});
            row.insert(row.begin(), "speed");
            csv.write_row(row);
        }
    for (std::size_t i = 0; i < g.speeds.size(); ++i)
        for (std::size_t j = 0; j + 1 < ne; ++j) {
            const Estimate& d = rep.profile.d_energy[i * (ne - 1) + j];
            auto row = cells({g.speeds[i], g.energies[j], d.value, d.std_err});
            row.insert(row.begin(), "energy");
            csv.write_row(row);
        }
    std::vector<std::string> failures;
    const std::string overall = trend_name(rep.overall);
    if (cfg.expect_trend && *cfg.expect_trend != overall)
        failures.push_back("monotony classified " + overall + ", expected " + *cfg.expect_trend);
    return {json{{"overall", overall},
                 {"along_speed", direction_json(rep.along_speed)},
                 {"along_energy", direction_json(rep.along_energy)}},
            failures};
}

CommandResult run_spectrum(const RunConfig& cfg, const std::filesystem::path& dir) {
    const QuadratureSpec q = cfg.quad_for("spectrum");
    const HermiteLaguerreBasis basis(cfg.basis, cfg.gas.alpha);
    const OperatorMatrix a = assemble(basis, cfg.gas, cfg.model, q);
    const Spectrum sp = spectrum(a);
    const KernelCheck kc = kernel_check(a, basis, cfg.gas);
    QuadratureSpec nq = cfg.quad_for("nu");
    const NuProfile nu = nu_profile(cfg.gas, cfg.model, cfg.grid, nq);
    double nu0 = INFINITY, nu_max = -INFINITY;
    for (const auto& e : nu.nu) {
        nu0 = std::min(nu0, e.value);
        nu_max = std::max(nu_max, e.value);
    }

    CsvWriter csv(dir / "spectrum.csv", {"index", "eigenvalue"});
    for (std::size_t i = 0; i < sp.eigenvalues.size(); ++i) csv.write_row({std::to_string(i), format_double(sp.eigenvalues[i])});

    std::vector<std::string> failures;
    if (sp.kernel_dim != 5) failures.push_back("kernel dimension " + std::to_string(sp.kernel_dim) + ", expected 5");
    if (sp.positive > 0) failures.push_back(std::to_string(sp.positive) + " eigenvalues above +tol0");
    if (!(sp.gap >= 5.0 * sp.tol0)) failures.push_back("gap below 5 tol0");
    if (!kc.pass) failures.push_back("collision invariants not annihilated within tol0");
    if (!(a.max_asymmetry <= 3.0 * a.max_asym_se)) failures.push_back("matrix asymmetry exceeds 3 s.e.");
    if (sp.eigenvalues.back() < -nu_max - sp.tol0) failures.push_back("lowest eigenvalue below -max nu - tol0");

    return {json{{"kernel_dim_detected", sp.kernel_dim},
                 {"gap_estimate", sp.gap},
                 {"tol0", sp.tol0},
                 {"nu0", nu0},
                 {"nu_max", nu_max},
                 {"positive_eigenvalues", sp.positive},
                 {"min_eigenvalue", sp.eigenvalues.back()},
                 {"basis_size", basis.size()},
                 {"samples", a.samples},
                 {"max_entry_std_err", a.se.maxCoeff()},
                 {"max_asymmetry", a.max_asymmetry},
                 {"max_asymmetry_std_err", a.max_asym_se},
                 {"refinement_warning", a.refinement_warning},
                 {"kernel_check", {{"residuals", kc.residuals}, {"coefficient_norms", kc.coefficient_norms},
                                   {"control_residual", kc.control_residual}, {"pass", kc.pass}}}},
            failures};
}

}  // namespace

RunOutcome run(const std::string& command, const RunConfig& config, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    RunOutcome outcome;
    json report;
    std::string error_kind;
    try {
        CommandResult r;
        if (command == "verify") r = run_verify(config, out_dir);
        else if (command == "qtest") r = run_qtest(config, out_dir);
        else if (command == "kernel-table") r = run_kernel_table(config, out_dir);
        else if (command == "hs-norm") r = run_hs_norm(config, out_dir);
        else if (command == "nu") r = run_nu(config, out_dir);
        else if (command == "coercivity") r = run_coercivity(config, out_dir);
        else if (command == "monotony") r = run_monotony(config, out_dir);
        else if (command == "spectrum") r = run_spectrum(config, out_dir);
        else throw ConfigError("unknown command '" + command + "'");
        report = std::move(r.report);
        outcome.failures = std::move(r.failures);
        outcome.exit_code = outcome.failures.empty() ? kExitOk : kExitCheck;
    } catch (const ConfigError& e) {
        outcome.exit_code = kExitConfig;
        outcome.failures = {e.what()};
        error_kind = "config";
    } catch (const std::exception& e) {
        outcome.exit_code = kExitNumeric;
        outcome.failures = {e.what()};
        error_kind = "numeric";
    }
    report["command"] = command;
    report["config"] = config_echo(config, command);
    report["status"] = outcome.exit_code == kExitOk ? "PASS" : "FAIL";
    report["failures"] = outcome.failures;
    if (!error_kind.empty()) report["error"] = error_kind;
    write_json(out_dir / (command + ".json"), report);
    return outcome;
}

}  // namespace polyboltz
