#include "polyboltz/cross_section.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "polyboltz/errors.hpp"

namespace polyboltz {

double alpha_from_molecule(int atoms, bool vibrating, bool linear) {
    if (atoms < 2) throw DomainError("alpha_from_molecule: monoatomic gases (N < 2) are out of scope");
    if (vibrating) return (3.0 * atoms - 5.0) / 2.0;
    return linear ? 0.0 : 0.5;
}

GasSpec GasSpec::from_molecule(const MoleculeSpec& m, double gamma) {
    GasSpec g;
    g.alpha = alpha_from_molecule(m.atoms, m.vibrating, m.linear);
    g.gamma = gamma;
    g.molecule = m;
    return g;
}

void GasSpec::validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw ConfigError("gas.alpha must be a finite value >= 0");
    if (!std::isfinite(gamma) || gamma < 0.0) throw ConfigError("gas.gamma must be a finite value >= 0");
    if (molecule) {
        double expected = 0.0;
        try {
            expected = alpha_from_molecule(molecule->atoms, molecule->vibrating, molecule->linear);
        } catch (const DomainError& e) {
            throw ConfigError(std::string("gas.molecule: ") + e.what());
        }
        if (std::abs(expected - alpha) > 1e-12) {
            std::ostringstream os;
            os << "gas.alpha = " << alpha << " contradicts gas.molecule (expected " << expected << ")";
            throw ConfigError(os.str());
        }
    }
}

CrossSectionModel CrossSectionModel::total_energy(double c, bool energy_form) {
    CrossSectionModel m;
    m.kind = ModelKind::TotalEnergy;
    m.c = c;
    m.energy_form = energy_form;
    return m;
}

CrossSectionModel CrossSectionModel::partitioned(double c) {
    CrossSectionModel m;
    m.kind = ModelKind::Partitioned;
    m.c = c;
    return m;
}

CrossSectionModel CrossSectionModel::angular_weighted(double b) {
    CrossSectionModel m;
    m.kind = ModelKind::AngularWeighted;
    m.c = b;
    return m;
}

CrossSectionModel CrossSectionModel::from_custom(std::shared_ptr<const CustomModel> custom) {
    CrossSectionModel m;
    m.kind = ModelKind::Custom;
    m.custom = std::move(custom);
    m.validate();
    return m;
}

std::string CrossSectionModel::name() const {
    switch (kind) {
        case ModelKind::TotalEnergy: return energy_form ? "total_energy_E" : "total_energy";
        case ModelKind::Partitioned: return "partitioned";
        case ModelKind::AngularWeighted: return "angular_weighted";
        case ModelKind::Custom: return custom ? custom->name : "custom";
    }
    return "unknown";
}

void CrossSectionModel::validate() const {
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("model.c must be a finite positive constant");
    if (kind == ModelKind::Custom) {
        if (!custom || !custom->reduced || !custom->phi || !custom->psi) {
            throw ConfigError("custom model needs reduced, phi and psi callables");
        }
    }
}

bool CrossSectionModel::has_abs_cos_factor() const {
    switch (kind) {
        case ModelKind::AngularWeighted: return false;
        case ModelKind::Custom: return custom->abs_cos_factor;
        default: return true;
    }
}

double speed_energy_sum(double gamma, double g_norm, double I, double I_star) {
    if (gamma == 0.0) return 3.0;
    return std::pow(g_norm, gamma) + std::pow(I, 0.5 * gamma) + std::pow(I_star, 0.5 * gamma);
}

namespace {

double partition_sum(double gamma, const CollisionVars& v) {
    if (gamma == 0.0) return 3.0;
    const double h = 0.5 * gamma;
    return std::pow(v.R, h) * std::pow(v.g_norm, gamma) + std::pow(v.r * (1.0 - v.R) * v.I, h) +
           std::pow((1.0 - v.r) * (1.0 - v.R) * v.I_star, h);
}

}  // namespace

double reduced_B(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& v) {
    switch (model.kind) {
        case ModelKind::TotalEnergy:
            if (model.energy_form) return model.c * std::pow(v.energy(), 0.5 * spec.gamma);
            return model.c * speed_energy_sum(spec.gamma, v.g_norm, v.I, v.I_star);
        case ModelKind::Partitioned:
        case ModelKind::AngularWeighted:
            return model.c * partition_sum(spec.gamma, v);
        case ModelKind::Custom:
            return model.custom->reduced(spec, v);
    }
    return 0.0;
}

double eval_B(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& c, double cos_abs) {
    const double b = reduced_B(model, spec, c);
    return model.has_abs_cos_factor() ? cos_abs * b : b;
}

double eval_B(const CrossSectionModel& model, const GasSpec& spec, const ParticleState& s,
              const ParticleState& s_star, const CollisionParams& p) {
    const Vec3 g = s.v - s_star.v;
    const double gn = g.norm();
    // With g = 0 the angular factor |ω·ĝ| is taken as 0.
    const double cos_abs = gn > 0.0 ? std::abs(p.omega.dot(g) / gn) : 0.0;
    return eval_B(model, spec, CollisionVars{gn, s.I, s_star.I, p.r, p.R}, cos_abs);
}

double b_sigma_density(const CrossSectionModel& model, const GasSpec& spec, const CollisionVars& c,
                       double sigma_ghat_distance) {
    const double b = reduced_B(model, spec, c);
    if (model.has_abs_cos_factor()) return 0.5 * b;
    return b / sigma_ghat_distance;
}

double envelope_phi(const CrossSectionModel& model, const GasSpec& spec, double r, double R) {
    const double h = 0.5 * spec.gamma;
    switch (model.kind) {
        case ModelKind::TotalEnergy:
            if (model.energy_form) return model.c * std::pow(2.0, -spec.gamma) / 3.0;
            return model.c;
        case ModelKind::Partitioned:
        case ModelKind::AngularWeighted:
            return model.c * std::pow(std::min(R, 1.0 - R), h) * std::pow(std::min(r, 1.0 - r), h);
        case ModelKind::Custom:
            return model.custom->phi(spec, r, R);
    }
    return 0.0;
}

double envelope_psi(const CrossSectionModel& model, const GasSpec& spec, double r, double R) {
    const double h = 0.5 * spec.gamma;
    switch (model.kind) {
        case ModelKind::TotalEnergy:
            if (model.energy_form) return model.c * std::max(1.0, std::pow(3.0, h - 1.0));
            return model.c;
        case ModelKind::Partitioned:
        case ModelKind::AngularWeighted:
            return model.c * std::pow(std::max({R, r * (1.0 - R), (1.0 - r) * (1.0 - R)}), h);
        case ModelKind::Custom:
            return model.custom->psi(spec, r, R);
    }
    return 0.0;
}

LadderResult integrability_ladder(const std::function<double(double, double)>& f,
                                  const std::vector<double>& margins, double growth_tol) {
    using boost::math::quadrature::gauss_kronrod;
    LadderResult out;
    out.margins = margins;
    for (double eps : margins) {
        if (!(eps > 0.0 && eps < 0.5)) throw DomainError("integrability_ladder: margin outside (0, 0.5)");
        // Logistic coordinates x = 1/(1+e^{-t}) spread the boundary layers evenly.
        const double L = std::log((1.0 - eps) / eps);
        auto logistic = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };
        auto inner = [&](double tr) {
            const double r = logistic(tr);
            auto g = [&](double tR) {
                const double R = logistic(tR);
                return f(r, R) * R * (1.0 - R);
            };
            return r * (1.0 - r) * gauss_kronrod<double, 31>::integrate(g, -L, L, 12, 1e-11);
        };
        const double value = gauss_kronrod<double, 31>::integrate(inner, -L, L, 12, 1e-11);
        out.values.push_back(value);
    }
    const std::size_t n = out.values.size();
    if (n >= 2) {
        const double prev = out.values[n - 2];
        const double last = out.values[n - 1];
        out.last_growth = (last - prev) / std::abs(prev);
    }
    out.divergent = !std::isfinite(out.values.back()) || out.last_growth > growth_tol;
    return out;
}

bool AssumptionReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

const CheckResult* AssumptionReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<std::string> AssumptionReport::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks)
        if (!c.pass) out.push_back(c.name);
    return out;
}

namespace {

double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

CheckResult ladder_check(const std::string& name, const LadderResult& l) {
    CheckResult c;
    c.name = name;
    c.values = l.values;
    c.pass = !l.divergent;
    std::ostringstream os;
    os << (l.divergent ? "DIVERGENT" : "convergent") << ", last refinement growth " << l.last_growth;
    c.detail = os.str();
    return c;
}

}  // namespace

AssumptionReport verify_assumptions(const CrossSectionModel& model, const GasSpec& spec,
                                    const QuadratureSpec& probes) {
    model.validate();
    spec.validate();
    const std::uint64_t seed = probes.require_seed();
    const std::uint64_t n = std::min<std::uint64_t>(probes.samples, 100000);

    std::uint64_t bad_pos = 0, bad_order = 0, bad_sym = 0, bad_lower = 0, bad_upper = 0;
    double worst_exchange = 0.0, worst_collision = 0.0, worst_upper = 0.0;
    Sampler rng(seed, 0x5a5a, 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        ParticleState s{2.0 * rng.normal3(), 2.0 * rng.gamma(1.0)};
        ParticleState s_star{2.0 * rng.normal3(), 2.0 * rng.gamma(1.0)};
        CollisionParams p{rng.uniform(), rng.uniform(), rng.sphere()};

        const double phi = envelope_phi(model, spec, p.r, p.R);
        const double psi = envelope_psi(model, spec, p.r, p.R);
        if (!(phi > 0.0) || !(psi > 0.0)) ++bad_pos;
        if (phi > psi * (1.0 + 1e-12)) ++bad_order;
        if (rel_diff(phi, envelope_phi(model, spec, 1.0 - p.r, p.R)) > 1e-12 ||
            rel_diff(psi, envelope_psi(model, spec, 1.0 - p.r, p.R)) > 1e-12)
            ++bad_sym;

        const Vec3 g = s.v - s_star.v;
        const double cos_abs = std::abs(p.omega.dot(g.normalized()));
        const double sum = speed_energy_sum(spec.gamma, g.norm(), s.I, s_star.I);
        const double B = eval_B(model, spec, s, s_star, p);
        // Roundoff in |ω·ĝ| is absolute, so near-grazing probes get slack on the scale of Ψ S.
        const double slack = 1e-12 * psi * sum + 1e-300;
        if (phi * cos_abs * sum > B * (1.0 + 1e-12) + slack) ++bad_lower;
        const double upper = cos_abs * psi * sum;
        if (B > upper * (1.0 + 1e-12) + slack) {
            ++bad_upper;
            worst_upper = std::max(worst_upper, upper > 0.0 ? B / upper : INFINITY);
        }

        const double B_swap = eval_B(model, spec, s_star, s, CollisionParams{1.0 - p.r, p.R, -p.omega});
        worst_exchange = std::max(worst_exchange, rel_diff(B, B_swap));

        const auto [post, post_star] = post_collision(s, s_star, p);
        const Fractions back = pre_fractions(s, s_star);
        const double B_post = eval_B(model, spec, post, post_star, CollisionParams{back.r, back.R, p.omega});
        const double scale = std::max({std::abs(B), std::abs(B_post), psi * sum, 1e-300});
        worst_collision = std::max(worst_collision, std::abs(B - B_post) / scale);
    }

    AssumptionReport rep;
    auto count_check = [&](const std::string& name, std::uint64_t bad, const std::string& what) {
        CheckResult c;
        c.name = name;
        c.pass = bad == 0;
        c.values = {static_cast<double>(bad), static_cast<double>(n)};
        c.detail = std::to_string(bad) + " of " + std::to_string(n) + " probes violate " + what;
        rep.checks.push_back(c);
    };
    count_check("envelope_positive", bad_pos, "Phi > 0, Psi > 0");
    count_check("envelope_order", bad_order, "Phi <= Psi");
    count_check("symmetry", bad_sym, "Phi(r,R)=Phi(1-r,R), Psi(r,R)=Psi(1-r,R)");
    count_check("lower_bound", bad_lower, "Phi |w.g| S <= B");
    count_check("upper_bound", bad_upper, "B <= |w.g| Psi S");
    if (bad_upper > 0) rep.checks.back().values.push_back(worst_upper);

    auto identity_check = [&](const std::string& name, double worst, double tol, const std::string& what) {
        CheckResult c;
        c.name = name;
        c.pass = worst <= tol;
        c.values = {worst};
        std::ostringstream os;
        os << what << ", worst relative deviation " << worst << " (tolerance " << tol << ")";
        c.detail = os.str();
        rep.checks.push_back(c);
    };
    identity_check("reversibility_exchange", worst_exchange, 1e-12, "B(v,v*,I,I*,r,R,w) = B(v*,v,I*,I,1-r,R,-w)");
    identity_check("reversibility_collision", worst_collision, 1e-10, "B(pre, r, R, w) = B(post, r', R', w)");

    const double a = spec.alpha;
    const double gm = spec.gamma;
    const double k2_exp = std::min(2.0 * a - 1.0 - gm, a - 1.0);
    const LadderResult k2 = integrability_ladder([&](double r, double R) {
        const double psi = envelope_psi(model, spec, r, R);
        return psi * psi * std::pow(r * (1.0 - r), k2_exp) * R * std::pow(1.0 - R, 3.0 * a - gm);
    });
    rep.checks.push_back(ladder_check("k2_integrability", k2));
    const LadderResult k3 = integrability_ladder([&](double r, double R) {
        const double psi = envelope_psi(model, spec, r, R);
        return psi * psi * std::pow(1.0 - r, 2.0 * a - 1.0 - gm) * std::pow(r, a - 1.0) * R *
               std::pow(1.0 - R, 3.0 * a - gm);
    });
    rep.checks.push_back(ladder_check("k3_integrability", k3));
    {
        CheckResult c;
        c.name = "k3_matches_k2";
        c.pass = k2.divergent == k3.divergent;
        c.detail = c.pass ? "same verdict" : "k2 and k3 integrability verdicts differ";
        rep.checks.push_back(c);
    }
    const LadderResult phi_l1 = integrability_ladder([&](double r, double R) {
        return envelope_phi(model, spec, r, R) * std::pow(r * (1.0 - r), a) * std::sqrt(R) *
               std::pow(1.0 - R, 2.0 * a + 1.0);
    });
    rep.checks.push_back(ladder_check("phi_integrability", phi_l1));
    return rep;
}

}  // namespace polyboltz
