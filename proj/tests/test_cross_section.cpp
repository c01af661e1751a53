#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "polyboltz/cross_section.hpp"
#include "polyboltz/errors.hpp"

using namespace polyboltz;

namespace {

QuadratureSpec probes(std::uint64_t n) {
    QuadratureSpec q;
    q.samples = n;
    q.seed = 17;
    return q;
}

}  // namespace

TEST_CASE("alpha from molecule") {
    CHECK(alpha_from_molecule(2, false, true) == 0.0);
    CHECK(alpha_from_molecule(3, false, false) == 0.5);
    CHECK(alpha_from_molecule(3, true, false) == 2.0);
    CHECK(alpha_from_molecule(2, true, true) == 0.5);
    CHECK_THROWS_AS(alpha_from_molecule(1, false, true), DomainError);
}

TEST_CASE("gas spec validation") {
    GasSpec g = GasSpec::from_molecule({3, false, false}, 0.0);
    CHECK(g.alpha == 0.5);
    CHECK_NOTHROW(g.validate());
    g.alpha = 1.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    CHECK_THROWS_AS((GasSpec{-1.0, 0.0, {}}.validate()), ConfigError);
    CHECK_THROWS_AS((GasSpec{0.5, -0.5, {}}.validate()), ConfigError);
}

TEST_CASE("total energy model values") {
    const auto m = CrossSectionModel::total_energy();
    CHECK(eval_B(m, GasSpec{0.5, 0.0, {}}, CollisionVars{1.7, 0.3, 2.0, 0.4, 0.6}, 1.0) == doctest::Approx(3.0));
    CHECK(eval_B(m, GasSpec{0.5, 2.0, {}}, CollisionVars{2.0, 1.0, 0.0, 0.4, 0.6}, 0.5) == doctest::Approx(2.5));
    // Through the state interface: g = (2,0,0), ω at 60° to ĝ.
    const Vec3 om(0.5, std::sqrt(0.75), 0.0);
    CHECK(eval_B(m, GasSpec{0.5, 2.0, {}}, {Vec3(2, 0, 0), 1.0}, {Vec3::Zero(), 0.0}, {0.4, 0.6, om}) ==
          doctest::Approx(2.5));
    // g = 0: the angular factor is taken as 0.
    CHECK(eval_B(m, GasSpec{0.5, 0.0, {}}, {Vec3::Zero(), 1.0}, {Vec3::Zero(), 1.0}, {}) == 0.0);
}

TEST_CASE("energy form variant") {
    const auto m = CrossSectionModel::total_energy(2.0, true);
    const CollisionVars c{2.0, 1.0, 3.0, 0.3, 0.2};
    CHECK(eval_B(m, GasSpec{0.5, 1.0, {}}, c, 0.25) == doctest::Approx(2.0 * 0.25 * std::sqrt(5.0)));
    CHECK(m.name() == "total_energy_E");
}

TEST_CASE("sigma density cancels the singular factor") {
    const GasSpec gas{0.5, 1.0, {}};
    const CollisionVars c{1.3, 0.4, 0.9, 0.3, 0.7};
    const auto te = CrossSectionModel::total_energy();
    CHECK(b_sigma_density(te, gas, c, 0.0) == doctest::Approx(0.5 * reduced_B(te, gas, c)));
    // The angular-weighted model carries no |ω·ĝ|, so the density keeps 1/|σ-ĝ|.
    const auto pm = CrossSectionModel::angular_weighted();
    CHECK(b_sigma_density(pm, gas, c, 0.5) == doctest::Approx(2.0 * reduced_B(pm, gas, c)));
}

TEST_CASE("exchange microreversibility at random points") {
    Sampler s(3, 0, 0);
    const GasSpec gas{0.5, 0.7, {}};
    for (const auto& m : {CrossSectionModel::total_energy(), CrossSectionModel::total_energy(1.0, true),
                          CrossSectionModel::partitioned(), CrossSectionModel::angular_weighted(2.0)}) {
        for (int i = 0; i < 100; ++i) {
            const ParticleState a{s.normal3(), s.gamma(1.0)}, b{s.normal3(), s.gamma(1.0)};
            const CollisionParams p{s.uniform(), s.uniform(), s.sphere()};
            const double B = eval_B(m, gas, a, b, p);
            CHECK(eval_B(m, gas, b, a, {1.0 - p.r, p.R, -p.omega}) == doctest::Approx(B).epsilon(1e-12));
        }
    }
}

TEST_CASE("integrability ladder oracles") {
    // (r(1-r))^{-1/2} R (1-R)^{3/2} integrates to B(1/2,1/2) B(2,5/2) = 4π/35.
    const LadderResult ok = integrability_ladder(
        [](double r, double R) { return std::pow(r * (1.0 - r), -0.5) * R * std::pow(1.0 - R, 1.5); });
    CHECK_FALSE(ok.divergent);
    CHECK(ok.values.back() == doctest::Approx(4.0 * std::numbers::pi / 35.0).epsilon(1e-2));
    // 1/(r(1-r)) integrates to 2 log((1-ε)/ε), and ∫R dR to 1/2 - ε.
    const LadderResult bad =
        integrability_ladder([](double r, double R) { return R / (r * (1.0 - r)); });
    CHECK(bad.divergent);
    for (std::size_t i = 0; i < bad.values.size(); ++i) {
        const double eps = bad.margins[i];
        CHECK(bad.values[i] == doctest::Approx(2.0 * std::log((1.0 - eps) / eps) * (0.5 - eps)).epsilon(1e-3));
    }
    CHECK_THROWS_AS(integrability_ladder([](double, double) { return 1.0; }, {0.0}), DomainError);
}

TEST_CASE("assumption report: total energy, alpha 1/2, gamma 0") {
    const auto rep = verify_assumptions(CrossSectionModel::total_energy(), GasSpec{0.5, 0.0, {}}, probes(10000));
    CHECK(rep.all_pass());
    REQUIRE(rep.find("k2_integrability"));
    CHECK(rep.find("k2_integrability")->pass);
    CHECK(rep.find("k3_integrability")->pass);
}

TEST_CASE("assumption report: total energy, alpha 0 fails the k2 condition") {
    const auto rep = verify_assumptions(CrossSectionModel::total_energy(), GasSpec{0.0, 0.0, {}}, probes(2000));
    CHECK_FALSE(rep.find("k2_integrability")->pass);
    CHECK_FALSE(rep.find("k3_integrability")->pass);
    CHECK(rep.find("k3_matches_k2")->pass);
    CHECK(rep.find("reversibility_exchange")->pass);
    CHECK(rep.find("reversibility_collision")->pass);
}

TEST_CASE("assumption report: partitioned sandwich bounds") {
    for (double gamma : {0.0, 0.5, 1.0}) {
        const auto rep = verify_assumptions(CrossSectionModel::partitioned(), GasSpec{2.0, gamma, {}}, probes(10000));
        CHECK(rep.find("lower_bound")->pass);
        CHECK(rep.find("upper_bound")->pass);
        CHECK(rep.find("symmetry")->pass);
        CHECK(rep.find("reversibility_collision")->pass);
    }
}

TEST_CASE("collision microreversibility by model") {
    const auto probe = [](const CrossSectionModel& m, double gamma) {
        return verify_assumptions(m, GasSpec{0.5, gamma, {}}, probes(2000)).find("reversibility_collision")->pass;
    };
    CHECK(probe(CrossSectionModel::total_energy(), 0.0));
    CHECK(probe(CrossSectionModel::total_energy(1.0, true), 1.0));
    CHECK(probe(CrossSectionModel::angular_weighted(), 1.0));
    // |g|^γ + I^{γ/2} + I*^{γ/2} is not a collision invariant once γ > 0.
    CHECK_FALSE(probe(CrossSectionModel::total_energy(), 1.0));
}

TEST_CASE("the literal partitioned envelope is not an upper bound") {
    // Ψ = max{R^{γ/2}, (r(1-R))^{γ/2}} misses the (1-r)(1-R)I* term when r and R are small.
    auto custom = std::make_shared<CustomModel>();
    custom->name = "partitioned_literal";
    custom->reduced = [](const GasSpec& g, const CollisionVars& v) {
        return reduced_B(CrossSectionModel::partitioned(), g, v);
    };
    custom->phi = [](const GasSpec& g, double r, double R) {
        return envelope_phi(CrossSectionModel::partitioned(), g, r, R);
    };
    custom->psi = [](const GasSpec& g, double r, double R) {
        return std::max(std::pow(R, 0.5 * g.gamma), std::pow(r * (1.0 - R), 0.5 * g.gamma));
    };
    const auto rep = verify_assumptions(CrossSectionModel::from_custom(custom), GasSpec{0.5, 1.0, {}}, probes(10000));
    CHECK_FALSE(rep.find("upper_bound")->pass);
    CHECK_FALSE(rep.find("symmetry")->pass);
}

TEST_CASE("assumption report needs a seed") {
    QuadratureSpec q;
    CHECK_THROWS_AS(verify_assumptions(CrossSectionModel::total_energy(), GasSpec{}, q), ConfigError);
}
