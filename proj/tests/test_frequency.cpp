#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/Geometry>

#include "polyboltz/errors.hpp"
#include "polyboltz/frequency.hpp"

using namespace polyboltz;

namespace {

QuadratureSpec mc(std::uint64_t samples, std::uint64_t seed) {
    QuadratureSpec q;
    q.samples = samples;
    q.seed = seed;
    return q;
}

constexpr double kPi = std::numbers::pi;

}  // namespace

TEST_CASE("nu for Maxwell molecules") {
    // 3 · ∫(1-R)R^{1/2} dR · ∫|ω·ĝ| dω = 3 · 4/15 · 2π.
    const GasSpec maxwell{0.0, 0.0, {}};
    const auto model = CrossSectionModel::total_energy();
    for (const ParticleState& s : {ParticleState{Vec3::Zero(), 0.0}, ParticleState{Vec3(1, 2, 0), 3.0}}) {
        const Estimate nu = eval_nu(s, maxwell, model, mc(400000, 1));
        CHECK(std::abs(nu.value - 8.0 * kPi / 5.0) <= 3.0 * nu.std_err);
    }
}

TEST_CASE("nu for alpha 1/2, gamma 0") {
    // 3 · 2π · B(3/2,3/2) · B(3/2,3) = 4π²/35.
    const Estimate nu = eval_nu({Vec3(0.5, 0, 0), 1.0}, GasSpec{0.5, 0.0, {}}, CrossSectionModel::total_energy(),
                                mc(400000, 2));
    CHECK(std::abs(nu.value - 4.0 * kPi * kPi / 35.0) <= 3.0 * nu.std_err);
}

TEST_CASE("nu is radial") {
    const GasSpec gas{0.5, 1.0, {}};
    const auto model = CrossSectionModel::total_energy();
    Sampler s(3, 0, 0);
    const ParticleState p{Vec3(1.2, -0.4, 0.7), 0.8};
    const Estimate base = eval_nu(p, gas, model, mc(100000, 4));
    for (int i = 0; i < 5; ++i) {
        const Eigen::Matrix3d rot = Eigen::Quaterniond(Eigen::Vector4d(s.normal(), s.normal(), s.normal(), s.normal()).normalized()).toRotationMatrix();
        const Estimate turned = eval_nu({rot * p.v, p.I}, gas, model, mc(100000, 5 + i));
        CHECK(std::abs(z_score(base, turned)) <= 3.0);
    }
}

TEST_CASE("nu is positive at the origin for every built-in model") {
    const GasSpec gas{0.5, 1.0, {}};
    for (const auto& m : {CrossSectionModel::total_energy(), CrossSectionModel::total_energy(1.0, true),
                          CrossSectionModel::partitioned(), CrossSectionModel::angular_weighted()}) {
        const Estimate nu = eval_nu({Vec3::Zero(), 0.0}, gas, m, mc(20000, 6));
        CHECK(nu.value - 3.0 * nu.std_err > 0.0);
    }
}

TEST_CASE("coercivity") {
    const auto model = CrossSectionModel::total_energy();
    const NuGrid grid = NuGrid::uniform(6.0, 10.0, 10, 10);
    const GasSpec flat{0.5, 0.0, {}};
    const CoercivityResult c0 = coercivity_fit(flat, model, grid, mc(100000, 7));
    CHECK(c0.pass);
    CHECK(std::abs(c0.c_hat.value - 4.0 * kPi * kPi / 105.0) <= 3.0 * c0.c_hat.std_err);

    const CoercivityResult c1 = coercivity_fit(GasSpec{0.5, 1.0, {}}, model, grid, mc(100000, 8));
    CHECK(c1.pass);
    CHECK(c1.c_hat.value - 3.0 * c1.c_hat.std_err > 0.0);

    CHECK_THROWS_AS(coercivity_fit(flat, model, NuGrid::uniform(6.0, 10.0, 5, 5), mc(100, 9)), ConfigError);
}

TEST_CASE("monotony") {
    const auto model = CrossSectionModel::total_energy();
    const NuGrid grid = NuGrid::uniform(6.0, 10.0, 6, 6);
    const MonotonyReport flat = monotony_check(GasSpec{0.5, 0.0, {}}, model, grid, mc(50000, 10));
    CHECK(flat.overall == Trend::Constant);
    const MonotonyReport up = monotony_check(GasSpec{0.5, 1.0, {}}, model, grid, mc(50000, 11));
    CHECK(up.along_speed.trend == Trend::Increasing);
    CHECK(up.along_energy.trend == Trend::Increasing);
    CHECK(up.overall == Trend::Increasing);
    const MonotonyReport doubled = monotony_check(GasSpec{0.5, 1.0, {}}, model, grid, mc(100000, 12));
    CHECK(doubled.overall == up.overall);
    CHECK(trend_name(Trend::Increasing) == "MONOTONE-INCREASING");
}

TEST_CASE("profile differences are paired") {
    const NuGrid grid = NuGrid::uniform(4.0, 4.0, 3, 3);
    const NuProfile p = nu_profile(GasSpec{0.5, 1.0, {}}, CrossSectionModel::total_energy(), grid, mc(20000, 13));
    REQUIRE(p.nu.size() == 9);
    REQUIRE(p.d_speed.size() == 6);
    REQUIRE(p.d_energy.size() == 6);
    CHECK(p.d_speed[0].value == doctest::Approx(p.at(1, 0).value - p.at(0, 0).value));
    CHECK(p.d_energy[0].value == doctest::Approx(p.at(0, 1).value - p.at(0, 0).value));
    CHECK(p.d_speed[0].std_err < p.at(1, 0).std_err + p.at(0, 0).std_err);
}
