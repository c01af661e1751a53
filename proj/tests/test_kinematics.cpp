#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "polyboltz/errors.hpp"
#include "polyboltz/kinematics.hpp"
#include "polyboltz/quadrature.hpp"

using namespace polyboltz;

namespace {

ParticleState random_state(Sampler& s) { return {1.5 * s.normal3(), 2.0 * s.gamma(1.5)}; }

CollisionParams random_params(Sampler& s) { return {s.uniform(), s.uniform(), s.sphere()}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("total energy") {
    CHECK(total_energy({Vec3(2, 0, 0), 1.0}, {Vec3::Zero(), 0.5}) == doctest::Approx(2.5));
    CHECK(total_energy({Vec3(1, 2, 3), 0.0}, {Vec3(1, 2, 3), 0.0}) == 0.0);
    Sampler s(1, 1, 0);
    for (int i = 0; i < 100; ++i) {
        const auto a = random_state(s), b = random_state(s);
        CHECK(total_energy(a, b) == doctest::Approx(total_energy(b, a)).epsilon(1e-14));
    }
    const CenterOfMass c = center_of_mass({Vec3(2, 0, 0), 1.0}, {Vec3::Zero(), 0.5});
    CHECK(c.G.isApprox(Vec3(1, 0, 0)));
    CHECK(c.E == doctest::Approx(2.5));
}

TEST_CASE("reflect") {
    const Vec3 w(0, 0, 1);
    CHECK(reflect(Vec3(1, 2, 0), w).isApprox(Vec3(1, 2, 0)));
    CHECK(reflect(w, w).isApprox(-w));
    const double h = std::sqrt(0.5);
    CHECK((reflect(Vec3(1, 0, 0), Vec3(h, h, 0)) - Vec3(0, -1, 0)).norm() < 1e-15);
    CHECK_THROWS_AS(reflect(Vec3(1, 0, 0), Vec3(1, 1, 0)), DomainError);
    Sampler s(2, 1, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 z = s.normal3(), om = s.sphere();
        CHECK(reflect(z, om).norm() == doctest::Approx(z.norm()).epsilon(1e-14));
        CHECK((reflect(reflect(z, om), om) - z).norm() < 1e-13);
    }
}

TEST_CASE("post collision: identity example") {
    const auto [a, b] = post_collision({Vec3(1, 0, 0), 1.0}, {Vec3(-1, 0, 0), 1.0}, {0.5, 1.0 / 3.0, Vec3(0, 0, 1)});
    CHECK((a.v - Vec3(1, 0, 0)).norm() < 1e-14);
    CHECK((b.v - Vec3(-1, 0, 0)).norm() < 1e-14);
    CHECK(a.I == doctest::Approx(1.0));
    CHECK(b.I == doctest::Approx(1.0));
}

TEST_CASE("post collision: conservation and partition") {
    Sampler s(3, 1, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_state(s), b = random_state(s);
        const CollisionParams p = random_params(s);
        const auto [c, d] = post_collision(a, b, p);
        const double E = total_energy(a, b);
        CHECK(((c.v + d.v) - (a.v + b.v)).norm() <= 1e-12 * std::max(1.0, (a.v + b.v).norm()));
        CHECK(rel(total_energy(c, d), E) <= 1e-12);
        CHECK(rel(0.25 * (c.v - d.v).squaredNorm(), p.R * E) <= 1e-12);
        CHECK(rel(c.I + d.I, (1.0 - p.R) * E) <= 1e-12);
        CHECK(rel(c.I, p.r * (1.0 - p.R) * E) <= 1e-12);
    }
}

TEST_CASE("post collision: degenerate and invalid input") {
    const auto [a, b] = post_collision({Vec3(1, 1, 1), 0.0}, {Vec3(1, 1, 1), 0.0}, {});
    CHECK(a.v.isApprox(Vec3(1, 1, 1)));
    CHECK(b.I == 0.0);
    CHECK_THROWS_AS(post_collision({}, {}, {1.5, 0.5, Vec3::UnitZ()}), DomainError);
    CHECK_THROWS_AS(post_collision({}, {}, {0.5, 0.5, Vec3(1, 1, 0)}), DomainError);
}

TEST_CASE("kinematic microreversibility") {
    Sampler s(4, 1, 0);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_state(s), b = random_state(s);
        const CollisionParams p = random_params(s);
        const auto [c, d] = post_collision(a, b, p);
        const Fractions back = pre_fractions(a, b);
        // The ω that maps ĝ' back onto ĝ bisects them.
        const Vec3 g = (a.v - b.v).normalized();
        const Vec3 gp = (c.v - d.v).normalized();
        const Vec3 om = (g - gp).norm() > 1e-8 ? Vec3((gp - g).normalized()) : frame_along(g).col(0);
        const auto [e, f] = post_collision(c, d, {back.r, back.R, om});
        CHECK((e.v - a.v).norm() <= 1e-10 * std::max(1.0, a.v.norm()));
        CHECK((f.v - b.v).norm() <= 1e-10 * std::max(1.0, b.v.norm()));
        CHECK(std::abs(e.I - a.I) <= 1e-10 * std::max(1.0, a.I));
        CHECK(std::abs(f.I - b.I) <= 1e-10 * std::max(1.0, b.I));
    }
}

TEST_CASE("pre fractions") {
    const Fractions f = pre_fractions({Vec3(2, 0, 0), 1.0}, {Vec3::Zero(), 0.5});
    CHECK(f.R == doctest::Approx(0.4));
    CHECK(f.r == doctest::Approx(2.0 / 3.0));
    CHECK(pre_fractions({Vec3(1, 0, 0), 1.0}, {Vec3(1, 0, 0), 1.0}).R == 0.0);
    CHECK(pre_fractions({Vec3(1, 0, 0), 0.0}, {Vec3(0, 0, 0), 1.0}).r == 0.0);
    CHECK_THROWS_AS(pre_fractions({}, {}), DomainError);
}

TEST_CASE("sigma of omega") {
    const Vec3 g(0.3, -1.0, 2.0);
    const Vec3 gh = g.normalized();
    const SigmaParams sp = sigma_of_omega(g, gh);
    CHECK((sp.sigma + gh).norm() < 1e-14);
    CHECK(sp.weight == doctest::Approx(0.25));
    Sampler s(5, 1, 0);
    for (int i = 0; i < 100; ++i) {
        const Vec3 gg = s.normal3(), om = s.sphere();
        const SigmaParams q = sigma_of_omega(gg, om);
        CHECK(std::abs(std::abs(om.dot(gg.normalized())) - (q.sigma - gg.normalized()).norm() / 2.0) < 1e-12);
        CHECK(q.cos_abs == doctest::Approx(std::abs(om.dot(gg.normalized()))));
    }
    const SigmaParams singular = sigma_of_omega(Vec3(1, 0, 0), Vec3(0, 1, 0));
    CHECK(singular.singular);
    CHECK(std::isinf(singular.weight));
}

TEST_CASE("omega to sigma change of variables, sampled both ways") {
    // ∫ φ(T_ω ĝ) dω against ∫ φ(σ) dσ/|σ-ĝ|. With θ the angle between σ and ĝ the
    // second integrand is φ cos(θ/2) dθ dφ, sampled with θ = 2 asin(u).
    const Vec3 gh = Vec3(1.0, 2.0, -0.5).normalized();
    const Eigen::Matrix3d frame = frame_along(gh);
    const auto phi = [](const Vec3& x) { return x.z() * x.z(); };
    const std::uint64_t n = 1000000;
    const Estimate lhs = mc_estimate_scalar(n, 11, 1, [&](Sampler& s) { return 4.0 * std::numbers::pi * phi(reflect(gh, s.sphere())); });
    const Estimate rhs = mc_estimate_scalar(n, 11, 2, [&](Sampler& s) {
        const double th = 2.0 * std::asin(s.uniform());
        const double az = 2.0 * std::numbers::pi * s.uniform();
        const Vec3 local(std::sin(th) * std::cos(az), std::sin(th) * std::sin(az), std::cos(th));
        return 4.0 * std::numbers::pi * phi(frame * local);
    });
    CHECK(std::abs(z_score(lhs, rhs)) <= 3.0);
}

TEST_CASE("Borgnakke-Larsen Jacobian") {
    CHECK(bl_jacobian(0.25, 1.0) == doctest::Approx(3.0 / 128.0));
    CHECK(bl_jacobian(1.0, 7.0) == 0.0);
    CHECK(bl_jacobian(0.5, 4.0) == doctest::Approx(std::sqrt(0.5) * 0.5 * 32.0 / 16.0));
}

TEST_CASE("Borgnakke-Larsen change of variables, sampled on both charts") {
    // Fixed (v, I). F(G, E, v', I') integrated over the admissible set directly, and through
    // (v*, I*, r, R, σ) with the Jacobian J_T.
    const Vec3 v(0.4, -0.2, 0.1);
    const double I = 0.7;
    const auto F = [](const Vec3& G, double E, const Vec3& vp, double Ip) {
        return std::exp(-G.squaredNorm() - 1.5 * E - 0.3 * (vp - G).squaredNorm()) * (1.0 + Ip);
    };
    const std::uint64_t n = 1000000;
    const double pi = std::numbers::pi;
    const Estimate pre = mc_estimate_scalar(n, 21, 1, [&](Sampler& s) {
        // v* ~ N(0,1), I* ~ Exp(1), r, R ~ U(0,1), σ ~ U(S²).
        const Vec3 vs = s.normal3();
        const double Is = s.gamma(1.0);
        const double r = s.uniform(), R = s.uniform();
        const Vec3 sigma = s.sphere();
        const Vec3 G = 0.5 * (v + vs);
        const double E = 0.25 * (v - vs).squaredNorm() + I + Is;
        const Vec3 vp = G + std::sqrt(R * E) * sigma;
        const double Ip = r * (1.0 - R) * E;
        const double density = std::exp(-0.5 * vs.squaredNorm() - Is) / std::pow(2.0 * pi, 1.5) / (4.0 * pi);
        return F(G, E, vp, Ip) * bl_jacobian(R, E) / density;
    });
    const Estimate post = mc_estimate_scalar(n, 21, 2, [&](Sampler& s) {
        // G ~ N(v_mean, 1/2), E = I + |v-G|² + Exp(1), v' uniform in the ball of radius √E, I' uniform below E - |v'-G|².
        const Vec3 G = std::sqrt(0.5) * s.normal3();
        const double E = I + (v - G).squaredNorm() + s.gamma(1.0);
        const double rho = std::sqrt(E) * std::cbrt(s.uniform());
        const Vec3 vp = G + rho * s.sphere();
        const double room = E - (vp - G).squaredNorm();
        const double Ip = room * s.uniform();
        const double density = std::exp(-G.squaredNorm()) / std::pow(pi, 1.5) * std::exp(-(E - I - (v - G).squaredNorm())) /
                               (4.0 / 3.0 * pi * std::pow(E, 1.5)) / room;
        return F(G, E, vp, Ip) / density;
    });
    CHECK(std::abs(z_score(pre, post)) <= 3.0);
    CHECK(pre.value > 0.0);
}

TEST_CASE("h map jacobians") {
    CHECK(h_jacobian(Branch::K2, 0.5, 0.5) == doctest::Approx(32.0));
    CHECK(h_jacobian(Branch::K3, 0.5, 0.5) == doctest::Approx(32.0));
    CHECK(h_jacobian(Branch::K2, 0.25, 0.5) == doctest::Approx(8.0 / (0.75 * 0.5)));
    CHECK(h_jacobian(Branch::K3, 0.25, 0.5) == doctest::Approx(8.0 / (0.25 * 0.5)));
}

TEST_CASE("h map roundtrip and domain") {
    Sampler s(6, 1, 0);
    for (Branch b : {Branch::K2, Branch::K3}) {
        for (int i = 0; i < 100; ++i) {
            const HAnchor an{s.normal3(), s.gamma(1.5), s.uniform(), s.uniform(), s.sphere()};
            const ParticleState st{s.normal3(), s.gamma(1.5)};
            const HPoint p = h_map(b, an, st);
            CHECK(in_domain(b, an, p));
            const ParticleState back = h_inverse(b, an, p);
            CHECK((back.v - st.v).norm() <= 1e-10 * std::max(1.0, st.v.norm()));
            CHECK(std::abs(back.I - st.I) <= 1e-10 * std::max(1.0, st.I));
        }
    }
    // K2: y at or below (1-r)(1-R)I leaves no room for I*.
    const HAnchor an{Vec3(0.3, 0.1, 0.0), 2.0, 0.4, 0.3, Vec3::UnitZ()};
    const double a = h_scale(Branch::K2, an.r, an.R);
    const double y0 = an.I / a;
    CHECK_FALSE(in_domain(Branch::K2, an, {Vec3::Zero(), 0.5 * y0}));
    const Vec3 centre = an.v - std::sqrt(an.R * a * y0) * an.sigma;
    CHECK_FALSE(in_domain(Branch::K2, an, {centre, y0}));
    CHECK_THROWS_AS(h_inverse(Branch::K2, an, {Vec3::Zero(), 0.5 * y0}), DomainError);
}

TEST_CASE("in_domain agrees with the sign of the reconstructed I*") {
    Sampler s(7, 1, 0);
    int agree = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const Branch b = i % 2 ? Branch::K2 : Branch::K3;
        const HAnchor an{s.normal3(), s.gamma(1.5), s.uniform(), s.uniform(), s.sphere()};
        const HPoint p{2.0 * s.normal3(), 3.0 * s.gamma(1.0)};
        if (in_domain(b, an, p) == (h_inverse_raw(b, an, p).I > 0.0)) ++agree;
    }
    CHECK(agree == n);
}

TEST_CASE("frame along") {
    Sampler s(8, 1, 0);
    for (int i = 0; i < 50; ++i) {
        const Vec3 n = s.sphere();
        const Eigen::Matrix3d f = frame_along(n);
        CHECK((f.transpose() * f - Eigen::Matrix3d::Identity()).norm() < 1e-13);
        CHECK((f.col(2) - n).norm() < 1e-14);
        CHECK(f.determinant() == doctest::Approx(1.0));
    }
}
