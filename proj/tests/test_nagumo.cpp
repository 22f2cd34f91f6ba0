#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "viab/nagumo.hpp"

using namespace viab;
using fixtures::vec;

namespace {

const ConstraintSet kDisc = ConstraintSet::ball(1.0, vec({0.0, 0.0}));

Mat random_mat(std::mt19937_64& gen, int r, int c) {
    std::normal_distribution<double> nd;
    Mat a(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) a(i, j) = nd(gen);
    return a;
}

}  // namespace

TEST_SUITE("nagumo_checker") {
    TEST_CASE("tangential rotation with restoring drift") {
        const auto s = fixtures::plane();
        const auto r = check_smooth_point(s, fixtures::tangential_ball_model(s), kDisc, vec({1.0, 0.0}));
        CHECK(r.lhs_dn1 == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(r.dn2_norm == 0.0);
        CHECK(r.pass());
    }

    TEST_CASE("static system passes with zero margins") {
        const auto s = fixtures::plane();
        const auto m = CoefficientModel::make(s, ZeroDrift{}, ZeroNoise{}, 1.0);
        const auto r = check_smooth_point(s, m, kDisc, vec({1.0, 0.0}));
        CHECK(r.lhs_dn1 == 0.0);
        CHECK(r.dn2_norm == 0.0);
        CHECK(r.pass());
    }

    TEST_CASE("normal noise fails the second condition") {
        const auto s = fixtures::plane();
        const auto m = CoefficientModel::make(s, ZeroDrift{}, NormalNoise{1.0}, 1.0);
        const auto r = check_smooth_point(s, m, kDisc, vec({1.0, 0.0}));
        CHECK(r.dn2_norm == doctest::Approx(1.0).epsilon(1e-14));
        CHECK_FALSE(r.pass_dn2);
        CHECK_FALSE(r.pass());
    }

    TEST_CASE("off-boundary points are rejected") {
        const auto s = fixtures::plane();
        const auto m = fixtures::tangential_ball_model(s);
        CHECK_THROWS_AS(check_smooth_point(s, m, kDisc, vec({0.9, 0.0})), std::invalid_argument);
        CHECK_THROWS_AS(check_unit_ball_point(s, m, vec({1.0 + 1e-9, 0.0})), std::invalid_argument);
    }

    TEST_CASE("unit-ball form examples") {
        const auto s = fixtures::plane();
        const auto r = check_unit_ball_point(s, fixtures::tangential_ball_model(s), vec({0.0, 1.0}));
        CHECK(r.lhs_dn1 == doctest::Approx(-0.5).epsilon(1e-14));
        CHECK(r.dn2_norm == 0.0);
        CHECK(r.pass());

        const auto s2 = fixtures::plane(-2.0);
        const auto r2 = check_unit_ball_point(s2, fixtures::tangential_ball_model(s2), vec({1.0, 0.0}));
        const auto zero_drift = CoefficientModel::make(s2, ZeroDrift{}, TangentialRotation{1.0}, 1.0);
        const auto r3 = check_unit_ball_point(s2, zero_drift, vec({1.0, 0.0}));
        CHECK(r3.lhs_dn1 == doctest::Approx(-1.5).epsilon(1e-14));
        CHECK(r3.pass());
        CHECK(r2.lhs_dn1 < r3.lhs_dn1);

        const auto s3 = SpectralSpace::make(vec({0.0, 0.0}), 2, 1);
        const auto id = CoefficientModel::make(s3, ZeroDrift{}, ConstantNoise{Mat::Identity(2, 2)}, 1.0);
        const auto r4 = check_unit_ball_point(s3, id, vec({1.0, 0.0}));
        CHECK(r4.lhs_dn1 == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(r4.dn2_norm == doctest::Approx(1.0).epsilon(1e-14));
        CHECK_FALSE(r4.pass_dn1);
        CHECK_FALSE(r4.pass_dn2);
    }

    TEST_CASE("unit-ball form agrees with the smooth form") {
        std::mt19937_64 gen(21);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        const auto K = ConstraintSet::ball(1.0, vec({0.0, 0.0, 0.0}));
        for (int trial = 0; trial < 50; ++trial) {
            const auto s = SpectralSpace::make(vec({-2.0 * std::abs(u(gen)), u(gen), u(gen)}), 2, 1);
            LinearModel lin{random_mat(gen, 3, 1), {random_mat(gen, 3, 3), random_mat(gen, 3, 3)},
                            {random_mat(gen, 3, 1), random_mat(gen, 3, 1)}};
            auto m = make_linear_model(s, lin, 10.0);
            m.drift = LinearDrift{random_mat(gen, 3, 3), random_mat(gen, 3, 1)};
            Vec x = random_mat(gen, 3, 1);
            x.normalize();
            const Vec ctl = vec({u(gen)});
            const auto a = check_unit_ball_point(s, m, x, ctl);
            const auto b = check_smooth_point(s, m, K, x, ctl);
            CHECK(std::abs(a.lhs_dn1 - b.lhs_dn1) <= 1e-12 * std::max(1.0, std::abs(a.lhs_dn1)));
            CHECK((a.dn2 - b.dn2).norm() <= 1e-12 * std::max(1.0, a.dn2.norm()));
            CHECK(a.pass_dn1 == b.pass_dn1);
            CHECK(a.pass_dn2 == b.pass_dn2);
        }
    }

    TEST_CASE("rotation equivariance of the tangential family") {
        const auto s = fixtures::plane(-0.7);
        const auto m = fixtures::tangential_ball_model(s, 0.8);
        const auto base = check_smooth_point(s, m, kDisc, vec({1.0, 0.0}));
        for (int k = 1; k < 12; ++k) {
            const double a = 2.0 * std::numbers::pi * k / 12.0;
            const auto r = check_smooth_point(s, m, kDisc, vec({std::cos(a), std::sin(a)}));
            CHECK(std::abs(r.lhs_dn1 - base.lhs_dn1) <= 1e-10);
            CHECK(r.dn2_norm <= 1e-12);
        }
    }

    TEST_CASE("boundary certificates") {
        const auto s = fixtures::plane();
        const auto good = certify_boundary(s, fixtures::tangential_ball_model(s), kDisc, 256, 1);
        CHECK(good.passed);
        CHECK(good.samples == 256);
        CHECK(good.worst_dn1_margin <= -0.5 + 1e-8);

        const auto normal = certify_boundary(s, CoefficientModel::make(s, ZeroDrift{}, NormalNoise{1.0}, 1.0), kDisc, 64, 2);
        CHECK_FALSE(normal.passed);
        CHECK(normal.failures == 64);
        CHECK(certificate_json(normal).find("\"passed\": false") != std::string::npos);

        const auto s2 = fixtures::plane(-1.0);
        const auto still = certify_boundary(s2, CoefficientModel::make(s2, ZeroDrift{}, ZeroNoise{}, 1.0), kDisc, 32, 3);
        CHECK(still.passed);
        CHECK(still.worst_dn1_margin <= -1.0 + 1e-12);

        CHECK_THROWS_AS(certify_boundary(s, fixtures::tangential_ball_model(s), kDisc, 15, 1), std::invalid_argument);
    }

    TEST_CASE("a control grid can rescue the boundary") {
        const auto s = fixtures::plane();
        CustomDrift inward{"u x", [](const Vec& x, const Vec& u) { return Vec(u[0] * x); }};
        const auto m = CoefficientModel::make(s, inward, ZeroNoise{}, 1.0);
        CHECK_FALSE(certify_boundary(s, m, kDisc, 16, 4, ControlSet::singleton(vec({1.0}))).passed);
        const auto cert = certify_boundary(s, m, kDisc, 16, 4, ControlSet::box(vec({0.0}), vec({1.0}), 3));
        CHECK(cert.passed);
        for (const auto& p : cert.points) CHECK(p.control[0] == -1.0);
    }

    TEST_CASE("galerkin ladder with inactive modes is flat") {
        const auto s = SpectralSpace::make(vec({0.0, 0.0, -1.0, -2.0}), 2, 1);
        Mat g = Mat::Zero(4, 2);
        g(1, 0) = 0.5;
        const auto m = CoefficientModel::make(s, ConstantDrift{vec({-0.1, 0.0, 0.0, 0.0})}, ConstantNoise{g}, 1.0);
        const auto K = ConstraintSet::ball(1.0, Vec::Zero(4));
        ResidualSettings rs;
        rs.count = 4000;
        const auto cells = galerkin_ladder(s, m, K, {2, 3, 4}, {1, 2}, vec({1.0, 0.0, 0.0, 0.0}), 0.01, rs,
                                           ControlSet::singleton(vec({0.0})), 5);
        REQUIRE(cells.size() == 6);
        for (const auto& c : cells) {
            CHECK(c.residual.total > 0.0);
            CHECK(std::abs(c.residual.total - cells.front().residual.total) <= 3.0 * cells.front().residual.std_err);
        }
        CHECK(galerkin_csv(cells).rfind("l,m,total,std_err\n", 0) == 0);
    }

    TEST_CASE("galerkin ladder is bounded by the full model") {
        const auto s = SpectralSpace::make(vec({0.0, 0.0, -1.0, -1.0}), 2, 1);
        const auto m = CoefficientModel::make(s, RadialRestoring{1.0}, TangentialRotation{1.0}, 1.0);
        const auto K = ConstraintSet::ball(1.0, Vec::Zero(4));
        ResidualSettings rs;
        rs.count = 4000;
        const Vec xi = vec({0.6, 0.0, 0.8, 0.0});
        const auto cells = galerkin_ladder(s, m, K, {1, 2, 3, 4}, {1, 2}, xi, 0.01, rs, ControlSet::singleton(vec({0.0})), 6);
        const auto& full = cells.back();
        REQUIRE(full.l == 4);
        REQUIRE(full.m == 2);
        for (const auto& c : cells) CHECK(c.residual.total <= full.residual.total + 3.0 * full.residual.std_err);
    }

    TEST_CASE("galerkin ladder with normal noise keeps the half-moment plateau") {
        const auto s = SpectralSpace::make(vec({0.0, 0.0, 0.0}), 2, 1);
        const double sigma = 0.5;
        const auto m = CoefficientModel::make(s, ZeroDrift{}, NormalNoise{sigma}, 1.0);
        const auto K = ConstraintSet::ball(1.0, Vec::Zero(3));
        ResidualSettings rs;
        rs.count = 20000;
        rs.policy = EtaPolicy::projection;
        const auto cells = galerkin_ladder(s, m, K, {1, 2, 3}, {1, 2}, vec({1.0, 0.0, 0.0}), 1e-3, rs,
                                           ControlSet::singleton(vec({0.0})), 7);
        for (const auto& c : cells) CHECK(c.residual.term_gap == doctest::Approx(0.5 * sigma * sigma).epsilon(0.05));
    }

    TEST_CASE("projection validates its indices") {
        const auto s = fixtures::plane();
        const auto m = fixtures::tangential_ball_model(s);
        CHECK_THROWS_AS(galerkin_projection(s, m, 0, 1), std::invalid_argument);
        CHECK_THROWS_AS(galerkin_projection(s, m, 3, 1), std::invalid_argument);
        CHECK_THROWS_AS(galerkin_projection(s, m, 2, 2), std::invalid_argument);
        const auto p = galerkin_projection(s, m, 1, 1);
        const Vec f = eval_drift(p, vec({0.3, 0.4}), vec({0.0}));
        CHECK(f[1] == 0.0);
        CHECK(f[0] == doctest::Approx(-0.3));
    }
}
