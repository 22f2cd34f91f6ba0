#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "viab/constraint.hpp"

using namespace viab;
using fixtures::vec;

namespace {

ConstraintSet unit_levelset() {
    return ConstraintSet::level_set(ellipsoid_function(vec({0.0, 0.0}), vec({1.0, 1.0}), 1.0, 1.0), vec({0.0, 0.0}));
}

ConstraintSet tilted_ellipse() {
    return ConstraintSet::level_set(ellipsoid_function(vec({0.5, -0.2}), vec({1.0, 4.0}), 1.5, 0.5),
                                    vec({0.5, -0.2}));
}

}  // namespace

TEST_SUITE("constraint_sets") {
    TEST_CASE("projection examples") {
        const auto ball = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
        const auto p = project(ball, vec({2.0, 0.0}));
        CHECK((p.point - vec({1.0, 0.0})).norm() == 0.0);
        CHECK(p.distance == 1.0);
        const auto q = project(ball, vec({0.5, 0.0}));
        CHECK((q.point - vec({0.5, 0.0})).norm() == 0.0);
        CHECK(q.distance == 0.0);
        const auto half = ConstraintSet::half_space(vec({0.0, 1.0}), 0.0);
        const auto r = project(half, vec({3.0, 2.0}));
        CHECK((r.point - vec({3.0, 0.0})).norm() == 0.0);
        CHECK(r.distance == 2.0);
    }

    TEST_CASE("distance examples") {
        const auto ball = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
        CHECK(distance(ball, vec({0.1, 0.2})) == 0.0);
        CHECK(distance(ball, vec({0.0, 3.0})) == 2.0);
        CHECK(distance(unit_levelset(), vec({2.0, 0.0})) == doctest::Approx(1.0).epsilon(1e-8));
    }

    TEST_CASE("level-set projection matches the closed-form ball projection") {
        std::mt19937_64 gen(4);
        std::normal_distribution<double> nd(0.0, 2.0);
        const auto ball = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
        const auto ls = unit_levelset();
        for (int i = 0; i < 200; ++i) {
            const Vec x = vec({nd(gen), nd(gen)});
            const auto a = project(ball, x);
            const auto b = project(ls, x);
            CHECK(b.converged);
            CHECK((a.point - b.point).norm() <= 1e-8);
        }
    }

    TEST_CASE("projection is idempotent and nonexpansive on convex sets") {
        std::mt19937_64 gen(8);
        std::normal_distribution<double> nd(0.0, 3.0);
        const std::vector<ConstraintSet> sets = {ConstraintSet::ball(1.5, vec({0.3, -0.4})),
                                                 ConstraintSet::half_space(vec({1.0, 2.0}), 0.5), tilted_ellipse()};
        for (const auto& k : sets) {
            CHECK(k.convex());
            for (int i = 0; i < 100; ++i) {
                const Vec x = vec({nd(gen), nd(gen)});
                const Vec y = vec({nd(gen), nd(gen)});
                const Vec px = project(k, x).point;
                const Vec py = project(k, y).point;
                CHECK((project(k, px).point - px).norm() <= 1e-10);
                CHECK((px - py).norm() <= (x - y).norm() + 1e-10);
                CHECK(k.contains(px));
            }
        }
    }

    TEST_CASE("distance vanishes exactly on members") {
        std::mt19937_64 gen(12);
        std::normal_distribution<double> nd(0.0, 1.0);
        const auto k = tilted_ellipse();
        for (int i = 0; i < 200; ++i) {
            const Vec x = vec({nd(gen), nd(gen)});
            CHECK((distance(k, x) == 0.0) == k.contains(x));
        }
    }

    TEST_CASE("non-finite input is rejected") {
        const auto ball = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
        CHECK_THROWS(project(ball, vec({std::nan(""), 0.0})));
    }

    TEST_CASE("boundary samples") {
        const auto ball = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
        const auto one = boundary_sample(ball, 1, 5);
        CHECK(one[0].norm() == doctest::Approx(1.0).epsilon(1e-12));

        const auto half = ConstraintSet::half_space(vec({1.0, -2.0}), 0.7);
        for (const auto& x : boundary_sample(half, 50, 5)) CHECK(std::abs(vec({1.0, -2.0}).dot(x) - 0.7) <= 1e-12);

        const auto a = boundary_sample(ball, 64, 11);
        const auto b = boundary_sample(unit_levelset(), 64, 11);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(b[i].norm() - 1.0) <= 1e-10);
            CHECK((a[i] - b[i]).norm() <= 1e-9);
        }

        const auto again = boundary_sample(ball, 64, 11);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK((a[i] - again[i]).norm() == 0.0);
    }

    TEST_CASE("level-set boundary points lie on the zero level") {
        const auto k = tilted_ellipse();
        const auto phi = k.smooth();
        for (const auto& x : boundary_sample(k, 100, 3)) CHECK(std::abs(phi.value(x)) <= 1e-10);
    }

    TEST_CASE("level-set anchor must be interior") {
        CHECK_THROWS(ConstraintSet::level_set(ellipsoid_function(vec({0.0}), vec({1.0}), 1.0, 1.0), vec({2.0})));
    }

    TEST_CASE("smooth descriptions") {
        const auto ball = ConstraintSet::ball(2.0, vec({1.0, 0.0}));
        const auto phi = ball.smooth();
        CHECK(phi.value(vec({3.0, 0.0})) == doctest::Approx(0.0));
        CHECK((phi.gradient(vec({3.0, 0.0})) - vec({2.0, 0.0})).norm() == 0.0);
        CHECK((phi.hessian(vec({0.0, 0.0})) - Mat::Identity(2, 2)).norm() == 0.0);
        const auto half = ConstraintSet::half_space(vec({0.0, 2.0}), 1.0).smooth();
        CHECK(half.value(vec({5.0, 0.5})) == 0.0);
        CHECK(half.hessian(vec({5.0, 0.5})).norm() == 0.0);
    }

    TEST_CASE("configuration") {
        const auto k = build_constraint(2, ParamMap("constraint", {{"variant", "ball"}, {"radius", "2"}}));
        CHECK(k.kind() == "ball");
        CHECK(k.contains(vec({1.9, 0.0})));
        CHECK_THROWS_AS(build_constraint(2, ParamMap("constraint", {{"variant", "torus"}})), ConfigError);
        CHECK_THROWS_AS(build_constraint(3, ParamMap("constraint", {{"variant", "halfspace"}, {"normal", "1, 0"}})),
                        ConfigError);
    }
}
