#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "viab/approx.hpp"

using namespace viab;
using fixtures::vec;

namespace {

const ConstraintSet kDisc = ConstraintSet::ball(1.0, vec({0.0, 0.0}));
const ControlSet kNoControl = ControlSet::singleton(vec({0.0}));

ApproxMildSolution tangential(double eps, double T = 0.5, int paths = 32, std::uint64_t seed = 5) {
    const auto s = fixtures::plane(-1.0);
    return build_approx_solution(s, fixtures::tangential_ball_model(s, 0.5), kDisc, vec({1.0, 0.0}), eps, T,
                                 kNoControl, paths, seed);
}

}  // namespace

TEST_SUITE("approx_builder") {
    TEST_CASE("deterministic interior flow needs no correction") {
        const auto s = fixtures::plane(-0.5);
        const auto m = CoefficientModel::make(s, ZeroDrift{}, ZeroNoise{}, 1.0);
        const auto sol = build_approx_solution(s, m, kDisc, vec({0.2, 0.1}), 0.1, 0.5, kNoControl, 4, 1);
        REQUIRE(sol.ok());
        for (const auto& q : sol.corrections) CHECK(q.norm() == 0.0);
        for (const auto& st : sol.steps) {
            CHECK(st.residual == 0.0);
            CHECK(st.delta == doctest::Approx(0.1 / 8.0));
        }
        CHECK(sol.Y.back()(0, 0) == doctest::Approx(0.2 * std::exp(-0.25)).epsilon(1e-12));
        CHECK(audit_solution(sol).pass());
    }

    TEST_CASE("tangential model builds and satisfies the audit") {
        const auto sol = tangential(0.1);
        REQUIRE(sol.ok());
        CHECK(sol.times.back() == 0.5);
        const auto audit = audit_solution(sol);
        CHECK(audit.pass());
        for (const auto& c : audit.clauses) CHECK(c.margin >= 0.0);
        for (const auto& st : sol.steps) CHECK(st.residual <= 0.1 / 8.0);
        CHECK(theta_nonexpansive_check(sol));
        CHECK(second_moment_sup(sol) <= 1.0 + 1e-10);
    }

    TEST_CASE("smaller epsilon gives smaller gaps and correction energies") {
        double prev_gap = INFINITY;
        double prev_energy = INFINITY;
        const auto s = fixtures::plane();
        const auto m = CoefficientModel::make(s, RadialRestoring{0.5}, TangentialRotation{1.0}, 1.0);
        for (double eps : {0.2, 0.1, 0.05}) {
            const auto sol = build_approx_solution(s, m, kDisc, vec({1.0, 0.0}), eps, 0.25, kNoControl, 16, 4);
            REQUIRE(sol.ok());
            const auto audit = audit_solution(sol);
            CHECK(audit.pass());
            const double energy = audit.clause("c").value + audit.clause("d").value;
            CHECK(audit.clause("g").value < prev_gap);
            CHECK(energy < prev_energy);
            prev_gap = audit.clause("g").value;
            prev_energy = energy;
        }
    }

    TEST_CASE("step statistics satisfy the budget identity") {
        const auto sol = tangential(0.1, 0.25);
        REQUIRE(sol.ok());
        for (const auto& st : sol.steps) {
            CHECK(st.residual == doctest::Approx(st.mean_corr_sq / st.delta + st.phi_norm_sq).epsilon(1e-10));
            CHECK(st.residual == doctest::Approx(st.psi_energy + (1.0 + st.delta) * st.phi_norm_sq).epsilon(1e-10));
        }
    }

    TEST_CASE("radial noise fails at the first node") {
        const auto s = fixtures::plane(-1.0);
        const auto m = CoefficientModel::make(s, ZeroDrift{}, NormalNoise{1.0}, 1.0);
        const auto sol = build_approx_solution(s, m, kDisc, vec({1.0, 0.0}), 0.1, 0.5, kNoControl, 16, 2);
        REQUIRE_FALSE(sol.ok());
        CHECK(sol.failure->node == 0);
        CHECK(sol.failure->residual > sol.failure->threshold);
        CHECK(sol.failure->message.find("quasi-tangency violated at node 0") == 0);
        CHECK(sol.steps.empty());
    }

    TEST_CASE("inflated drift correction fails clause c") {
        auto sol = tangential(0.1, 0.25);
        REQUIRE(sol.ok());
        for (auto& st : sol.steps) st.phi_norm_sq += 1.0;
        const auto audit = audit_solution(sol);
        CHECK_FALSE(audit.pass());
        CHECK_FALSE(audit.clause("c").pass);
        CHECK(audit.clause("c").margin < 0.0);
        CHECK(audit.clause("d").pass);
    }

    TEST_CASE("a state outside K fails clause g at that node") {
        auto sol = tangential(0.1, 0.25);
        REQUIRE(sol.ok());
        sol.Y[3](0, 0) = 1.5;
        sol.Y[3](0, 1) = 0.0;
        const auto audit = audit_solution(sol);
        const auto& g = audit.clause("g");
        CHECK_FALSE(g.pass);
        CHECK(g.node == 3);
        CHECK(g.detail.find("t_3") != std::string::npos);
    }

    TEST_CASE("overlong step fails clause a") {
        auto sol = tangential(0.1, 0.25);
        REQUIRE(sol.ok());
        sol.times[2] = sol.times[1] + 0.2;
        const auto audit = audit_solution(sol);
        const auto& a = audit.clause("a");
        CHECK_FALSE(a.pass);
        CHECK(a.node == 1);
    }

    TEST_CASE("theta records") {
        const auto sol = tangential(0.1, 0.25);
        REQUIRE(sol.theta.size() == sol.steps.size());
        for (const auto& rec : sol.theta)
            for (std::size_t j = 0; j < rec.s.size(); ++j) CHECK(rec.offset[j] >= 0.0);
        ThetaRecord bad;
        bad.s = {0.1, 0.2};
        bad.offset = {0.0, 0.3};
        CHECK_FALSE(theta_nonexpansive_check(std::vector<ThetaRecord>{bad}));
        ThetaRecord good;
        good.s = {0.1, 0.2, 0.4};
        good.offset = {0.0, 0.1, 0.3};
        CHECK(theta_nonexpansive_check(std::vector<ThetaRecord>{good}));
    }

    TEST_CASE("sigma is the left grid point") {
        const auto sol = tangential(0.1, 0.25);
        CHECK(sol.sigma(0.0) == 0.0);
        CHECK(sol.sigma(sol.times[2] + 1e-6) == sol.times[2]);
        CHECK(sol.sigma(sol.times[2]) == sol.times[2]);
    }

    TEST_CASE("builder is reproducible and seed dependent") {
        const auto a = tangential(0.1, 0.25, 8, 9);
        const auto b = tangential(0.1, 0.25, 8, 9);
        const auto c = tangential(0.1, 0.25, 8, 10);
        CHECK(solution_csv(a) == solution_csv(b));
        CHECK(a.Y.back() == b.Y.back());
        CHECK(a.Y.back() != c.Y.back());
    }

    TEST_CASE("invalid inputs") {
        const auto s = fixtures::plane();
        const auto m = fixtures::tangential_ball_model(s);
        CHECK_THROWS_AS(build_approx_solution(s, m, kDisc, vec({1.0, 0.0}), 0.0, 1.0, kNoControl, 4, 1), std::invalid_argument);
        CHECK_THROWS_AS(build_approx_solution(s, m, kDisc, vec({1.0, 0.0}), 0.1, -1.0, kNoControl, 4, 1), std::invalid_argument);
        CHECK_THROWS_AS(build_approx_solution(s, m, kDisc, vec({2.0, 0.0}), 0.1, 1.0, kNoControl, 4, 1), std::invalid_argument);
    }
}
