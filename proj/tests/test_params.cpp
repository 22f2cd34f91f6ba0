#include "doctest.h"
#include "viab/params.hpp"

using namespace viab;

TEST_SUITE("params") {
    TEST_CASE("lists and matrices") {
        ParamMap p("model", {{"v", "1, -2.5, +3e-1"}, {"m", "1, 2; 3, 4"}, {"ms", "1, 0; 0, 1 | 0, 1; -1, 0"}});
        const Vec v = p.get_vec("v");
        REQUIRE(v.size() == 3);
        CHECK(v[1] == -2.5);
        CHECK(v[2] == 0.3);
        const Mat m = p.get_mat("m", 2, 2);
        CHECK(m(1, 0) == 3.0);
        const auto ms = p.get_mats("ms", 2, 2, 2);
        CHECK(ms[1](1, 0) == -1.0);
    }

    TEST_CASE("malformed values name the section and key") {
        ParamMap p("space", {{"mu", "1, x"}, {"m", "1.5"}});
        try {
            p.get_vec("mu");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            const std::string what = e.what();
            CHECK(what.find("space") != std::string::npos);
            CHECK(what.find("mu") != std::string::npos);
        }
        CHECK_THROWS_AS(p.get_int("m"), ConfigError);
        CHECK_THROWS_AS(p.get_double("missing"), ConfigError);
        CHECK(p.get_double("missing", 2.0) == 2.0);
    }

    TEST_CASE("matrix shape is checked") {
        ParamMap p("model", {{"B", "1, 2; 3"}});
        CHECK_THROWS_AS(p.get_mat("B", 2, 2), ConfigError);
    }
}
