#include <cmath>
#include <set>

#include "doctest.h"
#include "viab/parallel.hpp"
#include "viab/rng.hpp"

using namespace viab;

TEST_SUITE("rng") {
    TEST_CASE("philox known-answer vectors") {
        const auto a = philox4x32({0, 0, 0, 0}, {0, 0});
        CHECK(a == std::array<std::uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
        const auto b = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
        CHECK(b == std::array<std::uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
        const auto c = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
        CHECK(c == std::array<std::uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
    }

    TEST_CASE("same address gives the same sequence") {
        RngStream a(42, StreamDomain::integrate, 7, 3);
        RngStream b(42, StreamDomain::integrate, 7, 3);
        for (int i = 0; i < 100; ++i) CHECK(a.normal() == b.normal());
    }

    TEST_CASE("distinct addresses give distinct sequences") {
        std::set<double> firsts;
        for (std::uint64_t stream = 0; stream < 8; ++stream)
            for (std::uint64_t sub = 0; sub < 8; ++sub)
                firsts.insert(RngStream(1, StreamDomain::residual, stream, sub).uniform());
        firsts.insert(RngStream(2, StreamDomain::residual, 0, 0).uniform());
        firsts.insert(RngStream(1, StreamDomain::builder, 0, 0).uniform());
        firsts.insert(RngStream(1, StreamDomain::residual, 0, std::uint64_t{1} << 40).uniform());
        CHECK(firsts.size() == 67);
    }

    TEST_CASE("uniforms lie strictly inside the unit interval with the right moments") {
        RngStream r(9, StreamDomain::probe, 0, 0);
        const int n = 200000;
        double sum = 0.0, sq = 0.0;
        for (int i = 0; i < n; ++i) {
            const double u = r.uniform();
            REQUIRE(u > 0.0);
            REQUIRE(u < 1.0);
            sum += u;
            sq += u * u;
        }
        CHECK(std::abs(sum / n - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
        CHECK(std::abs(sq / n - 1.0 / 3.0) < 0.005);
    }

    TEST_CASE("normals have unit variance and vanishing odd moments") {
        RngStream r(10, StreamDomain::probe, 1, 0);
        const int n = 200000;
        double m1 = 0.0, m2 = 0.0, m3 = 0.0, m4 = 0.0;
        for (int i = 0; i < n; ++i) {
            const double z = r.normal();
            m1 += z;
            m2 += z * z;
            m3 += z * z * z;
            m4 += z * z * z * z;
        }
        CHECK(std::abs(m1 / n) < 4.0 / std::sqrt(n));
        CHECK(std::abs(m2 / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
        CHECK(std::abs(m3 / n) < 4.0 * std::sqrt(15.0 / n));
        CHECK(std::abs(m4 / n - 3.0) < 4.0 * std::sqrt(96.0 / n));
    }

    TEST_CASE("parallel_for covers every index once and reports the lowest failing index") {
        set_thread_count(4);
        std::vector<int> hits(1000, 0);
        parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
        for (int h : hits) CHECK(h == 1);
        try {
            parallel_for(1000, [](std::size_t i) {
                if (i % 300 == 299) throw std::runtime_error(std::to_string(i));
            });
            FAIL("expected an exception");
        } catch (const std::runtime_error& e) {
            CHECK(std::string(e.what()) == "299");
        }
        set_thread_count(1);
    }
}
