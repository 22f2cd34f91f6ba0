#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "viab/spectral.hpp"

using namespace viab;
using fixtures::vec;

TEST_SUITE("spectral_core") {
    TEST_CASE("semigroup at t = 0 is the identity") {
        const auto s = SpectralSpace::make(vec({-1.0, -3.0, 2.0}), 1, 1);
        const Vec x = vec({0.3, -1.2, 7.0});
        CHECK((semigroup_apply(s, 0.0, x) - x).norm() == 0.0);
    }

    TEST_CASE("zero generator leaves states fixed") {
        const auto s = SpectralSpace::make(vec({0.0, 0.0}), 1, 1);
        CHECK((semigroup_apply(s, 5.0, vec({1.0, 2.0})) - vec({1.0, 2.0})).norm() == 0.0);
    }

    TEST_CASE("decaying modes at t = ln 2") {
        const auto s = SpectralSpace::make(vec({-1.0, -2.0}), 1, 1);
        const Vec y = semigroup_apply(s, std::log(2.0), vec({1.0, 1.0}));
        CHECK(y[0] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(y[1] == doctest::Approx(0.25).epsilon(1e-15));
    }

    TEST_CASE("negative time is rejected") {
        const auto s = SpectralSpace::make(vec({-1.0}), 1, 1);
        CHECK_THROWS_AS(semigroup_apply(s, -0.1, vec({1.0})), std::invalid_argument);
    }

    TEST_CASE("semigroup law") {
        std::mt19937_64 gen(3);
        std::uniform_real_distribution<double> u(-2.0, 2.0);
        for (int trial = 0; trial < 50; ++trial) {
            const auto s = SpectralSpace::make(vec({u(gen), u(gen), u(gen)}), 1, 1);
            const Vec x = vec({u(gen), u(gen), u(gen)});
            const double t = std::abs(u(gen)), r = std::abs(u(gen));
            const Vec a = semigroup_apply(s, t + r, x);
            const Vec b = semigroup_apply(s, t, semigroup_apply(s, r, x));
            CHECK((a - b).norm() <= 1e-12 * std::max(1.0, a.norm()));
        }
    }

    TEST_CASE("drift convolution closed forms") {
        const auto zero = SpectralSpace::make(vec({0.0}), 1, 1);
        CHECK(drift_convolution(zero, 0.5, vec({2.0}))[0] == doctest::Approx(1.0).epsilon(1e-15));
        const auto decay = SpectralSpace::make(vec({-1.0}), 1, 1);
        const double quad = fixtures::simpson([](double r) { return std::exp(-r); }, 0.0, 1.0);
        CHECK(drift_convolution(decay, 1.0, vec({1.0}))[0] == doctest::Approx(quad).epsilon(1e-12));
        CHECK(drift_convolution(decay, 1.0, vec({0.0}))[0] == 0.0);
    }

    TEST_CASE("drift convolution is continuous across the degenerate eigenvalue") {
        for (double mu : {1e-9, -1e-9, 1e-7, -1e-7}) {
            const auto s = SpectralSpace::make(vec({mu}), 1, 1);
            const double h = 0.5;
            const double expect = h * (1.0 + 0.5 * mu * h);
            CHECK(drift_convolution(s, h, vec({1.0}))[0] == doctest::Approx(expect).epsilon(1e-14));
        }
    }

    TEST_CASE("drift convolution short-time consistency") {
        const auto s = SpectralSpace::make(vec({-3.0, 0.5}), 1, 1);
        const Vec v = vec({1.0, -2.0});
        for (double h : {1e-3, 1e-5}) {
            const Vec d = drift_convolution(s, h, v) / h;
            for (int k = 0; k < 2; ++k) CHECK(std::abs(d[k] - v[k]) <= std::abs(s.mu[k]) * h * std::abs(v[k]));
        }
    }

    TEST_CASE("noise covariance closed forms") {
        const auto zero = SpectralSpace::make(vec({0.0, 0.0}), 2, 1);
        const Mat c = noise_covariance(zero, 0.3, HSOperator(Mat::Identity(2, 2)));
        CHECK((c - 0.3 * Mat::Identity(2, 2)).norm() <= 1e-15);

        const auto ou = SpectralSpace::make(vec({-1.0}), 1, 1);
        const double quad = fixtures::simpson([](double r) { return std::exp(-2.0 * r); }, 0.0, 1.0);
        CHECK(noise_covariance(ou, 1.0, HSOperator(Mat::Ones(1, 1)))(0, 0) == doctest::Approx(quad).epsilon(1e-12));
        CHECK(quad == doctest::Approx(0.43233).epsilon(1e-5));

        CHECK(noise_covariance(ou, 1.0, HSOperator::zero(1, 1)).norm() == 0.0);
    }

    TEST_CASE("degenerate pair sums give h g g^T exactly") {
        const auto s = SpectralSpace::make(vec({1.0, -1.0}), 2, 1);
        Mat g(2, 2);
        g << 0.7, -0.2, 0.4, 1.1;
        const double h = 0.37;
        const Mat c = noise_covariance(s, h, HSOperator(g));
        const Mat ggt = g * g.transpose();
        CHECK(c(0, 1) == h * ggt(0, 1));
        CHECK(c(1, 0) == h * ggt(1, 0));
    }

    TEST_CASE("noise covariance is symmetric PSD and consistent at short times") {
        std::mt19937_64 gen(5);
        std::normal_distribution<double> nd;
        for (int trial = 0; trial < 30; ++trial) {
            const auto s = SpectralSpace::make(vec({nd(gen), nd(gen), nd(gen)}), 2, 1);
            Mat g(3, 2);
            for (int i = 0; i < 6; ++i) g.data()[i] = nd(gen);
            const double h = 0.1 + std::abs(nd(gen));
            const Mat c = noise_covariance(s, h, HSOperator(g));
            CHECK((c - c.transpose()).norm() == 0.0);
            Eigen::SelfAdjointEigenSolver<Mat> es(c);
            CHECK(es.eigenvalues().minCoeff() >= -1e-10 * c.trace());
            for (double hs : {1e-3, 1e-5}) {
                const Mat r = noise_covariance(s, hs, HSOperator(g)) / hs;
                const Mat ggt = g * g.transpose();
                for (int j = 0; j < 3; ++j)
                    for (int k = 0; k < 3; ++k)
                        CHECK(std::abs(r(j, k) - ggt(j, k)) <=
                              std::abs(s.mu[j] + s.mu[k]) * hs * std::abs(ggt(j, k)) + 1e-15);
            }
        }
    }

    TEST_CASE("hs norm") {
        CHECK(hs_norm(HSOperator::zero(2, 3)) == 0.0);
        CHECK(hs_norm(HSOperator(Mat::Identity(2, 2))) == doctest::Approx(std::sqrt(2.0)));
        Mat m(2, 2);
        m << 3, 0, 0, 4;
        CHECK(hs_norm(HSOperator(m)) == doctest::Approx(5.0));
    }

    TEST_CASE("factors reproduce the covariance") {
        Mat pd(2, 2);
        pd << 2.0, 0.5, 0.5, 1.0;
        const Mat l = cholesky_factor(pd);
        CHECK((l * l.transpose() - pd).norm() <= 1e-10);

        Mat rank1(2, 2);
        rank1 << 1.0, 1.0, 1.0, 1.0;
        const Mat f = sampling_factor(rank1);
        CHECK((f * f.transpose() - rank1).norm() <= 1e-10);

        Mat indefinite(2, 2);
        indefinite << 1.0, 0.0, 0.0, -1.0;
        CHECK_THROWS_AS(cholesky_factor(indefinite), DegenerateCovariance);
        const Mat clamp = sampling_factor(indefinite);
        CHECK((clamp * clamp.transpose() - Mat(Vec(vec({1.0, 0.0})).asDiagonal())).norm() <= 1e-12);
    }
}
