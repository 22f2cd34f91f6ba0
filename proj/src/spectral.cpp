#include "viab/spectral.hpp"

#include <cmath>

namespace viab {

namespace {
constexpr double kSeriesThreshold = 1e-8;
constexpr double kJitter = 1e-12;
}  // namespace

SpectralSpace SpectralSpace::make(Vec mu, int m, int d) {
    if (mu.size() < 1) throw ConfigError("spectral_core: state dimension n must be >= 1");
    if (m < 1) throw ConfigError("spectral_core: noise dimension m must be >= 1");
    if (d < 1) throw ConfigError("spectral_core: control dimension d must be >= 1");
    if (!mu.allFinite()) throw ConfigError("spectral_core: eigenvalues mu must be finite");
    SpectralSpace s;
    s.mu = std::move(mu);
    s.m = m;
    s.d = d;
    return s;
}

double hs_norm(const HSOperator& g) { return g.entries.norm(); }

Vec semigroup_apply(const SpectralSpace& space, double t, const Vec& x) {
    if (!(t >= 0.0)) throw std::invalid_argument("semigroup_apply: negative time");
    return (space.mu.array() * t).exp() * x.array();
}

double expm1_ratio(double z) {
    if (std::abs(z) < kSeriesThreshold) return 1.0 + z / 2.0 + z * z / 6.0;
    return std::expm1(z) / z;
}

Vec drift_convolution(const SpectralSpace& space, double h, const Vec& v) {
    if (!(h > 0.0)) throw std::invalid_argument("drift_convolution: h must be positive");
    Vec out(v.size());
    for (Eigen::Index k = 0; k < v.size(); ++k) out[k] = h * expm1_ratio(space.mu[k] * h) * v[k];
    return out;
}

Mat noise_covariance(const SpectralSpace& space, double h, const HSOperator& g) {
    if (!(h > 0.0)) throw std::invalid_argument("noise_covariance: h must be positive");
    const Mat ggt = g.entries * g.entries.transpose();
    const auto n = ggt.rows();
    Mat c(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k <= j; ++k) {
            const double v = ggt(j, k) * h * expm1_ratio((space.mu[j] + space.mu[k]) * h);
            c(j, k) = v;
            c(k, j) = v;
        }
    }
    return c;
}

Mat cholesky_factor(const Mat& cov) {
    const auto n = cov.rows();
    if (cov.isZero(0.0)) return Mat::Zero(n, n);
    const double jitter = kJitter * std::max(cov.trace(), 0.0);
    Mat a = cov;
    a.diagonal().array() += jitter;
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw DegenerateCovariance("noise covariance is not positive definite");
    Mat l = llt.matrixL();
    if (!l.allFinite()) throw DegenerateCovariance("noise covariance factor is not finite");
    return l;
}

Mat sampling_factor(const Mat& cov) {
    try {
        return cholesky_factor(cov);
    } catch (const DegenerateCovariance&) {
        Eigen::SelfAdjointEigenSolver<Mat> eig(cov);
        const Vec root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        return eig.eigenvectors() * root.asDiagonal();
    }
}

}  // namespace viab
