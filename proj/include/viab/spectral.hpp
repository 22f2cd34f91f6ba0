#pragma once

#include "viab/types.hpp"

namespace viab {

/// Spectral truncation of the state space: n modes with A = diag(mu),
/// m noise directions and d control coordinates.
struct SpectralSpace {
    Vec mu;
    int m = 1;
    int d = 1;

    static SpectralSpace make(Vec mu, int m, int d);

    int n() const { return static_cast<int>(mu.size()); }
    bool has_unstable_mode() const { return mu.size() > 0 && mu.maxCoeff() > 0.0; }
};

/// A Hilbert-Schmidt operator Xi -> H in the truncation: an n x m matrix whose
/// column j is the image of the j-th noise direction.
struct HSOperator {
    Mat entries;

    HSOperator() = default;
    explicit HSOperator(Mat e) : entries(std::move(e)) {}
    static HSOperator zero(int n, int m) { return HSOperator(Mat::Zero(n, m)); }

    int rows() const { return static_cast<int>(entries.rows()); }
    int cols() const { return static_cast<int>(entries.cols()); }
};

double hs_norm(const HSOperator& g);

/// S(t)x, componentwise exp(mu_k t) x_k.
Vec semigroup_apply(const SpectralSpace& space, double t, const Vec& x);

/// (e^z - 1)/z, continuous at z = 0.
double expm1_ratio(double z);

/// Integral over [0,h] of S(r) v dr.
Vec drift_convolution(const SpectralSpace& space, double h, const Vec& v);

/// Covariance of the stochastic convolution over a step of length h with
/// frozen coefficient g.
Mat noise_covariance(const SpectralSpace& space, double h, const HSOperator& g);

/// Lower factor L with L L^T = cov. Cholesky with relative jitter first;
/// throws DegenerateCovariance when that fails.
Mat cholesky_factor(const Mat& cov);

/// Square-root factor with eigendecomposition fallback (negative eigenvalues
/// clamped to zero). Never throws for finite symmetric input.
Mat sampling_factor(const Mat& cov);

}  // namespace viab
