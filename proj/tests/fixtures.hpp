#pragma once

#include <cmath>
#include <functional>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/spectral.hpp"

namespace fixtures {

using viab::Vec;
using viab::Mat;

inline Vec vec(std::initializer_list<double> v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

/// A = diag(mu), F(x) = -x, tangential-rotation noise with sigma.
inline viab::CoefficientModel tangential_ball_model(const viab::SpectralSpace& space, double sigma = 1.0) {
    return viab::CoefficientModel::make(space, viab::RadialRestoring{1.0}, viab::TangentialRotation{sigma}, 1.0);
}

inline viab::SpectralSpace plane(double mu = 0.0) { return viab::SpectralSpace::make(vec({mu, mu}), 1, 1); }

/// Composite Simpson rule on [a, b].
inline double simpson(const std::function<double(double)>& f, double a, double b, int intervals = 2000) {
    const double h = (b - a) / intervals;
    double s = f(a) + f(b);
    for (int i = 1; i < intervals; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace fixtures
