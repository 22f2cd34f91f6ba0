#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "viab/model.hpp"
#include "viab/rng.hpp"
#include "viab/spectral.hpp"

namespace viab {

/// Exact Gaussian law of one frozen-coefficient step
/// zeta = S(h)xi + int S(h-r) f(xi,u) dr + int S(h-r) g(xi,u) dW_r.
struct OneStepLaw {
    Vec mean;
    Mat covariance;
    Mat factor;  ///< factor * factor^T = covariance
    double h = 0.0;
    Vec control;
};

OneStepLaw one_step_law(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi, const Vec& u,
                        double h);

/// Address of a family of substreams; substream i feeds sample i (or step i).
struct StreamAddress {
    std::uint64_t seed = 0;
    StreamDomain domain = StreamDomain::residual;
    std::uint64_t stream = 0;
};

/// count x dim standard normals, row i drawn from substream i.
Mat standard_normals(const StreamAddress& addr, int count, int dim);

/// Rows are mean + factor * z_i for the rows z_i of `normals`.
Mat apply_law(const OneStepLaw& law, const Mat& normals);

/// count x n realizations of zeta.
Mat sample_one_step(const OneStepLaw& law, int count, const StreamAddress& addr);

using Strategy = std::function<Vec(double t, const Vec& x)>;

struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;
    std::vector<Vec> controls;
    std::uint64_t seed = 0;
    std::uint64_t path_id = 0;
};

/// Blow-up threshold on |X|.
inline constexpr double kBlowUp = 1e12;

/// Number of steps of length dt covering [t0, T]; rejects dt that does not
/// divide T - t0 within 1e-12.
int step_count(double t0, double T, double dt);

/// One exponential-Euler step driven by the standard normal vector z (size n).
Vec mild_step(const SpectralSpace& space, const CoefficientModel& model, const Vec& x, const Vec& u, double dt,
              const Vec& z);

/// Noise for path `path_id` at step k comes from substream (seed, integrate, path_id, k).
Vec step_normals(std::uint64_t seed, std::uint64_t path_id, std::uint64_t step, int n);

Trajectory integrate_mild(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi,
                          const Strategy& strategy, double t0, double T, double dt, std::uint64_t seed,
                          std::uint64_t path_id);

std::vector<Trajectory> integrate_ensemble(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi,
                                           const Strategy& strategy, double t0, double T, double dt,
                                           std::uint64_t seed, int paths);

/// CSV with columns path_id, step, time, x_1..x_n, u_1..u_d (controls of the
/// step starting at that node; empty on the terminal node).
std::string trajectories_csv(const std::vector<Trajectory>& paths);

}  // namespace viab
