#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/tangency.hpp"

namespace viab {

inline constexpr double kNagumoTol = 1e-8;
inline constexpr double kSphereTol = 1e-10;

struct NagumoReport {
    Vec point;
    Vec control;
    double phi_value = 0.0;
    double lhs_dn1 = 0.0;  ///< <Dphi, Ax> + <Dphi, F> + 1/2 sum_j G_j^T D^2phi G_j
    Vec dn2;               ///< entries <G(x) e_j, Dphi(x)>
    double dn2_norm = 0.0;
    double dn2_tol = 0.0;
    bool pass_dn1 = false;
    bool pass_dn2 = false;
    bool pass() const { return pass_dn1 && pass_dn2; }
};

/// Boundary conditions at x with phi(x) = 0, where phi is K.smooth().
NagumoReport check_smooth_point(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                const Vec& x, const Vec& u);
NagumoReport check_smooth_point(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                const Vec& x);

/// Unit-ball form: lhs = <x,Ax> + <x,F(x)> + 1/2 |G(x)|_HS^2, dn2 = G(x)^T x.
NagumoReport check_unit_ball_point(const SpectralSpace& space, const CoefficientModel& model, const Vec& x,
                                   const Vec& u);
NagumoReport check_unit_ball_point(const SpectralSpace& space, const CoefficientModel& model, const Vec& x);

struct BoundaryCertificate {
    bool passed = false;
    double worst_dn1_margin = 0.0;
    double worst_dn2_norm = 0.0;
    int samples = 0;
    int failures = 0;
    std::vector<NagumoReport> points;
};

/// Every sampled boundary point must pass both conditions for some control of
/// the grid (the reported control minimizes violation).
BoundaryCertificate certify_boundary(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                     int sample_count, std::uint64_t seed, const ControlSet& controls);
BoundaryCertificate certify_boundary(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                     int sample_count, std::uint64_t seed);

std::string certificate_json(const BoundaryCertificate& cert);

/// Model projected onto the first l modes with the first m_prime noise directions.
CoefficientModel galerkin_projection(const SpectralSpace& space, const CoefficientModel& model, int l, int m_prime);

struct GalerkinCell {
    int l = 0;
    int m = 0;
    TangencyResidual residual;
};

/// Residual minimized at J_l xi for every (l, m') cell; all cells share one
/// block of normals.
std::vector<GalerkinCell> galerkin_ladder(const SpectralSpace& space, const CoefficientModel& model,
                                          const ConstraintSet& K, const std::vector<int>& l_values,
                                          const std::vector<int>& m_values, const Vec& xi, double h,
                                          const ResidualSettings& settings, const ControlSet& controls,
                                          std::uint64_t seed);

/// CSV: l, m, total, std_err.
std::string galerkin_csv(const std::vector<GalerkinCell>& cells);

}  // namespace viab
