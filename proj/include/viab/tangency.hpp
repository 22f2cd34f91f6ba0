#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/one_step.hpp"

namespace viab {

/// How the K-valued partner eta of each zeta sample is chosen.
///  - projection: eta = Pi_K(zeta).
///  - mean_corrected: eta = Pi_K(zeta + c) with a deterministic shift c
///    searched from c = 0 (fixed-point path on the mean correction, best
///    objective kept). Never worse than `projection`.
enum class EtaPolicy { projection, mean_corrected };

std::string to_string(EtaPolicy p);
EtaPolicy parse_eta_policy(const std::string& s);

/// One evaluation of
///   E|zeta - eta|^2 / h^(1-2 lambda) + |E[zeta - eta]|^2 / h^2
/// for a fixed control.
struct TangencyResidual {
    double h = 0.0;
    double lambda = 0.0;
    double term_gap = 0.0;
    double term_cond = 0.0;
    double total = 0.0;
    double std_err = 0.0;
    Vec control;
    Vec shift;  ///< c of the mean-corrected policy (zero for plain projection)
    int sample_count = 0;
    bool flagged = false;  ///< some projection did not converge
    double coefficient_energy = 0.0;  ///< |f(xi,u)|^2 + |g(xi,u)|_HS^2
};

struct ResidualSamples {
    TangencyResidual residual;
    Mat zeta;
    Mat eta;
};

struct ResidualSettings {
    double lambda = 0.0;
    int count = 10000;
    EtaPolicy policy = EtaPolicy::mean_corrected;
    bool refine = false;
};

/// Residual of given zeta samples (rows). The standard error combines the
/// sampling error of the gap term with the delta-method error (and bias) of
/// the squared-mean term.
ResidualSamples residual_from_samples(const ConstraintSet& k, const Mat& zeta, double h, double lambda,
                                      EtaPolicy policy);

/// Equal-weight mixture over the atoms of a finitely-atomic xi: conditional
/// expectations are per-atom means.
TangencyResidual combine_atoms(const std::vector<TangencyResidual>& atoms);

ResidualSamples residual_for_control_samples(const SpectralSpace& space, const CoefficientModel& model,
                                             const ConstraintSet& k, const Vec& xi, const Vec& u, double h,
                                             const ResidualSettings& settings, const StreamAddress& addr);

TangencyResidual residual_for_control(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& k, const Vec& xi, const Vec& u, double h,
                                      const ResidualSettings& settings, const StreamAddress& addr);

/// Minimum over the control grid with common random numbers (one normal
/// block shared by every control), optionally refined by coordinate descent.
TangencyResidual minimize_residual(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& k,
                                   const Vec& xi, double h, const ResidualSettings& settings,
                                   const ControlSet& controls, const StreamAddress& addr);

/// Same, on a caller-supplied normal block (count x n).
TangencyResidual minimize_residual_on(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& k, const Vec& xi, double h, const ResidualSettings& settings,
                                      const ControlSet& controls, const Mat& normals);

enum class Verdict { tangent, not_tangent, inconclusive };
std::string to_string(Verdict v);

struct TangencyProfile {
    std::vector<double> ladder;
    std::vector<TangencyResidual> residuals;
    double loglog_slope = 0.0;  ///< NaN when fewer than two positive totals
    double tol_abs = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

struct ProfileSettings {
    ResidualSettings residual;
    double rel_floor = 1e-3;
};

/// Residual minimized at every ladder entry; entry i uses the normal block
/// keyed by (seed, i). Verdict:
///  tangent      total(h_min) <= tol_abs and slope >= 0.5 (or no positive totals)
///  not-tangent  slope <= 0.1 and total(h_min) > 10 tol_abs
///  inconclusive otherwise, or when any residual is flagged
/// with tol_abs = 10 std_err(h_min) + rel_floor * coefficient energy.
TangencyProfile tangency_profile(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& k,
                                 const Vec& xi, const std::vector<double>& ladder, const ProfileSettings& settings,
                                 const ControlSet& controls, std::uint64_t seed);

/// Least-squares slope of log(total) against log(h) over positive totals.
double loglog_slope(const std::vector<double>& h, const std::vector<double>& totals);

struct CorrectionVariable {
    Mat p;
    double criterion = 0.0;
};

/// p = h^(gamma - 1/2) (eta - zeta); criterion = E|p|^2 + h^(-(1+2 gamma)) |E p|^2.
CorrectionVariable correction_variable(const Mat& zeta, const Mat& eta, double h, double gamma);

/// CSV: h, lambda, term_gap, term_cond, total, std_err, u_1..u_d.
std::string profile_csv(const std::vector<TangencyProfile>& profiles);

}  // namespace viab
