#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/tangency.hpp"

namespace viab {

/// Statistics of one builder step [t_k, t_k + delta].
struct ApproxStep {
    int node = 0;
    double time = 0.0;
    double delta = 0.0;
    Vec control;
    double residual = 0.0;      ///< pooled lambda = 0 residual at the chosen control
    double phi_norm_sq = 0.0;   ///< mean over paths of |E[q]|^2 / delta^2
    double psi_energy = 0.0;    ///< mean of |q - E[q]|^2 / delta
    double mean_corr_sq = 0.0;  ///< mean of |q|^2
    double sigma_gap = 0.0;     ///< estimate of sup_s E|Y(sigma(s)) - Y(s)|^2 on the step
    int attempts = 1;
};

/// Elapsed time since the end of one correction step, recorded at later nodes.
struct ThetaRecord {
    int step = 0;
    std::vector<double> s;
    std::vector<double> offset;
};

struct BuildFailure {
    int node = 0;
    double time = 0.0;
    double residual = 0.0;
    double threshold = 0.0;
    std::string clause;
    std::string message;
};

struct ApproxMildSolution {
    double epsilon = 0.0;
    double t0 = 0.0;
    double T = 0.0;
    std::optional<ConstraintSet> K;
    std::vector<double> times;
    std::vector<ApproxStep> steps;
    /// Y[k] is paths x n; row i is path i at times[k].
    std::vector<Mat> Y;
    /// corrections[k] is paths x n; row i is the realized q of path i on step k.
    std::vector<Mat> corrections;
    std::vector<ThetaRecord> theta;
    std::optional<BuildFailure> failure;
    std::vector<std::string> warnings;

    bool ok() const { return !failure.has_value(); }
    /// sigma(s) = t_k on [t_k, t_{k+1}).
    double sigma(double s) const;
};

struct ApproxSettings {
    int inner = 64;  ///< conditional samples per path and step
    EtaPolicy policy = EtaPolicy::mean_corrected;
    double first_delta_ratio = 1.0 / 8.0;
    double min_delta_ratio = 1.0 / 64.0;
};

ApproxMildSolution build_approx_solution(const SpectralSpace& space, const CoefficientModel& model,
                                         const ConstraintSet& K, const Vec& xi, double epsilon, double T,
                                         const ControlSet& controls, int paths, std::uint64_t seed,
                                         const ApproxSettings& settings = {});

struct ClauseResult {
    std::string clause;
    bool pass = true;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;  ///< bound - value
    int node = -1;        ///< first offending node, -1 when none
    std::string detail;
};

struct AuditReport {
    std::vector<ClauseResult> clauses;
    bool pass() const;
    const ClauseResult& clause(const std::string& name) const;
};

AuditReport audit_solution(const ApproxMildSolution& sol);

bool theta_nonexpansive_check(const std::vector<ThetaRecord>& theta);
bool theta_nonexpansive_check(const ApproxMildSolution& sol);

/// sup_k mean_i |Y_i(t_k)|^2.
double second_moment_sup(const ApproxMildSolution& sol);

/// CSV: step, time, delta, u_1..u_d, phi_norm_sq, psi_energy, mean_corr_sq.
std::string solution_csv(const ApproxMildSolution& sol);
std::string audit_json(const ApproxMildSolution& sol, const AuditReport& audit);

}  // namespace viab
