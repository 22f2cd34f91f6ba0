#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/tangency.hpp"

namespace viab {

struct ViabilityReport {
    std::vector<double> times;
    std::vector<double> mean_sq_distance;
    std::vector<double> std_err;
    std::vector<Vec> controls;  ///< control applied on each step
    double sup_value = 0.0;
    std::size_t sup_index = 0;
    std::string strategy;
    int paths = 0;
    double dt = 0.0;
};

struct ViabilitySettings {
    int probe_count = 512;  ///< samples for the per-step residual minimization
    bool per_path = false;  ///< minimize at every path's own state instead of the ensemble mean
    EtaPolicy policy = EtaPolicy::mean_corrected;
};

/// True dynamics under the tangency-greedy feedback. Noise of path i at step k
/// comes from the integrator stream (seed, i, k).
ViabilityReport closed_loop_viability(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& K, const Vec& xi, double T, double dt,
                                      const ControlSet& controls, int paths, std::uint64_t seed,
                                      const ViabilitySettings& settings = {});

struct LadderEntry {
    double dt = 0.0;
    double sup_value = 0.0;
    double sup_std_err = 0.0;
    ViabilityReport report;
};

struct EquivalenceReport {
    std::vector<LadderEntry> entries;
    bool nonincreasing = true;
    bool finest_small = true;
    double tolerance = 0.0;
    bool pass = false;
};

struct EquivalenceSettings {
    ViabilitySettings viability;
    double rel_floor = 1e-3;
};

/// Sup mean-square distance per dt on the linear control system with convex K.
/// Pass: the series is nonincreasing within 3 standard errors and the finest
/// value is at most 10 std_err + rel_floor |xi|^2.
EquivalenceReport linear_equivalence_experiment(const SpectralSpace& space, const LinearModel& lin,
                                                const ConstraintSet& K, const Vec& xi, double T,
                                                const std::vector<double>& dt_ladder, const ControlSet& controls,
                                                int paths, std::uint64_t seed,
                                                const EquivalenceSettings& settings = {});

/// CSV: time, mean_sq_dist, std_err.
std::string viability_csv(const ViabilityReport& report);
/// CSV: dt, time, mean_sq_dist, std_err for every ladder entry.
std::string equivalence_csv(const EquivalenceReport& report);
std::string equivalence_json(const EquivalenceReport& report);

}  // namespace viab
