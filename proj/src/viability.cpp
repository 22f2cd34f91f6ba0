#include "viab/viability.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "viab/format.hpp"
#include "viab/one_step.hpp"
#include "viab/parallel.hpp"

namespace viab {

namespace {

bool singleton(const ControlSet& controls) { return control_grid(controls).size() == 1; }

}  // namespace

ViabilityReport closed_loop_viability(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& K, const Vec& xi, double T, double dt,
                                      const ControlSet& controls, int paths, std::uint64_t seed,
                                      const ViabilitySettings& settings) {
    if (paths < 2) throw std::invalid_argument("viability_mc: at least two paths are required");
    if (!(dt <= 0.05 * T * (1.0 + 1e-12))) throw std::invalid_argument("viability_mc: dt must not exceed 0.05 T");
    if (!K.contains(xi)) throw std::invalid_argument("viability_mc: xi lies outside K");
    const int steps = step_count(0.0, T, dt);
    const int n = space.n();
    const bool fixed = singleton(controls);
    const Vec fixed_u = controls.center;
    ResidualSettings rs;
    rs.count = settings.probe_count;
    rs.policy = settings.policy;

    ViabilityReport rep;
    rep.strategy = "tangency-greedy";
    rep.paths = paths;
    rep.dt = dt;
    Mat X = xi.transpose().replicate(paths, 1);
    std::vector<double> dist(static_cast<std::size_t>(paths));
    std::vector<Vec> path_u(static_cast<std::size_t>(paths));

    auto record = [&](double t) {
        parallel_for(static_cast<std::size_t>(paths), [&](std::size_t i) {
            const double d = distance(K, X.row(static_cast<Eigen::Index>(i)).transpose());
            dist[i] = d * d;
        });
        double mean = 0.0;
        for (double v : dist) mean += v;
        mean /= paths;
        double var = 0.0;
        for (double v : dist) var += (v - mean) * (v - mean);
        var /= (paths - 1);
        rep.times.push_back(t);
        rep.mean_sq_distance.push_back(mean);
        rep.std_err.push_back(std::sqrt(var / paths));
    };

    record(0.0);
    for (int k = 0; k < steps; ++k) {
        const StreamAddress addr{seed, StreamDomain::closed_loop, static_cast<std::uint64_t>(k)};
        Vec u = fixed_u;
        if (!fixed && !settings.per_path) {
            const Vec rep_state = project(K, X.colwise().mean().transpose()).point;
            u = minimize_residual(space, model, K, rep_state, dt, rs, controls, addr).control;
        }
        if (!fixed && settings.per_path) {
            const Mat normals = standard_normals(addr, rs.count, n);
            parallel_for(static_cast<std::size_t>(paths), [&](std::size_t i) {
                const Vec state = project(K, X.row(static_cast<Eigen::Index>(i)).transpose()).point;
                path_u[i] = minimize_residual_on(space, model, K, state, dt, rs, controls, normals).control;
            });
        }
        parallel_for(static_cast<std::size_t>(paths), [&](std::size_t i) {
            const auto r = static_cast<Eigen::Index>(i);
            const Vec& ui = (!fixed && settings.per_path) ? path_u[i] : u;
            const Vec next = mild_step(space, model, X.row(r).transpose(), ui, dt, step_normals(seed, i, k, n));
            if (!next.allFinite() || next.norm() > kBlowUp)
                throw NumericalError("viability_mc", k, "path " + std::to_string(i) + " blew up");
            X.row(r) = next.transpose();
        });
        rep.controls.push_back(u);
        record((k + 1 == steps) ? T : (k + 1) * dt);
    }
    for (std::size_t i = 0; i < rep.mean_sq_distance.size(); ++i) {
        if (rep.mean_sq_distance[i] > rep.sup_value) {
            rep.sup_value = rep.mean_sq_distance[i];
            rep.sup_index = i;
        }
    }
    return rep;
}

EquivalenceReport linear_equivalence_experiment(const SpectralSpace& space, const LinearModel& lin,
                                                const ConstraintSet& K, const Vec& xi, double T,
                                                const std::vector<double>& dt_ladder, const ControlSet& controls,
                                                int paths, std::uint64_t seed, const EquivalenceSettings& settings) {
    if (!K.convex()) throw std::invalid_argument("viability_mc: linear equivalence requires a convex K");
    if (dt_ladder.size() < 2) throw std::invalid_argument("viability_mc: dt ladder needs at least two entries");
    for (std::size_t i = 1; i < dt_ladder.size(); ++i)
        if (!(dt_ladder[i] < dt_ladder[i - 1])) throw std::invalid_argument("viability_mc: dt ladder must decrease");
    const CoefficientModel model = make_linear_model(space, lin, 1.0);

    EquivalenceReport out;
    for (std::size_t i = 0; i < dt_ladder.size(); ++i) {
        LadderEntry e;
        e.dt = dt_ladder[i];
        e.report = closed_loop_viability(space, model, K, xi, T, e.dt, controls, paths, seed + i, settings.viability);
        e.sup_value = e.report.sup_value;
        e.sup_std_err = e.report.std_err[e.report.sup_index];
        out.entries.push_back(std::move(e));
    }
    for (std::size_t i = 1; i < out.entries.size(); ++i) {
        const auto& a = out.entries[i - 1];
        const auto& b = out.entries[i];
        const double slack = 3.0 * std::hypot(a.sup_std_err, b.sup_std_err);
        if (b.sup_value > a.sup_value + slack) out.nonincreasing = false;
    }
    const auto& finest = out.entries.back();
    out.tolerance = 10.0 * finest.sup_std_err + settings.rel_floor * xi.squaredNorm();
    out.finest_small = finest.sup_value <= out.tolerance;
    out.pass = out.nonincreasing && out.finest_small;
    return out;
}

std::string viability_csv(const ViabilityReport& report) {
    std::ostringstream os;
    os << "time,mean_sq_dist,std_err\n";
    for (std::size_t i = 0; i < report.times.size(); ++i)
        os << fmt_num(report.times[i]) << ',' << fmt_num(report.mean_sq_distance[i]) << ','
           << fmt_num(report.std_err[i]) << '\n';
    return os.str();
}

std::string equivalence_csv(const EquivalenceReport& report) {
    std::ostringstream os;
    os << "dt,time,mean_sq_dist,std_err\n";
    for (const auto& e : report.entries)
        for (std::size_t i = 0; i < e.report.times.size(); ++i)
            os << fmt_num(e.dt) << ',' << fmt_num(e.report.times[i]) << ',' << fmt_num(e.report.mean_sq_distance[i])
               << ',' << fmt_num(e.report.std_err[i]) << '\n';
    return os.str();
}

std::string equivalence_json(const EquivalenceReport& report) {
    nlohmann::ordered_json j;
    nlohmann::ordered_json ladder = nlohmann::ordered_json::array();
    for (const auto& e : report.entries)
        ladder.push_back({{"dt", e.dt}, {"sup_value", e.sup_value}, {"sup_std_err", e.sup_std_err}});
    j["ladder"] = ladder;
    j["nonincreasing"] = report.nonincreasing;
    j["finest_small"] = report.finest_small;
    j["tolerance"] = report.tolerance;
    j["passed"] = report.pass;
    return j.dump(2) + "\n";
}

}  // namespace viab
