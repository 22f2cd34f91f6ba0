#include "viab/one_step.hpp"

#include <cmath>
#include <sstream>

#include "viab/format.hpp"
#include "viab/parallel.hpp"

namespace viab {

OneStepLaw one_step_law(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi, const Vec& u,
                        double h) {
    if (!(h > 0.0)) throw std::invalid_argument("one_step_law: h must be positive");
    OneStepLaw law;
    law.h = h;
    law.control = u;
    law.mean = semigroup_apply(space, h, xi) + drift_convolution(space, h, eval_drift(model, xi, u));
    law.covariance = noise_covariance(space, h, eval_noise(model, xi, u));
    law.factor = sampling_factor(law.covariance);
    return law;
}

Mat standard_normals(const StreamAddress& addr, int count, int dim) {
    Mat z(count, dim);
    parallel_for(static_cast<std::size_t>(count), [&](std::size_t i) {
        RngStream rng(addr.seed, addr.domain, addr.stream, i);
        Vec row(dim);
        rng.fill_normal(row);
        z.row(static_cast<Eigen::Index>(i)) = row.transpose();
    });
    return z;
}

Mat apply_law(const OneStepLaw& law, const Mat& normals) {
    Mat out = normals * law.factor.transpose();
    out.rowwise() += law.mean.transpose();
    return out;
}

Mat sample_one_step(const OneStepLaw& law, int count, const StreamAddress& addr) {
    if (count < 1) throw std::invalid_argument("sample_one_step: count must be >= 1");
    return apply_law(law, standard_normals(addr, count, static_cast<int>(law.mean.size())));
}

int step_count(double t0, double T, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate_mild: dt must be positive");
    if (!(T > t0)) throw std::invalid_argument("integrate_mild: horizon must exceed the start time");
    const double ratio = (T - t0) / dt;
    const double steps = std::round(ratio);
    if (std::abs(steps * dt - (T - t0)) > 1e-12 * std::max(1.0, T - t0))
        throw std::invalid_argument("integrate_mild: dt does not divide T - t0");
    return static_cast<int>(steps);
}

Vec mild_step(const SpectralSpace& space, const CoefficientModel& model, const Vec& x, const Vec& u, double dt,
              const Vec& z) {
    const Vec drift = eval_drift(model, x, u);
    const HSOperator g = eval_noise(model, x, u);
    Vec next = semigroup_apply(space, dt, x) + drift_convolution(space, dt, drift);
    if (!g.entries.isZero(0.0)) next += sampling_factor(noise_covariance(space, dt, g)) * z;
    return next;
}

Vec step_normals(std::uint64_t seed, std::uint64_t path_id, std::uint64_t step, int n) {
    RngStream rng(seed, StreamDomain::integrate, path_id, step);
    Vec z(n);
    rng.fill_normal(z);
    return z;
}

Trajectory integrate_mild(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi,
                          const Strategy& strategy, double t0, double T, double dt, std::uint64_t seed,
                          std::uint64_t path_id) {
    const int steps = step_count(t0, T, dt);
    Trajectory traj;
    traj.seed = seed;
    traj.path_id = path_id;
    traj.times.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.times.push_back(t0);
    traj.states.push_back(xi);
    Vec x = xi;
    for (int k = 0; k < steps; ++k) {
        const double t = t0 + k * dt;
        const Vec u = strategy(t, x);
        x = mild_step(space, model, x, u, dt, step_normals(seed, path_id, static_cast<std::uint64_t>(k), space.n()));
        if (!x.allFinite() || x.norm() > kBlowUp)
            throw NumericalError("one_step_sampler", k, "state blow-up on path " + std::to_string(path_id));
        traj.controls.push_back(u);
        traj.times.push_back(t0 + (k + 1) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

std::vector<Trajectory> integrate_ensemble(const SpectralSpace& space, const CoefficientModel& model, const Vec& xi,
                                           const Strategy& strategy, double t0, double T, double dt,
                                           std::uint64_t seed, int paths) {
    std::vector<Trajectory> out(static_cast<std::size_t>(paths));
    parallel_for(out.size(), [&](std::size_t p) {
        out[p] = integrate_mild(space, model, xi, strategy, t0, T, dt, seed, p);
    });
    return out;
}

std::string trajectories_csv(const std::vector<Trajectory>& paths) {
    std::ostringstream os;
    if (paths.empty()) return "path_id,step,time\n";
    const auto n = paths.front().states.front().size();
    const auto d = paths.front().controls.empty() ? 0 : paths.front().controls.front().size();
    os << "path_id,step,time";
    for (Eigen::Index i = 1; i <= n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 1; i <= d; ++i) os << ",u_" << i;
    os << '\n';
    for (const auto& p : paths) {
        for (std::size_t k = 0; k < p.states.size(); ++k) {
            os << p.path_id << ',' << k << ',' << fmt_num(p.times[k]);
            for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt_num(p.states[k][i]);
            for (Eigen::Index i = 0; i < d; ++i) os << ',' << (k < p.controls.size() ? fmt_num(p.controls[k][i]) : "");
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace viab
