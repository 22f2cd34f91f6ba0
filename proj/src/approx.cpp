#include "viab/approx.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "viab/format.hpp"
#include "viab/one_step.hpp"
#include "viab/parallel.hpp"

namespace viab {

namespace {

struct PathStep {
    double total = 0.0;
    Vec eta0;
    Vec q0;
    Vec qbar;
    double sq = 0.0;
    double fluct = 0.0;
    bool flagged = false;
};

struct ControlStep {
    Vec control;
    double total = 0.0;
    std::vector<PathStep> paths;
};

ControlStep evaluate_control(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                             const Mat& Y, const Vec& u, double delta, const Mat& normals, int inner,
                             EtaPolicy policy) {
    ControlStep out;
    out.control = u;
    const auto paths = static_cast<std::size_t>(Y.rows());
    out.paths.resize(paths);
    parallel_for(paths, [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        const OneStepLaw law = one_step_law(space, model, Y.row(r).transpose(), u, delta);
        const Mat zeta = apply_law(law, normals.middleRows(r * inner, inner));
        const ResidualSamples rs = residual_from_samples(K, zeta, delta, 0.0, policy);
        const Mat q = rs.eta - zeta;
        PathStep& p = out.paths[i];
        p.total = rs.residual.total;
        p.flagged = rs.residual.flagged;
        p.eta0 = rs.eta.row(0).transpose();
        p.q0 = q.row(0).transpose();
        p.qbar = q.colwise().mean().transpose();
        p.sq = q.rowwise().squaredNorm().sum();
        p.fluct = (q.rowwise() - p.qbar.transpose()).rowwise().squaredNorm().sum();
    });
    for (const auto& p : out.paths) out.total += p.total;
    out.total /= static_cast<double>(paths);
    return out;
}

}  // namespace

double ApproxMildSolution::sigma(double s) const {
    if (times.empty()) return s;
    auto it = std::upper_bound(times.begin(), times.end(), s);
    if (it == times.begin()) return times.front();
    return *(it - 1);
}

ApproxMildSolution build_approx_solution(const SpectralSpace& space, const CoefficientModel& model,
                                         const ConstraintSet& K, const Vec& xi, double epsilon, double T,
                                         const ControlSet& controls, int paths, std::uint64_t seed,
                                         const ApproxSettings& settings) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw std::invalid_argument("approx_builder: epsilon must lie in (0,1)");
    if (!(T > 0.0)) throw std::invalid_argument("approx_builder: T must be positive");
    if (paths < 1 || settings.inner < 1) throw std::invalid_argument("approx_builder: paths and inner must be positive");
    if (xi.size() != space.n() || K.dim() != space.n())
        throw std::invalid_argument("approx_builder: dimension mismatch");

    ApproxMildSolution sol;
    sol.epsilon = epsilon;
    sol.T = T;
    sol.K = K;

    Vec start = xi;
    if (!K.contains(xi)) {
        const ProjectionResult pr = project(K, xi);
        if (pr.distance > kProjectionTol)
            throw std::invalid_argument("approx_builder: xi lies outside K (distance " + fmt_num(pr.distance) + ")");
        start = pr.point;
        sol.warnings.push_back("xi projected onto K (distance " + fmt_num(pr.distance) + ")");
    }

    const double budget = epsilon / 8.0;
    const double first_delta = epsilon * settings.first_delta_ratio;
    const double min_delta = epsilon * settings.min_delta_ratio;
    const std::vector<Vec> grid = control_grid(controls);
    const int n = space.n();
    const int inner = settings.inner;

    Mat Y = start.transpose().replicate(paths, 1);
    sol.times.push_back(0.0);
    sol.Y.push_back(Y);

    double t = 0.0;
    int node = 0;
    while (T - t > 1e-12 * T) {
        double delta = std::min(first_delta, T - t);
        int attempt = 0;
        ControlStep best;
        for (;;) {
            const StreamAddress addr{seed, StreamDomain::builder, static_cast<std::uint64_t>(node) * 16 + attempt};
            const Mat normals = standard_normals(addr, paths * inner, n);
            bool have = false;
            for (const Vec& u : grid) {
                ControlStep cs = evaluate_control(space, model, K, Y, u, delta, normals, inner, settings.policy);
                if (!have || cs.total < best.total) {
                    best = std::move(cs);
                    have = true;
                }
            }
            for (const auto& p : best.paths)
                if (p.flagged) throw NumericalError("approx_builder", node, "projection did not converge");
            if (best.total <= budget) break;
            if (delta * 0.5 < min_delta * (1.0 - 1e-12) || attempt + 1 >= 16) {
                BuildFailure f;
                f.node = node;
                f.time = t;
                f.residual = best.total;
                f.threshold = budget;
                f.clause = "quasi-tangency";
                f.message = "quasi-tangency violated at node " + std::to_string(node) + " (residual " +
                            fmt_num(best.total) + " > " + fmt_num(budget) + " at delta " + fmt_num(delta) + ")";
                sol.failure = f;
                return sol;
            }
            delta *= 0.5;
            ++attempt;
        }

        const double pn = static_cast<double>(paths);
        ApproxStep step;
        step.node = node;
        step.time = t;
        step.delta = delta;
        step.control = best.control;
        step.residual = best.total;
        step.attempts = attempt + 1;
        Mat next(paths, n);
        Mat corr(paths, n);
        double qbar_sq = 0.0, sq = 0.0, fluct = 0.0, corr_part = 0.0, end_gap = 0.0;
        std::vector<double> mid(static_cast<std::size_t>(paths), 0.0);
        parallel_for(static_cast<std::size_t>(paths), [&](std::size_t i) {
            const auto r = static_cast<Eigen::Index>(i);
            const Vec y = Y.row(r).transpose();
            const OneStepLaw half = one_step_law(space, model, y, best.control, 0.5 * delta);
            mid[i] = (half.mean - y).squaredNorm() + half.covariance.trace();
        });
        for (int i = 0; i < paths; ++i) {
            const PathStep& p = best.paths[static_cast<std::size_t>(i)];
            next.row(i) = p.eta0.transpose();
            corr.row(i) = p.q0.transpose();
            qbar_sq += p.qbar.squaredNorm();
            sq += p.sq;
            fluct += p.fluct;
            corr_part += 0.25 * p.qbar.squaredNorm() + 0.5 * p.fluct / inner;
            end_gap += (p.eta0 - Y.row(i).transpose()).squaredNorm();
        }
        double mid_gap = 0.0;
        for (double v : mid) mid_gap += v;
        const double samples = pn * inner;
        step.phi_norm_sq = qbar_sq / pn / (delta * delta);
        step.psi_energy = fluct / samples / delta;
        step.mean_corr_sq = sq / samples;
        step.sigma_gap = std::max(2.0 * mid_gap / pn + 2.0 * corr_part / pn, end_gap / pn);

        t = (T - (t + delta) <= 1e-12 * T) ? T : t + delta;
        Y = next;
        sol.steps.push_back(step);
        sol.corrections.push_back(corr);
        sol.times.push_back(t);
        sol.Y.push_back(Y);
        ++node;
    }

    for (std::size_t k = 0; k < sol.steps.size(); ++k) {
        ThetaRecord rec;
        rec.step = static_cast<int>(k);
        for (std::size_t j = k + 1; j < sol.times.size(); ++j) {
            rec.s.push_back(sol.times[j]);
            rec.offset.push_back(sol.times[j] - sol.times[k + 1]);
        }
        sol.theta.push_back(std::move(rec));
    }
    return sol;
}

bool AuditReport::pass() const {
    return std::all_of(clauses.begin(), clauses.end(), [](const ClauseResult& c) { return c.pass; });
}

const ClauseResult& AuditReport::clause(const std::string& name) const {
    for (const auto& c : clauses)
        if (c.clause == name) return c;
    throw std::out_of_range("audit: no clause " + name);
}

AuditReport audit_solution(const ApproxMildSolution& sol) {
    AuditReport rep;
    const double eps = sol.epsilon;
    const double span = sol.T - sol.t0;

    ClauseResult a{"a", true, 0.0, eps, 0.0, -1, ""};
    for (std::size_t k = 0; k + 1 < sol.times.size(); ++k) {
        const double d = sol.times[k + 1] - sol.times[k];
        if (d > a.value) a.value = d;
        if (a.node < 0 && (d > eps || d <= 0.0)) a.node = static_cast<int>(k);
    }
    a.margin = a.bound - a.value;
    a.pass = a.node < 0;
    if (!a.pass) a.detail = "step " + std::to_string(a.node) + " has sigma(s) < s - epsilon";
    rep.clauses.push_back(a);

    ClauseResult c{"c", true, 0.0, span * eps, 0.0, -1, ""};
    ClauseResult d{"d", true, 0.0, span * eps, 0.0, -1, ""};
    for (const auto& st : sol.steps) {
        c.value += st.delta * st.phi_norm_sq;
        d.value += st.delta * st.psi_energy;
        if (c.node < 0 && c.value > c.bound) c.node = st.node;
        if (d.node < 0 && d.value > d.bound) d.node = st.node;
    }
    c.margin = c.bound - c.value;
    d.margin = d.bound - d.value;
    c.pass = c.value <= c.bound;
    d.pass = d.value <= d.bound;
    if (!c.pass) c.detail = "drift correction energy exceeds budget from node " + std::to_string(c.node);
    if (!d.pass) d.detail = "noise correction energy exceeds budget from node " + std::to_string(d.node);
    rep.clauses.push_back(c);
    rep.clauses.push_back(d);

    ClauseResult g{"g", true, 0.0, eps, 0.0, -1, ""};
    if (!sol.K) {
        g.pass = false;
        g.detail = "solution carries no constraint set";
    } else {
        double worst_dist = 0.0;
        for (std::size_t k = 0; k < sol.Y.size(); ++k) {
            for (Eigen::Index i = 0; i < sol.Y[k].rows(); ++i) {
                const double dist = distance(*sol.K, sol.Y[k].row(i).transpose());
                worst_dist = std::max(worst_dist, dist);
                if (g.node < 0 && dist > kMembershipTol) {
                    g.node = static_cast<int>(k);
                    g.detail = "Y(t_" + std::to_string(k) + ") of path " + std::to_string(i) + " lies outside K (distance " +
                               fmt_num(dist) + ")";
                }
            }
        }
        for (const auto& st : sol.steps) {
            g.value = std::max(g.value, st.sigma_gap);
            if (g.node < 0 && st.sigma_gap > eps) {
                g.node = st.node;
                g.detail = "delayed-state gap exceeds epsilon on step " + std::to_string(st.node);
            }
        }
        g.pass = g.node < 0;
    }
    g.margin = g.bound - g.value;
    rep.clauses.push_back(g);
    return rep;
}

bool theta_nonexpansive_check(const std::vector<ThetaRecord>& theta) {
    for (const auto& rec : theta) {
        if (rec.s.size() != rec.offset.size()) return false;
        for (std::size_t j = 1; j < rec.s.size(); ++j) {
            const double ds = std::abs(rec.s[j] - rec.s[j - 1]);
            const double dt = std::abs(rec.offset[j] - rec.offset[j - 1]);
            if (dt > ds + 1e-12 * std::max(1.0, std::abs(rec.s[j]))) return false;
        }
    }
    return true;
}

bool theta_nonexpansive_check(const ApproxMildSolution& sol) { return theta_nonexpansive_check(sol.theta); }

double second_moment_sup(const ApproxMildSolution& sol) {
    double sup = 0.0;
    for (const Mat& y : sol.Y) sup = std::max(sup, y.rowwise().squaredNorm().mean());
    return sup;
}

std::string solution_csv(const ApproxMildSolution& sol) {
    std::ostringstream os;
    Eigen::Index d = sol.steps.empty() ? 0 : sol.steps.front().control.size();
    os << "step,time,delta";
    for (Eigen::Index i = 1; i <= d; ++i) os << ",u_" << i;
    os << ",phi_norm_sq,psi_energy,mean_corr_sq\n";
    for (const auto& st : sol.steps) {
        os << st.node << ',' << fmt_num(st.time) << ',' << fmt_num(st.delta);
        for (Eigen::Index i = 0; i < d; ++i) os << ',' << fmt_num(st.control[i]);
        os << ',' << fmt_num(st.phi_norm_sq) << ',' << fmt_num(st.psi_energy) << ',' << fmt_num(st.mean_corr_sq) << '\n';
    }
    return os.str();
}

std::string audit_json(const ApproxMildSolution& sol, const AuditReport& audit) {
    nlohmann::ordered_json j;
    j["epsilon"] = sol.epsilon;
    j["T"] = sol.T;
    j["steps"] = sol.steps.size();
    j["built"] = sol.ok();
    if (sol.failure) {
        j["failure"] = {{"node", sol.failure->node},
                        {"time", sol.failure->time},
                        {"clause", sol.failure->clause},
                        {"residual", sol.failure->residual},
                        {"threshold", sol.failure->threshold},
                        {"message", sol.failure->message}};
    }
    nlohmann::ordered_json clauses = nlohmann::ordered_json::array();
    for (const auto& c : audit.clauses) {
        clauses.push_back({{"clause", c.clause},
                           {"pass", c.pass},
                           {"value", c.value},
                           {"bound", c.bound},
                           {"margin", c.margin},
                           {"node", c.node},
                           {"detail", c.detail}});
    }
    j["clauses"] = clauses;
    j["theta_nonexpansive"] = theta_nonexpansive_check(sol);
    j["passed"] = sol.ok() && audit.pass() && theta_nonexpansive_check(sol);
    j["warnings"] = sol.warnings;
    return j.dump(2) + "\n";
}

}  // namespace viab
