#include "viab/tangency.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "viab/format.hpp"
#include "viab/parallel.hpp"

namespace viab {

namespace {

constexpr int kShiftIterations = 100;
constexpr int kShiftPatience = 8;
constexpr int kRefineIterations = 20;

struct Moments {
    double gap = 0.0;
    double cond = 0.0;
    double total = 0.0;
    Vec mean_q;
};

Moments moments_of(const Mat& q, Eigen::Index begin, Eigen::Index end, double gap_scale, double cond_scale) {
    Moments m;
    const auto rows = end - begin;
    double sq = 0.0;
    Vec sum = Vec::Zero(q.cols());
    for (Eigen::Index i = begin; i < end; ++i) {
        sq += q.row(i).squaredNorm();
        sum += q.row(i).transpose();
    }
    m.mean_q = sum / static_cast<double>(rows);
    m.gap = sq / static_cast<double>(rows) / gap_scale;
    m.cond = m.mean_q.squaredNorm() / cond_scale;
    m.total = m.gap + m.cond;
    return m;
}

struct Projected {
    Mat eta;
    Mat q;
    bool flagged = false;
};

Projected project_rows(const ConstraintSet& k, const Mat& zeta, const Vec& shift) {
    Projected out;
    out.eta.resize(zeta.rows(), zeta.cols());
    std::vector<char> failed(static_cast<std::size_t>(zeta.rows()), 0);
    const bool shifted = !shift.isZero(0.0);
    parallel_for(static_cast<std::size_t>(zeta.rows()), [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        const Vec z = shifted ? Vec(zeta.row(r).transpose() + shift) : Vec(zeta.row(r).transpose());
        const ProjectionResult pr = project(k, z);
        out.eta.row(r) = pr.point.transpose();
        failed[i] = pr.converged ? 0 : 1;
    });
    for (char f : failed) out.flagged = out.flagged || f != 0;
    out.q = out.eta - zeta;
    return out;
}

double combined_std_err(const Mat& q, double gap_scale, double cond_scale) {
    const auto n = static_cast<double>(q.rows());
    if (q.rows() < 2) return 0.0;
    const Vec sq = q.rowwise().squaredNorm();
    const double sq_mean = sq.mean();
    const double sq_var = (sq.array() - sq_mean).square().sum() / (n - 1.0);
    const Vec mean = q.colwise().mean().transpose();
    const double cov_trace = (q.rowwise() - mean.transpose()).squaredNorm() / (n - 1.0);
    const double se_gap = std::sqrt(sq_var / n) / gap_scale;
    const double se_cond = (2.0 * mean.norm() * std::sqrt(cov_trace / n) + cov_trace / n) / cond_scale;
    return std::hypot(se_gap, se_cond);
}

}  // namespace

std::string to_string(EtaPolicy p) { return p == EtaPolicy::projection ? "projection" : "mean-corrected"; }

EtaPolicy parse_eta_policy(const std::string& s) {
    if (s == "projection") return EtaPolicy::projection;
    if (s == "mean-corrected") return EtaPolicy::mean_corrected;
    throw ConfigError("unknown eta policy '" + s + "' (projection | mean-corrected)");
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::tangent:
            return "tangent";
        case Verdict::not_tangent:
            return "not-tangent";
        case Verdict::inconclusive:
            break;
    }
    return "inconclusive";
}

ResidualSamples residual_from_samples(const ConstraintSet& k, const Mat& zeta, double h, double lambda,
                                      EtaPolicy policy) {
    if (!(h > 0.0)) throw std::invalid_argument("quasi_tangency: h must be positive");
    if (!(lambda >= 0.0 && lambda < 0.5)) throw std::invalid_argument("quasi_tangency: lambda must lie in [0, 1/2)");
    if (zeta.rows() < 1) throw std::invalid_argument("quasi_tangency: no samples");
    const double gap_scale = std::pow(h, 1.0 - 2.0 * lambda);
    const double cond_scale = h * h;
    const auto rows = zeta.rows();

    Vec shift = Vec::Zero(zeta.cols());
    Projected best = project_rows(k, zeta, shift);
    Moments best_m = moments_of(best.q, 0, rows, gap_scale, cond_scale);
    Vec best_shift = shift;

    if (policy == EtaPolicy::mean_corrected && best_m.total > 0.0 && !best.flagged) {
        Moments cur = best_m;
        int stale = 0;
        for (int it = 0; it < kShiftIterations && stale < kShiftPatience; ++it) {
            if (cur.mean_q.squaredNorm() == 0.0) break;
            shift -= cur.mean_q;
            Projected trial = project_rows(k, zeta, shift);
            if (trial.flagged) break;
            cur = moments_of(trial.q, 0, rows, gap_scale, cond_scale);
            if (cur.total < best_m.total) {
                best = std::move(trial);
                best_m = cur;
                best_shift = shift;
                stale = 0;
            } else {
                ++stale;
            }
        }
    }

    ResidualSamples out;
    TangencyResidual& r = out.residual;
    r.h = h;
    r.lambda = lambda;
    r.term_gap = best_m.gap;
    r.term_cond = best_m.cond;
    r.total = best_m.total;
    r.std_err = combined_std_err(best.q, gap_scale, cond_scale);
    r.shift = best_shift;
    r.sample_count = static_cast<int>(rows);
    r.flagged = best.flagged;
    out.zeta = zeta;
    out.eta = std::move(best.eta);
    return out;
}

TangencyResidual combine_atoms(const std::vector<TangencyResidual>& atoms) {
    if (atoms.empty()) throw std::invalid_argument("combine_atoms: no atoms");
    TangencyResidual r = atoms.front();
    const auto a = static_cast<double>(atoms.size());
    r.term_gap = r.term_cond = r.total = r.coefficient_energy = 0.0;
    r.sample_count = 0;
    for (const auto& t : atoms) {
        r.term_gap += t.term_gap / a;
        r.term_cond += t.term_cond / a;
        r.coefficient_energy += t.coefficient_energy / a;
        r.sample_count += t.sample_count;
        r.flagged = r.flagged || t.flagged;
    }
    r.total = r.term_gap + r.term_cond;
    if (atoms.size() > 1) {
        double var = 0.0;
        for (const auto& t : atoms) var += (t.total - r.total) * (t.total - r.total);
        r.std_err = std::sqrt(var / (a - 1.0) / a);
    }
    return r;
}

namespace {

ResidualSamples residual_on_normals(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& k,
                                    const Vec& xi, const Vec& u, double h, const ResidualSettings& settings,
                                    const Mat& normals) {
    const OneStepLaw law = one_step_law(space, model, xi, u, h);
    ResidualSamples s = residual_from_samples(k, apply_law(law, normals), h, settings.lambda, settings.policy);
    s.residual.control = u;
    s.residual.coefficient_energy = eval_drift(model, xi, u).squaredNorm() + eval_noise(model, xi, u).entries.squaredNorm();
    return s;
}

}  // namespace

ResidualSamples residual_for_control_samples(const SpectralSpace& space, const CoefficientModel& model,
                                             const ConstraintSet& k, const Vec& xi, const Vec& u, double h,
                                             const ResidualSettings& settings, const StreamAddress& addr) {
    if (settings.count < 100) throw std::invalid_argument("quasi_tangency: at least 100 samples are required");
    const Mat normals = standard_normals(addr, settings.count, space.n());
    return residual_on_normals(space, model, k, xi, u, h, settings, normals);
}

TangencyResidual residual_for_control(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& k, const Vec& xi, const Vec& u, double h,
                                      const ResidualSettings& settings, const StreamAddress& addr) {
    return residual_for_control_samples(space, model, k, xi, u, h, settings, addr).residual;
}

TangencyResidual minimize_residual_on(const SpectralSpace& space, const CoefficientModel& model,
                                      const ConstraintSet& k, const Vec& xi, double h, const ResidualSettings& settings,
                                      const ControlSet& controls, const Mat& normals) {
    const std::vector<Vec> grid = control_grid(controls);
    TangencyResidual best;
    bool have = false;
    for (const Vec& u : grid) {
        TangencyResidual r = residual_on_normals(space, model, k, xi, u, h, settings, normals).residual;
        if (!have || r.total < best.total) {
            best = std::move(r);
            have = true;
        }
    }
    if (settings.refine && grid.size() > 1) {
        const Vec half = controls.shape == ControlSet::Shape::box ? controls.halfwidths
                                                                   : Vec::Constant(controls.dim(), controls.radius);
        double step = half.maxCoeff() / std::max(1, controls.resolution - 1);
        for (int it = 0; it < kRefineIterations && step > 0.0; ++it) {
            bool improved = false;
            for (int c = 0; c < controls.dim(); ++c) {
                for (double sign : {-1.0, 1.0}) {
                    Vec u = best.control;
                    u[c] += sign * step;
                    u = controls.clamp(u);
                    if ((u - best.control).isZero(0.0)) continue;
                    TangencyResidual r = residual_on_normals(space, model, k, xi, u, h, settings, normals).residual;
                    if (r.total < best.total) {
                        best = std::move(r);
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
    }
    return best;
}

TangencyResidual minimize_residual(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& k,
                                   const Vec& xi, double h, const ResidualSettings& settings,
                                   const ControlSet& controls, const StreamAddress& addr) {
    if (settings.count < 100) throw std::invalid_argument("quasi_tangency: at least 100 samples are required");
    const Mat normals = standard_normals(addr, settings.count, space.n());
    return minimize_residual_on(space, model, k, xi, h, settings, controls, normals);
}

double loglog_slope(const std::vector<double>& h, const std::vector<double>& totals) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!(totals[i] > 0.0)) continue;
        const double x = std::log(h[i]);
        const double y = std::log(totals[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / denom;
}

TangencyProfile tangency_profile(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& k,
                                 const Vec& xi, const std::vector<double>& ladder, const ProfileSettings& settings,
                                 const ControlSet& controls, std::uint64_t seed) {
    if (ladder.size() < 4) throw std::invalid_argument("tangency_profile: ladder needs at least 4 entries");
    for (std::size_t i = 1; i < ladder.size(); ++i)
        if (!(ladder[i] < ladder[i - 1])) throw std::invalid_argument("tangency_profile: ladder must strictly decrease");
    TangencyProfile prof;
    prof.ladder = ladder;
    std::vector<double> totals;
    bool flagged = false;
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const StreamAddress addr{seed, StreamDomain::residual, i};
        prof.residuals.push_back(minimize_residual(space, model, k, xi, ladder[i], settings.residual, controls, addr));
        totals.push_back(prof.residuals.back().total);
        flagged = flagged || prof.residuals.back().flagged;
    }
    prof.loglog_slope = loglog_slope(ladder, totals);
    const TangencyResidual& last = prof.residuals.back();
    prof.tol_abs = 10.0 * last.std_err + settings.rel_floor * last.coefficient_energy;
    const bool slope_known = !std::isnan(prof.loglog_slope);
    if (flagged) {
        prof.verdict = Verdict::inconclusive;
    } else if (last.total <= prof.tol_abs && (!slope_known || prof.loglog_slope >= 0.5)) {
        prof.verdict = Verdict::tangent;
    } else if (slope_known && prof.loglog_slope <= 0.1 && last.total > 10.0 * prof.tol_abs) {
        prof.verdict = Verdict::not_tangent;
    } else {
        prof.verdict = Verdict::inconclusive;
    }
    return prof;
}

CorrectionVariable correction_variable(const Mat& zeta, const Mat& eta, double h, double gamma) {
    if (zeta.rows() != eta.rows() || zeta.cols() != eta.cols())
        throw std::invalid_argument("correction_variable: sample shapes differ");
    if (!(h > 0.0)) throw std::invalid_argument("correction_variable: h must be positive");
    CorrectionVariable out;
    out.p = std::pow(h, gamma - 0.5) * (eta - zeta);
    const auto rows = static_cast<double>(out.p.rows());
    double sq = 0.0;
    Vec sum = Vec::Zero(out.p.cols());
    for (Eigen::Index i = 0; i < out.p.rows(); ++i) {
        sq += out.p.row(i).squaredNorm();
        sum += out.p.row(i).transpose();
    }
    const Vec mean = sum / rows;
    out.criterion = sq / rows + std::pow(h, -(1.0 + 2.0 * gamma)) * mean.squaredNorm();
    return out;
}

std::string profile_csv(const std::vector<TangencyProfile>& profiles) {
    std::ostringstream os;
    Eigen::Index d = 0;
    for (const auto& p : profiles)
        for (const auto& r : p.residuals) d = std::max(d, r.control.size());
    os << "h,lambda,term_gap,term_cond,total,std_err";
    for (Eigen::Index i = 1; i <= d; ++i) os << ",u_" << i;
    os << '\n';
    for (const auto& p : profiles) {
        for (const auto& r : p.residuals) {
            os << fmt_num(r.h) << ',' << fmt_num(r.lambda) << ',' << fmt_num(r.term_gap) << ',' << fmt_num(r.term_cond)
               << ',' << fmt_num(r.total) << ',' << fmt_num(r.std_err);
            for (Eigen::Index i = 0; i < d; ++i) os << ',' << (i < r.control.size() ? fmt_num(r.control[i]) : "");
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace viab
