#include "viab/nagumo.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "viab/format.hpp"
#include "viab/one_step.hpp"
#include "viab/parallel.hpp"

namespace viab {

namespace {

NagumoReport finish(NagumoReport r, const Vec& grad, const Mat& g) {
    r.dn2 = g.transpose() * grad;
    r.dn2_norm = r.dn2.norm();
    r.dn2_tol = kNagumoTol * grad.norm() * g.norm();
    r.pass_dn1 = r.lhs_dn1 <= kNagumoTol;
    r.pass_dn2 = r.dn2_norm <= r.dn2_tol;
    return r;
}

Vec zero_control(const CoefficientModel& model) { return Vec::Zero(model.d); }

double violation(const NagumoReport& r) {
    return std::max(r.lhs_dn1 - kNagumoTol, 0.0) + std::max(r.dn2_norm - r.dn2_tol, 0.0);
}

}  // namespace

NagumoReport check_smooth_point(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                const Vec& x, const Vec& u) {
    const SmoothFunction phi = K.smooth();
    const double value = phi.value(x);
    if (std::abs(value) > kNagumoTol)
        throw std::invalid_argument("nagumo_checker: point is off the boundary (|phi| = " + fmt_num(std::abs(value)) + ")");
    const Vec grad = phi.gradient(x);
    const Mat hess = phi.hessian(x);
    const Mat g = eval_noise(model, x, u).entries;
    NagumoReport r;
    r.point = x;
    r.control = u;
    r.phi_value = value;
    double trace = 0.0;
    for (Eigen::Index j = 0; j < g.cols(); ++j) trace += g.col(j).dot(hess * g.col(j));
    r.lhs_dn1 = grad.dot(space.mu.cwiseProduct(x)) + grad.dot(eval_drift(model, x, u)) + 0.5 * trace;
    return finish(r, grad, g);
}

NagumoReport check_smooth_point(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                const Vec& x) {
    return check_smooth_point(space, model, K, x, zero_control(model));
}

NagumoReport check_unit_ball_point(const SpectralSpace& space, const CoefficientModel& model, const Vec& x,
                                   const Vec& u) {
    if (std::abs(x.norm() - 1.0) > kSphereTol)
        throw std::invalid_argument("nagumo_checker: point is off the unit sphere (|x| = " + fmt_num(x.norm()) + ")");
    const Mat g = eval_noise(model, x, u).entries;
    NagumoReport r;
    r.point = x;
    r.control = u;
    r.phi_value = 0.5 * (x.squaredNorm() - 1.0);
    r.lhs_dn1 = x.dot(space.mu.cwiseProduct(x)) + x.dot(eval_drift(model, x, u)) + 0.5 * g.squaredNorm();
    return finish(r, x, g);
}

NagumoReport check_unit_ball_point(const SpectralSpace& space, const CoefficientModel& model, const Vec& x) {
    return check_unit_ball_point(space, model, x, zero_control(model));
}

BoundaryCertificate certify_boundary(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                     int sample_count, std::uint64_t seed, const ControlSet& controls) {
    if (sample_count < 16) throw std::invalid_argument("nagumo_checker: at least 16 boundary samples are required");
    const std::vector<Vec> pts = boundary_sample(K, sample_count, seed);
    const std::vector<Vec> grid = control_grid(controls);
    BoundaryCertificate cert;
    cert.samples = sample_count;
    cert.points.resize(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        NagumoReport best;
        bool have = false;
        for (const Vec& u : grid) {
            NagumoReport r = check_smooth_point(space, model, K, pts[i], u);
            if (!have || violation(r) < violation(best) ||
                (violation(r) == violation(best) && r.lhs_dn1 < best.lhs_dn1)) {
                best = std::move(r);
                have = true;
            }
        }
        cert.points[i] = std::move(best);
    });
    cert.worst_dn1_margin = -std::numeric_limits<double>::infinity();
    for (const auto& r : cert.points) {
        cert.worst_dn1_margin = std::max(cert.worst_dn1_margin, r.lhs_dn1);
        cert.worst_dn2_norm = std::max(cert.worst_dn2_norm, r.dn2_norm);
        if (!r.pass()) ++cert.failures;
    }
    cert.passed = cert.failures == 0;
    return cert;
}

BoundaryCertificate certify_boundary(const SpectralSpace& space, const CoefficientModel& model, const ConstraintSet& K,
                                     int sample_count, std::uint64_t seed) {
    return certify_boundary(space, model, K, sample_count, seed, ControlSet::singleton(zero_control(model)));
}

std::string certificate_json(const BoundaryCertificate& cert) {
    nlohmann::ordered_json j;
    j["passed"] = cert.passed;
    j["worst_dn1_margin"] = cert.worst_dn1_margin;
    j["worst_dn2_norm"] = cert.worst_dn2_norm;
    j["samples"] = cert.samples;
    j["failures"] = cert.failures;
    j["tolerances"] = {{"dn1", kNagumoTol}, {"dn2_relative", kNagumoTol}};
    return j.dump(2) + "\n";
}

CoefficientModel galerkin_projection(const SpectralSpace& space, const CoefficientModel& model, int l, int m_prime) {
    if (l < 1 || l > space.n()) throw std::invalid_argument("nagumo_checker: l must lie in 1..n");
    if (m_prime < 1 || m_prime > space.m) throw std::invalid_argument("nagumo_checker: m' must lie in 1..m");
    const int n = space.n();
    const int m = space.m;
    auto project_modes = [l, n](Vec v) {
        v.tail(n - l).setZero();
        return v;
    };
    CustomDrift drift{"galerkin(" + model.drift_family() + ")", [model, project_modes](const Vec& x, const Vec& u) {
                          return project_modes(eval_drift(model, project_modes(x), u));
                      }};
    CustomNoise noise{"galerkin(" + model.noise_family() + ")",
                      [model, project_modes, l, n, m, m_prime](const Vec& x, const Vec& u) {
                          Mat g = eval_noise(model, project_modes(x), u).entries;
                          g.bottomRows(n - l).setZero();
                          g.rightCols(m - m_prime).setZero();
                          return g;
                      }};
    return CoefficientModel::make(space, drift, noise, model.c, model.gamma);
}

std::vector<GalerkinCell> galerkin_ladder(const SpectralSpace& space, const CoefficientModel& model,
                                          const ConstraintSet& K, const std::vector<int>& l_values,
                                          const std::vector<int>& m_values, const Vec& xi, double h,
                                          const ResidualSettings& settings, const ControlSet& controls,
                                          std::uint64_t seed) {
    const Mat normals = standard_normals(StreamAddress{seed, StreamDomain::residual, 0}, settings.count, space.n());
    std::vector<GalerkinCell> cells;
    for (int l : l_values) {
        for (int mp : m_values) {
            const CoefficientModel proj = galerkin_projection(space, model, l, mp);
            Vec x = xi;
            x.tail(space.n() - l).setZero();
            GalerkinCell cell;
            cell.l = l;
            cell.m = mp;
            cell.residual = minimize_residual_on(space, proj, K, x, h, settings, controls, normals);
            cells.push_back(std::move(cell));
        }
    }
    return cells;
}

std::string galerkin_csv(const std::vector<GalerkinCell>& cells) {
    std::ostringstream os;
    os << "l,m,total,std_err\n";
    for (const auto& c : cells)
        os << c.l << ',' << c.m << ',' << fmt_num(c.residual.total) << ',' << fmt_num(c.residual.std_err) << '\n';
    return os.str();
}

}  // namespace viab
