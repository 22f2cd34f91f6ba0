#include "viab/constraint.hpp"

#include <cmath>

#include "viab/rng.hpp"

namespace viab {

namespace {

constexpr int kNewtonIterations = 100;
constexpr int kFallbackSteps = 1000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(const Vec& x) {
    if (!x.allFinite()) throw std::invalid_argument("constraint_sets: non-finite input point");
}

// Gradient descent on |y-x|^2 + kappa*max(phi,0)^2 with growing kappa, then a
// pull onto the zero level along the gradient.
ProjectionResult level_set_fallback(const SmoothFunction& phi, const Vec& x, int used) {
    Vec y = x;
    double kappa = 1.0;
    for (int it = 0; it < kFallbackSteps; ++it) {
        if (it % 100 == 99) kappa *= 10.0;
        const double v = phi.value(y);
        const Vec g = phi.gradient(y);
        Vec grad = 2.0 * (y - x);
        if (v > 0.0) grad += 2.0 * kappa * v * g;
        const double lip = 2.0 + 2.0 * kappa * (g.squaredNorm() + std::abs(v) * phi.hessian(y).norm());
        y -= grad / lip;
    }
    for (int it = 0; it < 50; ++it) {
        const double v = phi.value(y);
        if (v <= 0.0) break;
        const Vec g = phi.gradient(y);
        const double g2 = g.squaredNorm();
        if (g2 == 0.0) break;
        y -= (v / g2) * g;
    }
    ProjectionResult r;
    r.point = y;
    r.distance = (x - y).norm();
    r.iterations = used + kFallbackSteps;
    const Vec g = phi.gradient(y);
    const Vec diff = x - y;
    const double gn = g.norm();
    const double tangential = gn > 0.0 ? (diff - diff.dot(g) / (gn * gn) * g).norm() : diff.norm();
    r.converged = phi.value(y) <= kProjectionTol && tangential <= 1e-6 * std::max(1.0, diff.norm());
    return r;
}

ProjectionResult project_level_set(const LevelSetConstraint& ls, const Vec& x) {
    const SmoothFunction& phi = ls.phi;
    ProjectionResult r;
    if (phi.value(x) <= kMembershipTol) {
        r.point = x;
        return r;
    }
    const auto n = x.size();
    Vec y = x;
    double lambda = 0.0;
    auto residual = [&](const Vec& yy, double lam) {
        Vec f(n + 1);
        f.head(n) = yy - x + lam * phi.gradient(yy);
        f[n] = phi.value(yy);
        return f;
    };
    Vec f = residual(y, lambda);
    const double scale = std::max(1.0, x.norm());
    for (int it = 0; it < kNewtonIterations; ++it) {
        if (f.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) {
            if (lambda < 0.0) break;
            r.point = y;
            r.distance = (x - y).norm();
            r.iterations = it;
            return r;
        }
        Mat jac = Mat::Zero(n + 1, n + 1);
        const Vec g = phi.gradient(y);
        jac.topLeftCorner(n, n) = Mat::Identity(n, n) + lambda * phi.hessian(y);
        jac.topRightCorner(n, 1) = g;
        jac.bottomLeftCorner(1, n) = g.transpose();
        const Vec step = jac.fullPivLu().solve(-f);
        if (!step.allFinite()) break;
        double alpha = 1.0;
        const double f0 = f.norm();
        Vec y_new;
        double l_new = lambda;
        Vec f_new;
        while (true) {
            y_new = y + alpha * step.head(n);
            l_new = lambda + alpha * step[n];
            f_new = residual(y_new, l_new);
            if (f_new.norm() <= (1.0 - 1e-4 * alpha) * f0 || alpha < 1e-6) break;
            alpha *= 0.5;
        }
        y = y_new;
        lambda = l_new;
        f = f_new;
        r.iterations = it + 1;
    }
    if (f.lpNorm<Eigen::Infinity>() <= 1e-14 * scale && lambda >= 0.0) {
        r.point = y;
        r.distance = (x - y).norm();
        return r;
    }
    return level_set_fallback(phi, x, r.iterations);
}

}  // namespace

SmoothFunction ellipsoid_function(Vec center, Vec weights, double radius, double scale) {
    if (center.size() != weights.size()) throw ConfigError("constraint_sets: ellipsoid center/weights size mismatch");
    SmoothFunction f;
    f.name = "ellipsoid";
    f.value = [=](const Vec& x) {
        return scale * ((x - center).array().square() * weights.array()).sum() - scale * radius * radius;
    };
    f.gradient = [=](const Vec& x) { return Vec(2.0 * scale * (weights.array() * (x - center).array())); };
    f.hessian = [=](const Vec&) { return Mat((2.0 * scale * weights).asDiagonal()); };
    f.convex = scale > 0.0 && (weights.array() >= 0.0).all();
    return f;
}

ConstraintSet ConstraintSet::ball(double radius, Vec center) {
    if (!(radius >= 0.0)) throw ConfigError("constraint_sets: ball radius must be nonnegative");
    const int n = static_cast<int>(center.size());
    if (n < 1) throw ConfigError("constraint_sets: ball center must be nonempty");
    return ConstraintSet(BallConstraint{radius, std::move(center)}, n);
}

ConstraintSet ConstraintSet::half_space(Vec normal, double offset) {
    if (normal.size() < 1 || normal.norm() == 0.0) throw ConfigError("constraint_sets: half-space normal must be nonzero");
    const int n = static_cast<int>(normal.size());
    return ConstraintSet(HalfSpaceConstraint{std::move(normal), offset}, n);
}

ConstraintSet ConstraintSet::level_set(SmoothFunction phi, Vec anchor) {
    if (!phi.value || !phi.gradient || !phi.hessian) throw ConfigError("constraint_sets: incomplete level-set function");
    if (!(phi.value(anchor) < 0.0)) throw ConfigError("constraint_sets: level-set anchor must satisfy phi(anchor) < 0");
    const int n = static_cast<int>(anchor.size());
    return ConstraintSet(LevelSetConstraint{std::move(phi), std::move(anchor)}, n);
}

bool ConstraintSet::convex() const {
    return std::visit(overloaded{
                          [](const BallConstraint&) { return true; },
                          [](const HalfSpaceConstraint&) { return true; },
                          [](const LevelSetConstraint& l) { return l.phi.convex; },
                      },
                      variant_);
}

std::string ConstraintSet::kind() const {
    return std::visit(overloaded{
                          [](const BallConstraint&) -> std::string { return "ball"; },
                          [](const HalfSpaceConstraint&) -> std::string { return "halfspace"; },
                          [](const LevelSetConstraint&) -> std::string { return "levelset"; },
                      },
                      variant_);
}

bool ConstraintSet::contains(const Vec& x, double tol) const {
    return std::visit(overloaded{
                          [&](const BallConstraint& b) { return (x - b.center).norm() <= b.radius + tol; },
                          [&](const HalfSpaceConstraint& h) { return h.normal.dot(x) - h.offset <= tol * h.normal.norm(); },
                          [&](const LevelSetConstraint& l) { return l.phi.value(x) <= tol; },
                      },
                      variant_);
}

SmoothFunction ConstraintSet::smooth() const {
    return std::visit(overloaded{
                          [&](const BallConstraint& b) {
                              return ellipsoid_function(b.center, Vec::Ones(dim_), b.radius, 0.5);
                          },
                          [&](const HalfSpaceConstraint& h) {
                              SmoothFunction f;
                              f.name = "affine";
                              const Vec a = h.normal;
                              const double off = h.offset;
                              const auto n = a.size();
                              f.value = [=](const Vec& x) { return a.dot(x) - off; };
                              f.gradient = [=](const Vec&) { return a; };
                              f.hessian = [=](const Vec&) { return Mat(Mat::Zero(n, n)); };
                              f.convex = true;
                              return f;
                          },
                          [](const LevelSetConstraint& l) { return l.phi; },
                      },
                      variant_);
}

ProjectionResult project(const ConstraintSet& k, const Vec& x) {
    require_finite(x);
    if (x.size() != k.dim()) throw std::invalid_argument("constraint_sets: dimension mismatch");
    return std::visit(overloaded{
                          [&](const BallConstraint& b) {
                              ProjectionResult r;
                              const Vec diff = x - b.center;
                              const double dist = diff.norm();
                              if (dist <= b.radius) {
                                  r.point = x;
                              } else {
                                  r.point = b.center + diff * (b.radius / dist);
                                  r.distance = dist - b.radius;
                              }
                              return r;
                          },
                          [&](const HalfSpaceConstraint& h) {
                              ProjectionResult r;
                              const double excess = h.normal.dot(x) - h.offset;
                              if (excess <= 0.0) {
                                  r.point = x;
                              } else {
                                  const double a2 = h.normal.squaredNorm();
                                  r.point = x - (excess / a2) * h.normal;
                                  r.distance = excess / std::sqrt(a2);
                              }
                              return r;
                          },
                          [&](const LevelSetConstraint& l) { return project_level_set(l, x); },
                      },
                      k.variant());
}

double distance(const ConstraintSet& k, const Vec& x) { return project(k, x).distance; }

std::vector<Vec> boundary_sample(const ConstraintSet& k, int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("boundary_sample: count must be >= 1");
    const int n = k.dim();
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        RngStream rng(seed, StreamDomain::boundary, static_cast<std::uint64_t>(i), 0);
        Vec z(n);
        do {
            rng.fill_normal(z);
        } while (z.norm() == 0.0);
        std::visit(overloaded{
                       [&](const BallConstraint& b) { out.push_back(b.center + z * (b.radius / z.norm())); },
                       [&](const HalfSpaceConstraint& h) {
                           out.push_back(z - ((h.normal.dot(z) - h.offset) / h.normal.squaredNorm()) * h.normal);
                       },
                       [&](const LevelSetConstraint& l) {
                           const Vec dir = z / z.norm();
                           auto along = [&](double t) { return l.phi.value(l.anchor + t * dir); };
                           double lo = 0.0;
                           double hi = 1.0;
                           int doublings = 0;
                           while (along(hi) <= 0.0) {
                               lo = hi;
                               hi *= 2.0;
                               if (++doublings > 200)
                                   throw NumericalError("constraint_sets", i,
                                                        "boundary ray " + std::to_string(i) + " never leaves K");
                           }
                           for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
                               const double mid = 0.5 * (lo + hi);
                               (along(mid) <= 0.0 ? lo : hi) = mid;
                           }
                           const double t = std::abs(along(lo)) <= std::abs(along(hi)) ? lo : hi;
                           if (std::abs(along(t)) > 1e-10)
                               throw NumericalError("constraint_sets", i,
                                                    "root finding failed on boundary ray " + std::to_string(i));
                           out.push_back(l.anchor + t * dir);
                       },
                   },
                   k.variant());
    }
    return out;
}

ConstraintSet build_constraint(int n, const ParamMap& p) {
    const std::string variant = p.get_string("variant");
    auto vec_n = [&](const std::string& key, const Vec& fallback) {
        Vec v = p.get_vec(key, fallback);
        if (v.size() != n) throw ConfigError("[constraint] " + key + ": expected n = " + std::to_string(n) + " entries");
        return v;
    };
    if (variant == "ball") return ConstraintSet::ball(p.get_double("radius", 1.0), vec_n("center", Vec::Zero(n)));
    if (variant == "halfspace") return ConstraintSet::half_space(vec_n("normal", Vec()), p.get_double("offset", 0.0));
    if (variant == "levelset") {
        const std::string fn = p.get_string("function", "ellipsoid");
        if (fn != "ellipsoid") throw ConfigError("[constraint] function: unknown smooth function '" + fn + "'");
        const Vec center = vec_n("center", Vec::Zero(n));
        SmoothFunction phi = ellipsoid_function(center, vec_n("weights", Vec::Ones(n)), p.get_double("radius", 1.0),
                                                p.get_double("scale", 1.0));
        return ConstraintSet::level_set(std::move(phi), vec_n("anchor", center));
    }
    throw ConfigError("[constraint] variant: unknown variant '" + variant + "'");
}

}  // namespace viab
