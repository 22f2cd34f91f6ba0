#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "viab/params.hpp"
#include "viab/types.hpp"

namespace viab {

inline constexpr double kMembershipTol = 1e-10;
inline constexpr double kProjectionTol = 1e-8;

/// A C^2 function phi with gradient and Hessian, describing K = {phi <= 0}.
struct SmoothFunction {
    std::string name;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::function<Mat(const Vec&)> hessian;
    bool convex = false;
};

/// phi(x) = scale * (sum_i w_i (x_i - c_i)^2 - r^2).
SmoothFunction ellipsoid_function(Vec center, Vec weights, double radius, double scale);

struct BallConstraint {
    double radius = 1.0;
    Vec center;
};
/// <normal, x> <= offset.
struct HalfSpaceConstraint {
    Vec normal;
    double offset = 0.0;
};
struct LevelSetConstraint {
    SmoothFunction phi;
    Vec anchor;  ///< interior point used for boundary rays
};

class ConstraintSet {
public:
    using Variant = std::variant<BallConstraint, HalfSpaceConstraint, LevelSetConstraint>;

    static ConstraintSet ball(double radius, Vec center);
    static ConstraintSet half_space(Vec normal, double offset);
    static ConstraintSet level_set(SmoothFunction phi, Vec anchor);

    const Variant& variant() const { return variant_; }
    int dim() const { return dim_; }
    bool convex() const;
    std::string kind() const;
    bool contains(const Vec& x, double tol = kMembershipTol) const;

    /// Smooth description used by the boundary checks: 1/2(|x-c|^2 - r^2) for
    /// balls, <a,x> - b for half-spaces, phi itself for level sets.
    SmoothFunction smooth() const;

private:
    ConstraintSet(Variant v, int dim) : variant_(std::move(v)), dim_(dim) {}

    Variant variant_;
    int dim_ = 0;
};

struct ProjectionResult {
    Vec point;
    double distance = 0.0;
    bool converged = true;
    int iterations = 0;
};

ProjectionResult project(const ConstraintSet& k, const Vec& x);
double distance(const ConstraintSet& k, const Vec& x);

/// Points on the boundary of K, deterministic per seed.
std::vector<Vec> boundary_sample(const ConstraintSet& k, int count, std::uint64_t seed);

/// Builds K from a [constraint] section.
ConstraintSet build_constraint(int n, const ParamMap& params);

}  // namespace viab
