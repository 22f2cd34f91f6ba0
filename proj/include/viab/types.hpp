#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace viab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Malformed or inconsistent experiment/model description.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation that could not be completed (blow-up, non-convergence, ...).
/// `module` names the component that failed; `where` is the node/step index
/// or -1 when not applicable.
class NumericalError : public std::runtime_error {
public:
    NumericalError(std::string module, long where, const std::string& what)
        : std::runtime_error(module + (where >= 0 ? " [" + std::to_string(where) + "]" : "") + ": " + what),
          module_(std::move(module)), where_(where) {}

    const std::string& module() const { return module_; }
    long where() const { return where_; }

private:
    std::string module_;
    long where_;
};

/// Thrown when a covariance is not numerically positive definite even after jitter.
class DegenerateCovariance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace viab
