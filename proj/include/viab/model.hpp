#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "viab/params.hpp"
#include "viab/spectral.hpp"

namespace viab {

// ---------------------------------------------------------------------------
// Drift families f(x,u)

struct ZeroDrift {};
struct ConstantDrift {
    Vec value;
};
/// f(x,u) = state * x + control * u. With state = 0 this is the B u drift of
/// the linear control system.
struct LinearDrift {
    Mat state;
    Mat control;
};
/// f(x) = -kappa x.
struct RadialRestoring {
    double kappa = 1.0;
};
/// f(x) = sum_k coeffs[k] |y|^(2k) y with y = x clipped to the ball of `radius`.
struct ClippedPolynomial {
    Vec coeffs;
    double radius = 1.0;
};
struct CustomDrift {
    std::string name;
    std::function<Vec(const Vec&, const Vec&)> eval;
};

using DriftTerm = std::variant<ZeroDrift, ConstantDrift, LinearDrift, RadialRestoring, ClippedPolynomial, CustomDrift>;

// ---------------------------------------------------------------------------
// Noise families g(x,u), n x m

struct ZeroNoise {};
struct ConstantNoise {
    Mat value;
};
/// Column j is state[j] x + control[j] u.
struct LinearNoise {
    std::vector<Mat> state;
    std::vector<Mat> control;
};
/// Column j rotates the (2j, 2j+1) coordinate plane: sigma (x_{2j+1} e_{2j} - x_{2j} e_{2j+1}).
struct TangentialRotation {
    double sigma = 1.0;
};
/// Column 0 is sigma x, remaining columns vanish.
struct NormalNoise {
    double sigma = 1.0;
};
struct CustomNoise {
    std::string name;
    std::function<Mat(const Vec&, const Vec&)> eval;
};

using NoiseTerm = std::variant<ZeroNoise, ConstantNoise, LinearNoise, TangentialRotation, NormalNoise, CustomNoise>;

/// Drift/noise pair with the declared Lipschitz/growth constant c and the
/// singularity exponent gamma in [0, 1/2). Immutable after make().
struct CoefficientModel {
    DriftTerm drift;
    NoiseTerm noise;
    double c = 1.0;
    double gamma = 0.0;
    int n = 1;
    int m = 1;
    int d = 1;

    static CoefficientModel make(const SpectralSpace& space, DriftTerm drift, NoiseTerm noise, double c,
                                 double gamma = 0.0);

    std::string drift_family() const;
    std::string noise_family() const;
};

Vec eval_drift(const CoefficientModel& model, const Vec& x, const Vec& u);
HSOperator eval_noise(const CoefficientModel& model, const Vec& x, const Vec& u);

/// B, C_j, D_j of the linear control system dX = (AX + Bu)ds + (CX + Du)dW.
struct LinearModel {
    Mat B;
    std::vector<Mat> C;
    std::vector<Mat> D;
};

CoefficientModel make_linear_model(const SpectralSpace& space, const LinearModel& lin, double c, double gamma = 0.0);

// ---------------------------------------------------------------------------
// Control sets

struct ControlSet {
    enum class Shape { box, ball };

    Shape shape = Shape::box;
    Vec center;
    Vec halfwidths;
    double radius = 0.0;
    int resolution = 1;

    static ControlSet box(Vec center, Vec halfwidths, int resolution);
    static ControlSet ball(Vec center, double radius, int resolution);
    static ControlSet singleton(Vec point);

    int dim() const { return static_cast<int>(center.size()); }
    bool contains(const Vec& u, double tol = 1e-12) const;
    /// Nearest point of the set.
    Vec clamp(const Vec& u) const;
};

/// Deterministic lexicographic grid of U (first coordinate slowest), always
/// containing the center.
std::vector<Vec> control_grid(const ControlSet& set);

// ---------------------------------------------------------------------------
// Probes and registry

struct LipschitzProbe {
    double drift_ratio = 0.0;
    double noise_ratio = 0.0;
    double drift_growth = 0.0;
    double noise_growth = 0.0;
    int samples = 0;
    bool pass = true;
};

/// Largest observed |f(x,u)-f(y,u)|/|x-y| and |g(x,u)-g(y,u)|_HS/|x-y| over
/// random pairs in the ball of `domain_radius`, u uniform in [-1,1]^d.
LipschitzProbe lipschitz_probe(const CoefficientModel& model, int sample_count, double domain_radius,
                               std::uint64_t seed);

using DriftFactory = std::function<DriftTerm(const SpectralSpace&, const ParamMap&)>;
using NoiseFactory = std::function<NoiseTerm(const SpectralSpace&, const ParamMap&)>;

/// Extension hook: makes a new family name available to configs.
void register_drift_family(const std::string& name, DriftFactory factory);
void register_noise_family(const std::string& name, NoiseFactory factory);
std::vector<std::string> drift_families();
std::vector<std::string> noise_families();

/// Builds a model from a [model] section. `family = zero|linear` is shorthand
/// for both terms; otherwise `drift` and `noise` name the families.
CoefficientModel build_model(const SpectralSpace& space, const ParamMap& params);
ControlSet build_control_set(const SpectralSpace& space, const ParamMap& params);

}  // namespace viab
