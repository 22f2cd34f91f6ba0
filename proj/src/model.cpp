#include "viab/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "viab/rng.hpp"

namespace viab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_shape(const Mat& a, long rows, long cols, const std::string& what) {
    if (a.rows() != rows || a.cols() != cols)
        throw ConfigError("system_model: " + what + " must be " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", got " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
}

void validate(const DriftTerm& drift, int n, int d) {
    std::visit(overloaded{
                   [](const ZeroDrift&) {},
                   [&](const ConstantDrift& t) {
                       if (t.value.size() != n) throw ConfigError("system_model: constant drift must have n entries");
                   },
                   [&](const LinearDrift& t) {
                       check_shape(t.state, n, n, "linear drift state matrix");
                       check_shape(t.control, n, d, "linear drift control matrix B");
                   },
                   [](const RadialRestoring&) {},
                   [](const ClippedPolynomial& t) {
                       if (!(t.radius > 0.0)) throw ConfigError("system_model: clip radius must be positive");
                       if (t.coeffs.size() == 0) throw ConfigError("system_model: clipped polynomial needs coefficients");
                   },
                   [](const CustomDrift& t) {
                       if (!t.eval) throw ConfigError("system_model: custom drift without evaluator");
                   },
               },
               drift);
}

void validate(const NoiseTerm& noise, int n, int m, int d) {
    std::visit(overloaded{
                   [](const ZeroNoise&) {},
                   [&](const ConstantNoise& t) { check_shape(t.value, n, m, "constant noise"); },
                   [&](const LinearNoise& t) {
                       if (static_cast<int>(t.state.size()) != m || static_cast<int>(t.control.size()) != m)
                           throw ConfigError("system_model: linear noise needs m state and m control matrices");
                       for (const auto& c : t.state) check_shape(c, n, n, "linear noise matrix C_j");
                       for (const auto& dm : t.control) check_shape(dm, n, d, "linear noise matrix D_j");
                   },
                   [&](const TangentialRotation&) {
                       if (2 * m > n)
                           throw ConfigError("system_model: tangential-rotation needs 2m <= n (one plane per direction)");
                   },
                   [](const NormalNoise&) {},
                   [](const CustomNoise& t) {
                       if (!t.eval) throw ConfigError("system_model: custom noise without evaluator");
                   },
               },
               noise);
}

}  // namespace

CoefficientModel CoefficientModel::make(const SpectralSpace& space, DriftTerm drift, NoiseTerm noise, double c,
                                        double gamma) {
    if (!(gamma >= 0.0 && gamma < 0.5))
        throw ConfigError("system_model: gamma = " + std::to_string(gamma) +
                          " violates 0 <= gamma < 1/2 (singularity exponent bound)");
    if (!(c > 0.0) || !std::isfinite(c)) throw ConfigError("system_model: declared constant c must be positive");
    validate(drift, space.n(), space.d);
    validate(noise, space.n(), space.m, space.d);
    CoefficientModel model;
    model.drift = std::move(drift);
    model.noise = std::move(noise);
    model.c = c;
    model.gamma = gamma;
    model.n = space.n();
    model.m = space.m;
    model.d = space.d;
    return model;
}

std::string CoefficientModel::drift_family() const {
    return std::visit(overloaded{
                          [](const ZeroDrift&) -> std::string { return "zero"; },
                          [](const ConstantDrift&) -> std::string { return "constant"; },
                          [](const LinearDrift&) -> std::string { return "linear"; },
                          [](const RadialRestoring&) -> std::string { return "radial-restoring"; },
                          [](const ClippedPolynomial&) -> std::string { return "clipped-polynomial"; },
                          [](const CustomDrift& t) -> std::string { return t.name; },
                      },
                      drift);
}

std::string CoefficientModel::noise_family() const {
    return std::visit(overloaded{
                          [](const ZeroNoise&) -> std::string { return "zero"; },
                          [](const ConstantNoise&) -> std::string { return "constant"; },
                          [](const LinearNoise&) -> std::string { return "linear"; },
                          [](const TangentialRotation&) -> std::string { return "tangential-rotation"; },
                          [](const NormalNoise&) -> std::string { return "normal"; },
                          [](const CustomNoise& t) -> std::string { return t.name; },
                      },
                      noise);
}

Vec eval_drift(const CoefficientModel& model, const Vec& x, const Vec& u) {
    return std::visit(overloaded{
                          [&](const ZeroDrift&) -> Vec { return Vec::Zero(model.n); },
                          [&](const ConstantDrift& t) -> Vec { return t.value; },
                          [&](const LinearDrift& t) -> Vec { return t.state * x + t.control * u; },
                          [&](const RadialRestoring& t) -> Vec { return -t.kappa * x; },
                          [&](const ClippedPolynomial& t) -> Vec {
                              const double r = x.norm();
                              const Vec y = r > t.radius ? Vec(x * (t.radius / r)) : x;
                              const double r2 = y.squaredNorm();
                              double factor = 0.0;
                              double power = 1.0;
                              for (Eigen::Index k = 0; k < t.coeffs.size(); ++k) {
                                  factor += t.coeffs[k] * power;
                                  power *= r2;
                              }
                              return factor * y;
                          },
                          [&](const CustomDrift& t) -> Vec { return t.eval(x, u); },
                      },
                      model.drift);
}

HSOperator eval_noise(const CoefficientModel& model, const Vec& x, const Vec& u) {
    return std::visit(overloaded{
                          [&](const ZeroNoise&) { return HSOperator::zero(model.n, model.m); },
                          [&](const ConstantNoise& t) { return HSOperator(t.value); },
                          [&](const LinearNoise& t) {
                              Mat g(model.n, model.m);
                              for (int j = 0; j < model.m; ++j) g.col(j) = t.state[j] * x + t.control[j] * u;
                              return HSOperator(std::move(g));
                          },
                          [&](const TangentialRotation& t) {
                              Mat g = Mat::Zero(model.n, model.m);
                              for (int j = 0; j < model.m; ++j) {
                                  g(2 * j, j) = t.sigma * x[2 * j + 1];
                                  g(2 * j + 1, j) = -t.sigma * x[2 * j];
                              }
                              return HSOperator(std::move(g));
                          },
                          [&](const NormalNoise& t) {
                              Mat g = Mat::Zero(model.n, model.m);
                              g.col(0) = t.sigma * x;
                              return HSOperator(std::move(g));
                          },
                          [&](const CustomNoise& t) { return HSOperator(t.eval(x, u)); },
                      },
                      model.noise);
}

CoefficientModel make_linear_model(const SpectralSpace& space, const LinearModel& lin, double c, double gamma) {
    return CoefficientModel::make(space, LinearDrift{Mat::Zero(space.n(), space.n()), lin.B},
                                  LinearNoise{lin.C, lin.D}, c, gamma);
}

// ---------------------------------------------------------------------------

ControlSet ControlSet::box(Vec center, Vec halfwidths, int resolution) {
    if (center.size() != halfwidths.size()) throw ConfigError("system_model: box center/halfwidth size mismatch");
    if ((halfwidths.array() < 0.0).any()) throw ConfigError("system_model: box halfwidths must be nonnegative");
    if (resolution < 1) throw ConfigError("system_model: grid resolution must be >= 1");
    ControlSet s;
    s.shape = Shape::box;
    s.center = std::move(center);
    s.halfwidths = std::move(halfwidths);
    s.resolution = resolution;
    return s;
}

ControlSet ControlSet::ball(Vec center, double radius, int resolution) {
    if (!(radius >= 0.0)) throw ConfigError("system_model: ball radius must be nonnegative");
    if (resolution < 1) throw ConfigError("system_model: grid resolution must be >= 1");
    ControlSet s;
    s.shape = Shape::ball;
    s.center = std::move(center);
    s.radius = radius;
    s.resolution = resolution;
    return s;
}

ControlSet ControlSet::singleton(Vec point) { return ball(std::move(point), 0.0, 1); }

bool ControlSet::contains(const Vec& u, double tol) const {
    if (u.size() != center.size()) return false;
    if (shape == Shape::box) return ((u - center).cwiseAbs().array() <= halfwidths.array() + tol).all();
    return (u - center).norm() <= radius + tol;
}

Vec ControlSet::clamp(const Vec& u) const {
    if (shape == Shape::box) return u.cwiseMax(center - halfwidths).cwiseMin(center + halfwidths);
    const Vec diff = u - center;
    const double r = diff.norm();
    return r <= radius ? u : Vec(center + diff * (radius / r));
}

std::vector<Vec> control_grid(const ControlSet& set) {
    const int d = set.dim();
    const int res = set.resolution;
    const Vec half = set.shape == ControlSet::Shape::box ? set.halfwidths : Vec::Constant(d, set.radius);
    std::vector<Vec> out;
    std::vector<int> idx(static_cast<std::size_t>(d), 0);
    bool has_center = false;
    while (true) {
        Vec u(d);
        for (int k = 0; k < d; ++k) {
            const double frac = res == 1 ? 0.0 : -1.0 + 2.0 * idx[static_cast<std::size_t>(k)] / (res - 1);
            u[k] = set.center[k] + frac * half[k];
        }
        if (set.contains(u)) {
            if ((u - set.center).squaredNorm() == 0.0) has_center = true;
            if (out.empty() || !(out.back() - u).isZero(0.0)) out.push_back(u);
        }
        int k = d - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == res) idx[static_cast<std::size_t>(k--)] = 0;
        if (k < 0) break;
    }
    if (!has_center) {
        auto pos = std::lower_bound(out.begin(), out.end(), set.center, [](const Vec& a, const Vec& b) {
            return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
        });
        out.insert(pos, set.center);
    }
    return out;
}

// ---------------------------------------------------------------------------

LipschitzProbe lipschitz_probe(const CoefficientModel& model, int sample_count, double domain_radius,
                               std::uint64_t seed) {
    if (sample_count < 2) throw std::invalid_argument("lipschitz_probe: sample_count must be >= 2");
    LipschitzProbe probe;
    probe.samples = sample_count;
    auto draw_point = [&](RngStream& rng) {
        Vec z(model.n);
        rng.fill_normal(z);
        const double nz = z.norm();
        if (nz == 0.0) return Vec(Vec::Zero(model.n));
        const double r = domain_radius * std::pow(rng.uniform(), 1.0 / model.n);
        return Vec(z * (r / nz));
    };
    for (int s = 0; s < sample_count; ++s) {
        RngStream rng(seed, StreamDomain::probe, static_cast<std::uint64_t>(s), 0);
        const Vec x = draw_point(rng);
        const Vec y = draw_point(rng);
        Vec u(model.d);
        for (int k = 0; k < model.d; ++k) u[k] = 2.0 * rng.uniform() - 1.0;
        const double dist = (x - y).norm();
        if (dist == 0.0) continue;
        const Vec fx = eval_drift(model, x, u);
        const Vec fy = eval_drift(model, y, u);
        const Mat gx = eval_noise(model, x, u).entries;
        const Mat gy = eval_noise(model, y, u).entries;
        probe.drift_ratio = std::max(probe.drift_ratio, (fx - fy).norm() / dist);
        probe.noise_ratio = std::max(probe.noise_ratio, (gx - gy).norm() / dist);
        probe.drift_growth = std::max(probe.drift_growth, fx.norm() / (1.0 + x.norm()));
        probe.noise_growth = std::max(probe.noise_growth, gx.norm() / (1.0 + x.norm()));
    }
    const double limit = model.c * (1.0 + 1e-9);
    probe.pass = probe.drift_ratio <= limit && probe.noise_ratio <= limit;
    return probe;
}

// ---------------------------------------------------------------------------
// Registry

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, DriftFactory> drift;
    std::map<std::string, NoiseFactory> noise;
};

Registry& registry() {
    static Registry* reg = [] {
        auto* r = new Registry;
        r->drift["zero"] = [](const SpectralSpace&, const ParamMap&) -> DriftTerm { return ZeroDrift{}; };
        r->drift["constant"] = [](const SpectralSpace&, const ParamMap& p) -> DriftTerm {
            return ConstantDrift{p.get_vec("drift_value")};
        };
        r->drift["linear"] = [](const SpectralSpace& s, const ParamMap& p) -> DriftTerm {
            const Mat state = p.has("drift_state") ? p.get_mat("drift_state", s.n(), s.n()) : Mat::Zero(s.n(), s.n());
            const Mat b = p.has("B") ? p.get_mat("B", s.n(), s.d) : Mat::Zero(s.n(), s.d);
            return LinearDrift{state, b};
        };
        r->drift["radial-restoring"] = [](const SpectralSpace&, const ParamMap& p) -> DriftTerm {
            return RadialRestoring{p.get_double("kappa", 1.0)};
        };
        r->drift["clipped-polynomial"] = [](const SpectralSpace&, const ParamMap& p) -> DriftTerm {
            return ClippedPolynomial{p.get_vec("coeffs"), p.get_double("clip_radius")};
        };
        r->noise["zero"] = [](const SpectralSpace&, const ParamMap&) -> NoiseTerm { return ZeroNoise{}; };
        r->noise["constant"] = [](const SpectralSpace& s, const ParamMap& p) -> NoiseTerm {
            if (p.has("noise_matrix")) return ConstantNoise{p.get_mat("noise_matrix", s.n(), s.m)};
            const Vec diag = p.get_vec("noise_diag");
            const int k = std::min(s.n(), s.m);
            Mat g = Mat::Zero(s.n(), s.m);
            for (int i = 0; i < k; ++i) g(i, i) = diag.size() == 1 ? diag[0] : diag[i];
            if (diag.size() != 1 && diag.size() != k)
                throw ConfigError("[model] noise_diag: expected 1 or min(n,m) entries");
            return ConstantNoise{g};
        };
        r->noise["linear"] = [](const SpectralSpace& s, const ParamMap& p) -> NoiseTerm {
            std::vector<Mat> c = p.has("C") ? p.get_mats("C", s.m, s.n(), s.n())
                                            : std::vector<Mat>(static_cast<std::size_t>(s.m), Mat::Zero(s.n(), s.n()));
            std::vector<Mat> d = p.has("D") ? p.get_mats("D", s.m, s.n(), s.d)
                                            : std::vector<Mat>(static_cast<std::size_t>(s.m), Mat::Zero(s.n(), s.d));
            return LinearNoise{std::move(c), std::move(d)};
        };
        r->noise["tangential-rotation"] = [](const SpectralSpace&, const ParamMap& p) -> NoiseTerm {
            return TangentialRotation{p.get_double("sigma", 1.0)};
        };
        r->noise["normal"] = [](const SpectralSpace&, const ParamMap& p) -> NoiseTerm {
            return NormalNoise{p.get_double("sigma", 1.0)};
        };
        return r;
    }();
    return *reg;
}

}  // namespace

void register_drift_family(const std::string& name, DriftFactory factory) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    reg.drift[name] = std::move(factory);
}

void register_noise_family(const std::string& name, NoiseFactory factory) {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    reg.noise[name] = std::move(factory);
}

std::vector<std::string> drift_families() {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    std::vector<std::string> out;
    for (const auto& [k, v] : reg.drift) out.push_back(k);
    return out;
}

std::vector<std::string> noise_families() {
    auto& reg = registry();
    std::lock_guard lock(reg.mutex);
    std::vector<std::string> out;
    for (const auto& [k, v] : reg.noise) out.push_back(k);
    return out;
}

CoefficientModel build_model(const SpectralSpace& space, const ParamMap& params) {
    std::string drift_name;
    std::string noise_name;
    if (params.has("family")) {
        const std::string family = params.get_string("family");
        if (family != "zero" && family != "linear")
            throw ConfigError("[model] family: unknown shorthand '" + family + "' (use zero, linear or drift/noise keys)");
        drift_name = family;
        noise_name = family;
    } else {
        drift_name = params.get_string("drift", "zero");
        noise_name = params.get_string("noise", "zero");
    }
    DriftFactory df;
    NoiseFactory nf;
    {
        auto& reg = registry();
        std::lock_guard lock(reg.mutex);
        auto d = reg.drift.find(drift_name);
        if (d == reg.drift.end()) throw ConfigError("[model] drift: unknown family '" + drift_name + "'");
        auto n = reg.noise.find(noise_name);
        if (n == reg.noise.end()) throw ConfigError("[model] noise: unknown family '" + noise_name + "'");
        df = d->second;
        nf = n->second;
    }
    return CoefficientModel::make(space, df(space, params), nf(space, params), params.get_double("c", 1.0),
                                  params.get_double("gamma", 0.0));
}

ControlSet build_control_set(const SpectralSpace& space, const ParamMap& params) {
    const std::string shape = params.get_string("shape", "ball");
    const Vec center = params.get_vec("center", Vec::Zero(space.d));
    if (center.size() != space.d) throw ConfigError("[control] center: expected d entries");
    const int res = static_cast<int>(params.get_int("resolution", 1));
    if (shape == "box") {
        Vec half = params.get_vec("halfwidths");
        if (half.size() == 1 && space.d > 1) half = Vec::Constant(space.d, half[0]);
        if (half.size() != space.d) throw ConfigError("[control] halfwidths: expected d entries");
        return ControlSet::box(center, half, res);
    }
    if (shape == "ball") return ControlSet::ball(center, params.get_double("radius", 0.0), res);
    throw ConfigError("[control] shape: unknown shape '" + shape + "'");
}

}  // namespace viab
