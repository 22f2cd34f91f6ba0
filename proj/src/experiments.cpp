#include "viab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "viab/approx.hpp"
#include "viab/format.hpp"
#include "viab/nagumo.hpp"
#include "viab/tangency.hpp"
#include "viab/viability.hpp"

namespace viab {

namespace fs = std::filesystem;

namespace {

using Json = nlohmann::ordered_json;

std::vector<double> default_ladder() {
    std::vector<double> h;
    for (int k = 4; k <= 10; ++k) h.push_back(std::ldexp(1.0, -k));
    return h;
}

std::vector<double> get_list(const ParamMap& p, const std::string& key, const std::vector<double>& fallback) {
    if (!p.has(key)) return fallback;
    const Vec v = p.get_vec(key);
    return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<int> get_int_list(const ParamMap& p, const std::string& key, int upto) {
    std::vector<int> out;
    if (!p.has(key)) {
        for (int i = 1; i <= upto; ++i) out.push_back(i);
        return out;
    }
    for (const auto& t : split(p.get_string(key), ',')) {
        const double v = parse_double(trim(t));
        if (v != std::floor(v)) throw ConfigError("[experiment] " + key + " entries must be integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

int get_count(const ParamMap& p, const std::string& key, long long fallback) {
    const long long v = p.get_int(key, fallback);
    if (v < 1) throw ConfigError("[experiment] " + key + " must be positive");
    return static_cast<int>(v);
}

bool get_flag(const ParamMap& p, const std::string& key) {
    const std::string v = p.get_string(key, "false");
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("[experiment] " + key + " must be true or false");
}

Vec get_xi(const ParamMap& p, int n) {
    const Vec xi = p.get_vec("xi");
    if (xi.size() != n) throw ConfigError("[experiment] xi must have n = " + std::to_string(n) + " entries");
    return xi;
}

ResidualSettings residual_settings(const ParamMap& p) {
    ResidualSettings rs;
    rs.lambda = p.get_double("lambda", 0.0);
    rs.count = get_count(p, "samples", 10000);
    rs.policy = parse_eta_policy(p.get_string("policy", "mean-corrected"));
    rs.refine = get_flag(p, "refine");
    return rs;
}

std::set<std::string> formats(const ExperimentConfig& cfg) {
    std::set<std::string> out;
    for (const auto& f : split(cfg.section("output").get_string("formats", "csv,json"), ',')) {
        const std::string t = trim(f);
        if (t != "csv" && t != "json") throw ConfigError("[output] formats accepts csv and json");
        out.insert(t);
    }
    return out;
}

std::string nagumo_csv(const BoundaryCertificate& cert, int n, int d) {
    std::ostringstream os;
    os << "index";
    for (int i = 1; i <= n; ++i) os << ",x_" << i;
    for (int i = 1; i <= d; ++i) os << ",u_" << i;
    os << ",lhs_dn1,dn2_norm,pass_dn1,pass_dn2\n";
    for (std::size_t k = 0; k < cert.points.size(); ++k) {
        const auto& r = cert.points[k];
        os << k;
        for (int i = 0; i < n; ++i) os << ',' << fmt_num(r.point[i]);
        for (int i = 0; i < d; ++i) os << ',' << fmt_num(r.control[i]);
        os << ',' << fmt_num(r.lhs_dn1) << ',' << fmt_num(r.dn2_norm) << ',' << (r.pass_dn1 ? 1 : 0) << ','
           << (r.pass_dn2 ? 1 : 0) << '\n';
    }
    return os.str();
}

LinearModel linear_model_from(const SpectralSpace& space, const ParamMap& p) {
    const std::string family = p.get_string("family", "");
    const bool linear = family == "linear" || (p.get_string("drift", "") == "linear" && p.get_string("noise", "") == "linear");
    if (!linear) throw ConfigError("[model] linear-equiv requires family = linear");
    if (p.has("drift_state")) throw ConfigError("[model] linear-equiv does not accept drift_state");
    LinearModel lin;
    lin.B = p.has("B") ? p.get_mat("B", space.n(), space.d) : Mat::Zero(space.n(), space.d);
    lin.C = p.has("C") ? p.get_mats("C", space.m, space.n(), space.n()) : std::vector<Mat>(space.m, Mat::Zero(space.n(), space.n()));
    lin.D = p.has("D") ? p.get_mats("D", space.m, space.n(), space.d) : std::vector<Mat>(space.m, Mat::Zero(space.n(), space.d));
    return lin;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg) {
    RunResult res;
    res.kind = cfg.kind();
    res.seed = cfg.seed();
    res.stem = res.kind + "_" + std::to_string(res.seed);
    const ParamMap& ex = cfg.section("experiment");
    const SpectralSpace space = cfg.space();
    const CoefficientModel model = cfg.model(space);
    const ControlSet controls = cfg.controls(space);
    const ConstraintSet K = cfg.constraint(space);
    const std::uint64_t seed = res.seed;
    const auto fmts = formats(cfg);

    std::string csv;
    Json summary;
    summary["kind"] = res.kind;
    summary["seed"] = seed;
    bool pass = false;

    if (res.kind == "tangency") {
        ProfileSettings ps;
        ps.residual = residual_settings(ex);
        ps.rel_floor = ex.get_double("rel_floor", 1e-3);
        const Vec xi = get_xi(ex, space.n());
        const auto ladder = get_list(ex, "h_ladder", default_ladder());
        std::vector<double> lambdas{ps.residual.lambda};
        if (!ex.has("lambda") && model.gamma > 0.0) lambdas.push_back(model.gamma);
        std::vector<TangencyProfile> profiles;
        Json per_lambda = Json::array();
        for (double lambda : lambdas) {
            ProfileSettings pl = ps;
            pl.residual.lambda = lambda;
            profiles.push_back(tangency_profile(space, model, K, xi, ladder, pl, controls, seed));
            const auto& prof = profiles.back();
            per_lambda.push_back({{"lambda", lambda},
                                  {"verdict", to_string(prof.verdict)},
                                  {"loglog_slope", prof.loglog_slope},
                                  {"tol_abs", prof.tol_abs}});
        }
        const TangencyProfile& prof = profiles.front();
        csv = profile_csv(profiles);
        summary["verdict"] = to_string(prof.verdict);
        summary["loglog_slope"] = prof.loglog_slope;
        summary["tol_abs"] = prof.tol_abs;
        summary["policy"] = to_string(ps.residual.policy);
        summary["profiles"] = per_lambda;
        pass = prof.verdict == Verdict::tangent;
        res.summary = "verdict " + to_string(prof.verdict) + ", slope " + fmt_num(prof.loglog_slope);
    } else if (res.kind == "nagumo") {
        const BoundaryCertificate cert =
            certify_boundary(space, model, K, get_count(ex, "boundary_samples", 256), seed, controls);
        csv = nagumo_csv(cert, space.n(), space.d);
        summary = Json::parse(certificate_json(cert));
        pass = cert.passed;
        res.summary = std::string(cert.passed ? "certified" : "not certified") + ", " + std::to_string(cert.failures) +
                      " of " + std::to_string(cert.samples) + " points fail";
    } else if (res.kind == "approx") {
        ApproxSettings as;
        as.inner = get_count(ex, "inner", 64);
        as.policy = parse_eta_policy(ex.get_string("policy", "mean-corrected"));
        const ApproxMildSolution sol =
            build_approx_solution(space, model, K, get_xi(ex, space.n()), ex.get_double("epsilon"),
                                  ex.get_double("T"), controls, get_count(ex, "paths", 256), seed, as);
        const AuditReport audit = audit_solution(sol);
        csv = solution_csv(sol);
        summary = Json::parse(audit_json(sol, audit));
        pass = sol.ok() && audit.pass() && theta_nonexpansive_check(sol);
        res.summary = sol.failure ? sol.failure->message
                                  : std::string("built ") + std::to_string(sol.steps.size()) + " steps, audit " +
                                        (audit.pass() ? "passed" : "failed");
    } else if (res.kind == "viability") {
        ViabilitySettings vs;
        vs.probe_count = get_count(ex, "probe_count", 512);
        vs.per_path = get_flag(ex, "per_path");
        vs.policy = parse_eta_policy(ex.get_string("policy", "mean-corrected"));
        const Vec xi = get_xi(ex, space.n());
        const ViabilityReport rep = closed_loop_viability(space, model, K, xi, ex.get_double("T"), ex.get_double("dt"),
                                                          controls, get_count(ex, "paths", 10000), seed, vs);
        const double se = rep.std_err[rep.sup_index];
        const double tol = ex.has("tolerance") ? ex.get_double("tolerance")
                                               : 10.0 * se + ex.get_double("rel_floor", 1e-3) * xi.squaredNorm();
        csv = viability_csv(rep);
        summary["strategy"] = rep.strategy;
        summary["paths"] = rep.paths;
        summary["sup_value"] = rep.sup_value;
        summary["sup_std_err"] = se;
        summary["tolerance"] = tol;
        pass = rep.sup_value <= tol;
        res.summary = "sup E[d_K^2] = " + fmt_num(rep.sup_value) + " (tolerance " + fmt_num(tol) + ")";
    } else if (res.kind == "galerkin") {
        const ResidualSettings rs = residual_settings(ex);
        const Vec xi = get_xi(ex, space.n());
        const double h = ex.get_double("h", std::ldexp(1.0, -6));
        const auto ls = get_int_list(ex, "l_values", space.n());
        const auto ms = get_int_list(ex, "m_values", space.m);
        const auto cells = galerkin_ladder(space, model, K, ls, ms, xi, h, rs, controls, seed);
        const auto full = galerkin_ladder(space, model, K, {space.n()}, {space.m}, xi, h, rs, controls, seed).front();
        const double bound = full.residual.total + 3.0 * full.residual.std_err;
        pass = std::all_of(cells.begin(), cells.end(), [&](const GalerkinCell& c) { return c.residual.total <= bound; });
        csv = galerkin_csv(cells);
        summary["full_total"] = full.residual.total;
        summary["full_std_err"] = full.residual.std_err;
        summary["bound"] = bound;
        res.summary = std::string(pass ? "uniform" : "not uniform") + " (bound " + fmt_num(bound) + ")";
    } else {
        EquivalenceSettings es;
        es.viability.probe_count = get_count(ex, "probe_count", 512);
        es.viability.per_path = get_flag(ex, "per_path");
        es.rel_floor = ex.get_double("rel_floor", 1e-3);
        const EquivalenceReport rep = linear_equivalence_experiment(
            space, linear_model_from(space, cfg.section("model")), K, get_xi(ex, space.n()), ex.get_double("T"),
            get_list(ex, "dt_ladder", {0.02, 0.01, 0.005}), controls, get_count(ex, "paths", 10000), seed, es);
        csv = equivalence_csv(rep);
        summary = Json::parse(equivalence_json(rep));
        pass = rep.pass;
        res.summary = std::string(pass ? "viable" : "not viable") + " (finest sup " +
                      fmt_num(rep.entries.back().sup_value) + ", tolerance " + fmt_num(rep.tolerance) + ")";
    }

    res.exit_code = pass ? kExitPass : kExitFail;
    Json meta = summary;
    meta["passed"] = pass;
    res.artifacts[res.stem + ".ini"] = serialize_config(cfg);
    if (fmts.count("csv")) res.artifacts[res.stem + ".csv"] = csv;
    if (fmts.count("json")) res.artifacts[res.stem + ".json"] = meta.dump(2) + "\n";
    return res;
}

RunResult run_checked(const ExperimentConfig& cfg) {
    try {
        return run_experiment(cfg);
    } catch (const ConfigError& e) {
        RunResult r;
        r.exit_code = kExitConfig;
        r.summary = std::string("configuration error: ") + e.what();
        return r;
    } catch (const std::invalid_argument& e) {
        RunResult r;
        r.exit_code = kExitConfig;
        r.summary = std::string("configuration error: ") + e.what();
        return r;
    } catch (const NumericalError& e) {
        RunResult r;
        r.exit_code = kExitNumerical;
        r.summary = std::string("numerical failure: ") + e.what();
        return r;
    } catch (const DegenerateCovariance& e) {
        RunResult r;
        r.exit_code = kExitNumerical;
        r.summary = std::string("numerical failure: ") + e.what();
        return r;
    }
}

void write_artifacts(const RunResult& result, const std::string& directory) {
    fs::create_directories(directory);
    for (const auto& [name, content] : result.artifacts) {
        std::ofstream out(fs::path(directory) / name, std::ios::binary);
        if (!out) throw ConfigError("output: cannot write " + (fs::path(directory) / name).string());
        out << content;
    }
}

std::string first_csv_difference(const std::string& stored, const std::string& fresh) {
    if (stored == fresh) return "";
    const auto a = split(stored, '\n');
    const auto b = split(fresh, '\n');
    const auto header = a.empty() ? std::vector<std::string>{} : split(a.front(), ',');
    for (std::size_t r = 0; r < std::max(a.size(), b.size()); ++r) {
        const std::string la = r < a.size() ? a[r] : "";
        const std::string lb = r < b.size() ? b[r] : "";
        if (la == lb) continue;
        const auto ca = split(la, ',');
        const auto cb = split(lb, ',');
        for (std::size_t c = 0; c < std::max(ca.size(), cb.size()); ++c) {
            const std::string va = c < ca.size() ? ca[c] : "<missing>";
            const std::string vb = c < cb.size() ? cb[c] : "<missing>";
            if (va == vb) continue;
            const std::string col = c < header.size() ? header[c] : std::to_string(c + 1);
            return "line " + std::to_string(r + 1) + ", column " + col + ": stored '" + va + "', replayed '" + vb + "'";
        }
    }
    return "files differ in line endings";
}

ReplayResult replay(const std::string& path) {
    ReplayResult out;
    std::vector<fs::path> configs;
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.path().extension() == ".ini") configs.push_back(entry.path());
        std::sort(configs.begin(), configs.end());
    } else if (fs::is_regular_file(path, ec)) {
        configs.push_back(path);
    }
    if (configs.empty()) {
        out.exit_code = kExitConfig;
        out.message = "replay: no stored config found in " + path;
        return out;
    }
    std::ostringstream msg;
    for (const auto& ini : configs) {
        ExperimentConfig cfg;
        try {
            cfg = parse_config_file(ini.string());
        } catch (const ConfigError& e) {
            out.exit_code = kExitConfig;
            out.message = "replay: " + ini.string() + ": " + e.what();
            return out;
        }
        const fs::path stored_csv = fs::path(ini).replace_extension(".csv");
        std::ifstream in(stored_csv, std::ios::binary);
        if (!in) {
            out.exit_code = kExitConfig;
            out.message = "replay: missing artifact " + stored_csv.string();
            return out;
        }
        std::ostringstream ss;
        ss << in.rdbuf();
        const RunResult fresh = run_checked(cfg);
        if (fresh.exit_code == kExitConfig || fresh.exit_code == kExitNumerical) {
            out.exit_code = fresh.exit_code;
            out.message = "replay: " + ini.string() + ": " + fresh.summary;
            return out;
        }
        auto it = fresh.artifacts.find(stored_csv.filename().string());
        const std::string fresh_csv = it == fresh.artifacts.end() ? "" : it->second;
        const std::string diff = first_csv_difference(ss.str(), fresh_csv);
        if (!diff.empty()) {
            out.exit_code = kExitReplayMismatch;
            out.message = "replay mismatch in " + stored_csv.string() + ": " + diff;
            return out;
        }
        ++out.checked;
        msg << "identical: " << stored_csv.string() << '\n';
    }
    out.message = msg.str();
    return out;
}

}  // namespace viab
