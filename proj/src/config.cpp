#include "viab/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fstream>
#include <set>
#include <sstream>

#include "viab/format.hpp"

namespace viab {

namespace {

const std::vector<std::string> kSectionOrder = {"space", "model", "control", "constraint", "experiment", "output"};

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"space", {"n", "mu", "m", "d"}},
        {"control", {"shape", "center", "halfwidths", "radius", "resolution"}},
        {"constraint", {"variant", "radius", "center", "normal", "offset", "function", "weights", "scale", "anchor"}},
        {"experiment",
         {"kind", "seed", "xi", "h_ladder", "h", "lambda", "samples", "policy", "refine", "rel_floor", "T", "dt",
          "dt_ladder", "epsilon", "paths", "inner", "probe_count", "per_path", "boundary_samples", "l_values",
          "m_values", "tolerance"}},
        {"output", {"directory", "formats"}},
    };
    return keys;
}

bool is_integer_token(const std::string& t) {
    if (t.empty()) return false;
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    return std::all_of(t.begin() + static_cast<std::ptrdiff_t>(i), t.end(), [](char c) { return c >= '0' && c <= '9'; });
}

std::string canonical_token(const std::string& raw) {
    const std::string t = trim(raw);
    if (is_integer_token(t)) return t;
    try {
        return fmt_exact(parse_double(t));
    } catch (const std::exception&) {
        return t;
    }
}

std::string canonical_value(const std::string& value) {
    std::string out;
    std::string token;
    for (char c : value) {
        if (c == ',' || c == ';' || c == '|') {
            out += canonical_token(token);
            out += c;
            token.clear();
        } else {
            token += c;
        }
    }
    out += canonical_token(token);
    return out;
}

}  // namespace

const ParamMap& ExperimentConfig::section(const std::string& name) const {
    static const ParamMap empty;
    auto it = sections.find(name);
    return it == sections.end() ? empty : it->second;
}

ParamMap& ExperimentConfig::section(const std::string& name) {
    auto it = sections.find(name);
    if (it == sections.end()) it = sections.emplace(name, ParamMap(name, {})).first;
    return it->second;
}

std::string ExperimentConfig::kind() const { return section("experiment").get_string("kind"); }

std::uint64_t ExperimentConfig::seed() const { return section("experiment").get_u64("seed"); }

void ExperimentConfig::set_seed(std::uint64_t seed) { section("experiment").set("seed", std::to_string(seed)); }

SpectralSpace ExperimentConfig::space() const {
    const ParamMap& p = section("space");
    const Vec mu = p.get_vec("mu");
    if (p.has("n") && p.get_int("n") != mu.size())
        throw ConfigError("[space] n = " + p.get_string("n") + " does not match the length of mu");
    return SpectralSpace::make(mu, static_cast<int>(p.get_int("m", 1)), static_cast<int>(p.get_int("d", 1)));
}

CoefficientModel ExperimentConfig::model(const SpectralSpace& space) const {
    return build_model(space, section("model"));
}

ControlSet ExperimentConfig::controls(const SpectralSpace& space) const {
    const ParamMap& p = section("control");
    if (p.values().empty()) return ControlSet::singleton(Vec::Zero(space.d));
    return build_control_set(space, p);
}

ConstraintSet ExperimentConfig::constraint(const SpectralSpace& space) const {
    return build_constraint(space.n(), section("constraint"));
}

ExperimentConfig parse_config_text(const std::string& text, const std::string& expected_kind) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config: " + std::string(e.what()));
    }
    ExperimentConfig cfg;
    for (const auto& [name, sec] : tree) {
        if (std::find(kSectionOrder.begin(), kSectionOrder.end(), name) == kSectionOrder.end())
            throw ConfigError("config: unknown section [" + name + "]");
        if (sec.empty() && !sec.data().empty()) throw ConfigError("config: key '" + name + "' outside any section");
        std::map<std::string, std::string> values;
        const auto known = known_keys().find(name);
        for (const auto& [key, val] : sec) {
            if (known != known_keys().end() && known->second.count(key) == 0)
                throw ConfigError("config: unknown key '" + key + "' in [" + name + "]");
            values[key] = trim(val.data());
        }
        cfg.sections[name] = ParamMap(name, values);
    }
    for (const char* required : {"space", "model", "constraint", "experiment"})
        if (cfg.sections.count(required) == 0) throw ConfigError(std::string("config: missing section [") + required + "]");
    ParamMap& exp = cfg.section("experiment");
    if (!exp.has("kind") && !expected_kind.empty()) exp.set("kind", expected_kind);
    const std::string kind = exp.get_string("kind");
    if (!expected_kind.empty() && kind != expected_kind)
        throw ConfigError("config: experiment kind '" + kind + "' does not match subcommand '" + expected_kind + "'");
    if (std::find(kExperimentKinds.begin(), kExperimentKinds.end(), kind) == kExperimentKinds.end())
        throw ConfigError("config: unknown experiment kind '" + kind + "'");
    if (!cfg.section("experiment").has("seed")) throw ConfigError("config: [experiment] seed is mandatory");
    cfg.seed();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), expected_kind);
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream os;
    bool first = true;
    for (const auto& name : kSectionOrder) {
        auto it = cfg.sections.find(name);
        if (it == cfg.sections.end()) continue;
        if (!first) os << '\n';
        first = false;
        os << '[' << name << "]\n";
        for (const auto& [key, value] : it->second.values()) os << key << " = " << canonical_value(value) << '\n';
    }
    return os.str();
}

}  // namespace viab
