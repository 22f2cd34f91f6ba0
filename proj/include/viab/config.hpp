#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "viab/constraint.hpp"
#include "viab/model.hpp"
#include "viab/params.hpp"

namespace viab {

inline const std::vector<std::string> kExperimentKinds = {"tangency", "nagumo",  "approx",
                                                          "viability", "galerkin", "linear-equiv"};

/// Sections: space, model, control, constraint, experiment, output.
struct ExperimentConfig {
    std::map<std::string, ParamMap> sections;

    const ParamMap& section(const std::string& name) const;
    ParamMap& section(const std::string& name);
    std::string kind() const;
    std::uint64_t seed() const;
    void set_seed(std::uint64_t seed);

    SpectralSpace space() const;
    CoefficientModel model(const SpectralSpace& space) const;
    ControlSet controls(const SpectralSpace& space) const;
    ConstraintSet constraint(const SpectralSpace& space) const;
};

/// When `expected_kind` is non-empty it fills a missing kind and must match a
/// present one.
ExperimentConfig parse_config_text(const std::string& text, const std::string& expected_kind = "");
ExperimentConfig parse_config_file(const std::string& path, const std::string& expected_kind = "");

/// Canonical text: sections and keys in fixed order, every non-integer number
/// written with 17 significant digits.
std::string serialize_config(const ExperimentConfig& cfg);

}  // namespace viab
