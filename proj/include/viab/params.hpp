#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "viab/types.hpp"

namespace viab {

/// Flat key/value parameters of one config section. Lists are comma
/// separated, matrix rows are separated by ';' and matrix lists by '|'.
class ParamMap {
public:
    ParamMap() = default;
    ParamMap(std::string section, std::map<std::string, std::string> values)
        : section_(std::move(section)), values_(std::move(values)) {}

    const std::string& section() const { return section_; }
    const std::map<std::string, std::string>& values() const { return values_; }

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::uint64_t get_u64(const std::string& key) const;
    Vec get_vec(const std::string& key) const;
    Vec get_vec(const std::string& key, const Vec& fallback) const;
    /// Matrix with `rows` rows; columns inferred and checked for consistency.
    Mat get_mat(const std::string& key, long rows, long cols) const;
    std::vector<Mat> get_mats(const std::string& key, long count, long rows, long cols) const;

private:
    [[noreturn]] void fail(const std::string& key, const std::string& why) const;

    std::string section_;
    std::map<std::string, std::string> values_;
};

double parse_double(const std::string& text);
Vec parse_vec(const std::string& text);
std::vector<std::string> split(const std::string& text, char sep);
std::string trim(const std::string& text);

}  // namespace viab
