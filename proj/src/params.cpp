#include "viab/params.hpp"

#include <charconv>
#include <cstdint>

namespace viab {

std::string trim(const std::string& text) {
    const auto b = text.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = text.find_last_not_of(" \t\r\n");
    return text.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

double parse_double(const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto* first = t.data();
    const auto* last = t.data() + t.size();
    // from_chars rejects a leading '+'.
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty()) throw ConfigError("not a number: '" + t + "'");
    return v;
}

Vec parse_vec(const std::string& text) {
    const auto parts = split(text, ',');
    Vec v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v[static_cast<Eigen::Index>(i)] = parse_double(parts[i]);
    return v;
}

void ParamMap::fail(const std::string& key, const std::string& why) const {
    throw ConfigError("[" + section_ + "] " + key + ": " + why);
}

std::string ParamMap::get_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) fail(key, "missing required key");
    return it->second;
}

std::string ParamMap::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double ParamMap::get_double(const std::string& key) const {
    try {
        return parse_double(get_string(key));
    } catch (const ConfigError& e) {
        if (!has(key)) throw;
        fail(key, e.what());
    }
}

double ParamMap::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

long long ParamMap::get_int(const std::string& key) const {
    const std::string t = trim(get_string(key));
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) fail(key, "not an integer: '" + t + "'");
    return v;
}

long long ParamMap::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

std::uint64_t ParamMap::get_u64(const std::string& key) const {
    const std::string t = trim(get_string(key));
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) fail(key, "not an unsigned integer: '" + t + "'");
    return v;
}

Vec ParamMap::get_vec(const std::string& key) const {
    try {
        return parse_vec(get_string(key));
    } catch (const ConfigError& e) {
        if (!has(key)) throw;
        fail(key, e.what());
    }
}

Vec ParamMap::get_vec(const std::string& key, const Vec& fallback) const {
    return has(key) ? get_vec(key) : fallback;
}

Mat ParamMap::get_mat(const std::string& key, long rows, long cols) const {
    const auto row_text = split(get_string(key), ';');
    if (static_cast<long>(row_text.size()) != rows)
        fail(key, "expected " + std::to_string(rows) + " rows, got " + std::to_string(row_text.size()));
    Mat m(rows, cols);
    for (long r = 0; r < rows; ++r) {
        Vec row;
        try {
            row = parse_vec(row_text[static_cast<std::size_t>(r)]);
        } catch (const ConfigError& e) {
            fail(key, e.what());
        }
        if (row.size() != cols)
            fail(key, "row " + std::to_string(r) + " has " + std::to_string(row.size()) + " entries, expected " +
                          std::to_string(cols));
        m.row(r) = row.transpose();
    }
    return m;
}

std::vector<Mat> ParamMap::get_mats(const std::string& key, long count, long rows, long cols) const {
    const auto blocks = split(get_string(key), '|');
    if (static_cast<long>(blocks.size()) != count)
        fail(key, "expected " + std::to_string(count) + " matrices, got " + std::to_string(blocks.size()));
    std::vector<Mat> out;
    for (const auto& b : blocks) {
        ParamMap one(section_, {{key, b}});
        out.push_back(one.get_mat(key, rows, cols));
    }
    return out;
}

}  // namespace viab
