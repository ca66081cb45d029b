#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace mgap::toml {

// Minimal TOML subset: [section] / [a.b] headers, key = value pairs,
// values are bool / integer / float / "string" / arrays of those,
// # comments. Enough for flat config files; nothing nested beyond tables.
using Value = std::variant<bool, std::int64_t, double, std::string,
                           std::vector<double>, std::vector<std::string>>;

struct Table {
    // Keys are fully qualified: "section.key" (or bare "key" at top level).
    std::map<std::string, Value> values;

    bool has(const std::string& key) const { return values.count(key) > 0; }

    bool get_bool(const std::string& key) const;
    std::int64_t get_int(const std::string& key) const;
    double get_double(const std::string& key) const;  // accepts ints too
    const std::string& get_string(const std::string& key) const;
    std::vector<double> get_double_array(const std::string& key) const;

    bool get_bool(const std::string& key, bool def) const;
    std::int64_t get_int(const std::string& key, std::int64_t def) const;
    double get_double(const std::string& key, double def) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    std::vector<double> get_double_array(const std::string& key, const std::vector<double>& def) const;
};

Table parse(const std::string& text);
Table parse_file(const std::string& path);

}  // namespace mgap::toml
