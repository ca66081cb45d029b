#include "mgap/toml.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "mgap/errors.hpp"

namespace mgap::toml {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Strips a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (c == '"') in_str = !in_str;
        if (c == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

Value parse_scalar(const std::string& raw, int lineno) {
    std::string s = trim(raw);
    if (s.empty()) throw ParseError("toml: empty value at line " + std::to_string(lineno));
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.front() == '"') {
        if (s.size() < 2 || s.back() != '"')
            throw ParseError("toml: unterminated string at line " + std::to_string(lineno));
        return s.substr(1, s.size() - 2);
    }
    if (looks_like_int(s)) {
        std::int64_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec == std::errc() && p == s.data() + s.size()) return v;
    }
    try {
        std::size_t pos = 0;
        double d = std::stod(s, &pos);
        if (pos == s.size()) return d;
    } catch (...) {
    }
    throw ParseError("toml: cannot parse value '" + s + "' at line " + std::to_string(lineno));
}

Value parse_array(const std::string& raw, int lineno) {
    std::string s = trim(raw);
    s = s.substr(1, s.size() - 2);  // strip [ ]
    std::vector<std::string> parts;
    std::string cur;
    bool in_str = false;
    for (char c : s) {
        if (c == '"') in_str = !in_str;
        if (c == ',' && !in_str) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) parts.push_back(cur);

    std::vector<double> nums;
    std::vector<std::string> strs;
    bool is_str = false;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        Value v = parse_scalar(parts[i], lineno);
        if (std::holds_alternative<std::string>(v)) {
            is_str = true;
            strs.push_back(std::get<std::string>(v));
        } else if (std::holds_alternative<double>(v)) {
            nums.push_back(std::get<double>(v));
        } else if (std::holds_alternative<std::int64_t>(v)) {
            nums.push_back(static_cast<double>(std::get<std::int64_t>(v)));
        } else {
            throw ParseError("toml: unsupported array element at line " + std::to_string(lineno));
        }
    }
    if (is_str) {
        if (!nums.empty())
            throw ParseError("toml: mixed array types at line " + std::to_string(lineno));
        return strs;
    }
    return nums;
}

}  // namespace

Table parse(const std::string& text) {
    Table out;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError("toml: malformed section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty())
                throw ParseError("toml: empty section name at line " + std::to_string(lineno));
            continue;
        }
        std::size_t eq = std::string::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_str = !in_str;
            if (line[i] == '=' && !in_str) {
                eq = i;
                break;
            }
        }
        if (eq == std::string::npos)
            throw ParseError("toml: expected 'key = value' at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw ParseError("toml: empty key at line " + std::to_string(lineno));
        std::string full = section.empty() ? key : section + "." + key;
        if (out.values.count(full))
            throw ParseError("toml: duplicate key '" + full + "' at line " + std::to_string(lineno));
        if (!val.empty() && val.front() == '[') {
            if (val.back() != ']')
                throw ParseError("toml: unterminated array at line " + std::to_string(lineno));
            out.values[full] = parse_array(val, lineno);
        } else {
            out.values[full] = parse_scalar(val, lineno);
        }
    }
    return out;
}

Table parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

namespace {
[[noreturn]] void missing(const std::string& key) {
    throw ConfigError("missing config key: " + key);
}
}  // namespace

bool Table::get_bool(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) missing(key);
    if (auto* b = std::get_if<bool>(&it->second)) return *b;
    throw ConfigError("config key '" + key + "' is not a bool");
}

std::int64_t Table::get_int(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) missing(key);
    if (auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
    throw ConfigError("config key '" + key + "' is not an integer");
}

double Table::get_double(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) missing(key);
    if (auto* d = std::get_if<double>(&it->second)) return *d;
    if (auto* v = std::get_if<std::int64_t>(&it->second)) return static_cast<double>(*v);
    throw ConfigError("config key '" + key + "' is not a number");
}

const std::string& Table::get_string(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) missing(key);
    if (auto* s = std::get_if<std::string>(&it->second)) return *s;
    throw ConfigError("config key '" + key + "' is not a string");
}

std::vector<double> Table::get_double_array(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) missing(key);
    if (auto* a = std::get_if<std::vector<double>>(&it->second)) return *a;
    throw ConfigError("config key '" + key + "' is not a numeric array");
}

bool Table::get_bool(const std::string& key, bool def) const {
    return has(key) ? get_bool(key) : def;
}
std::int64_t Table::get_int(const std::string& key, std::int64_t def) const {
    return has(key) ? get_int(key) : def;
}
double Table::get_double(const std::string& key, double def) const {
    return has(key) ? get_double(key) : def;
}
std::string Table::get_string(const std::string& key, const std::string& def) const {
    return has(key) ? get_string(key) : def;
}
std::vector<double> Table::get_double_array(const std::string& key, const std::vector<double>& def) const {
    return has(key) ? get_double_array(key) : def;
}

}  // namespace mgap::toml
