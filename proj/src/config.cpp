#include "hwforest/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace hwforest {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

} // namespace

ConfigMap ConfigMap::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::Io, "cannot open config " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

ConfigMap ConfigMap::from_string(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            fail(Errc::BadConfig, "line " + std::to_string(lineno) + " is not key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) fail(Errc::BadConfig, "line " + std::to_string(lineno) + " has no key");
        if (cfg.entries_.count(key))
            fail(Errc::BadConfig, "duplicate key '" + key + "'");
        cfg.entries_[key] = value;
    }
    return cfg;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
    consumed_.insert(key);
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
    consumed_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(it->second.c_str(), &end, 10);
    if (end == it->second.c_str() || *end != '\0')
        fail(Errc::BadConfig, "'" + key + "' must be an unsigned integer");
    return v;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    consumed_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    char* end = nullptr;
    const double v = std::strtod(it->second.c_str(), &end);
    if (end == it->second.c_str() || *end != '\0')
        fail(Errc::BadConfig, "'" + key + "' must be a number");
    return v;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) const {
    consumed_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(Errc::BadConfig, "'" + key + "' must be on or off");
}

std::vector<std::uint64_t> ConfigMap::get_u64_list(const std::string& key,
                                                   std::vector<std::uint64_t> fallback) const {
    consumed_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::string v = it->second;
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']') fail(Errc::BadConfig, "'" + key + "' has an unclosed bracket");
        v = v.substr(1, v.size() - 2);
    }
    std::vector<std::uint64_t> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string cell = trim(item);
        if (cell.empty()) continue;
        char* end = nullptr;
        const unsigned long long n = std::strtoull(cell.c_str(), &end, 10);
        if (end == cell.c_str() || *end != '\0')
            fail(Errc::BadConfig, "'" + key + "' holds a non-integer entry '" + cell + "'");
        out.push_back(n);
    }
    return out;
}

std::map<std::string, std::string> ConfigMap::with_prefix(const std::string& prefix) const {
    std::map<std::string, std::string> out;
    for (const auto& [key, value] : entries_) {
        if (key.rfind(prefix, 0) == 0) {
            consumed_.insert(key);
            out[key.substr(prefix.size())] = value;
        }
    }
    return out;
}

void ConfigMap::reject_unconsumed() const {
    for (const auto& [key, value] : entries_) {
        (void)value;
        if (!consumed_.count(key)) fail(Errc::BadConfig, "unknown key '" + key + "'");
    }
}

} // namespace hwforest
