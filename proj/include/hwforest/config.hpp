#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "hwforest/errors.hpp"

namespace hwforest {

/// Flat key = value configuration with consumption tracking, so callers
/// can reject keys nothing asked for. Lines starting with '#' and blank
/// lines are ignored; values keep interior spaces.
class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap from_file(const std::string& path);
    static ConfigMap from_string(const std::string& text);

    void set(const std::string& key, const std::string& value) { entries_[key] = value; }
    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    double get_double(const std::string& key, double fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// Accepts "[4,6,8]" or "4,6,8".
    std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                            std::vector<std::uint64_t> fallback) const;

    /// Keys with a given prefix (for encode.<column> style groups).
    std::map<std::string, std::string> with_prefix(const std::string& prefix) const;

    /// Throws BadConfig when any key was never read.
    void reject_unconsumed() const;

    const std::map<std::string, std::string>& entries() const { return entries_; }

private:
    std::map<std::string, std::string> entries_;
    mutable std::set<std::string> consumed_;
};

} // namespace hwforest
