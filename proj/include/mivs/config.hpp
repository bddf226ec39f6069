#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mivs {

/**
 * Key = value run configuration with one section per module, e.g.
 *
 *   [signal]
 *   fs_hz = 4000
 *   [relay]
 *   eta = 0.2
 *
 * Keys are addressed as "section.key". Unknown keys are hard errors, both in
 * files and in command-line overrides. The effective configuration is echoed
 * verbatim next to every command's outputs so a run can be reproduced.
 */
class RunConfig {
public:
    /// Built-in defaults for every known key (seed comes from MIVS_SEED when set).
    static RunConfig defaults();

    /// Parses a config file and overlays it on the current values.
    void merge_file(const std::string& path);

    /// Applies one "section.key=value" override.
    void set(const std::string& assignment);
    void set(const std::string& key, const std::string& value);

    const std::string& get(const std::string& key) const;
    double get_double(const std::string& key) const;
    int get_int(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;
    bool get_bool(const std::string& key) const;

    bool has(const std::string& key) const;

    /// Canonical text form, grouped by section, keys in fixed order.
    std::string serialize() const;

    /// Writes serialize() to the given path.
    void echo_to(const std::string& path) const;

private:
    std::map<std::string, std::string> values_;
};

} // namespace mivs
