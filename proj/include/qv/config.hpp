#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qv/bilinear.hpp"
#include "qv/generators.hpp"
#include "qv/partition.hpp"
#include "qv/transform.hpp"

namespace qv {

/// Minimal TOML subset: [section] headers, key = value with strings, numbers,
/// booleans and flat arrays, # comments. Enough for experiment configs without
/// pulling in a full parser.
struct TomlValue {
    std::variant<bool, double, std::string, std::vector<TomlValue>> v;

    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_number() const { return std::holds_alternative<double>(v); }
    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_array() const { return std::holds_alternative<std::vector<TomlValue>>(v); }
};

using TomlTable = std::map<std::string, TomlValue>;
using TomlDoc = std::map<std::string, TomlTable>;

TomlDoc parse_toml(const std::string& text);

/// FNV-1a over the raw config text; embedded in every report.
uint64_t config_hash(const std::string& text);

struct ExperimentConfig {
    TomlDoc doc;
    std::string raw_text;
    uint64_t hash = 0;

    static ExperimentConfig load(const std::string& file);

    bool has(const std::string& section, const std::string& key) const;
    double number(const std::string& section, const std::string& key, double fallback) const;
    double require_number(const std::string& section, const std::string& key) const;
    std::string str(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    bool flag(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& section, const std::string& key) const;

    /// [path] section -> recipe (or loads [path] file= CSV elsewhere).
    PathRecipe recipe(const std::string& section = "path") const;
    /// [partition] section; `family` feeds the oscillation-controlled kind.
    PartitionSequence partitions(double horizon, const std::vector<CadlagPath>& family) const;
    /// [bilinear] section for paths of dimension d.
    BilinearForm bilinear(int d) const;
    Crossnorm crossnorm() const;
    /// [function] section preset.
    SmoothFunction function() const;
    /// [options] reporting_times, or n_report uniform times over ]0,T].
    std::vector<double> reporting_times(double horizon) const;
};

}  // namespace qv
