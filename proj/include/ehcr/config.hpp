#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ehcr/engine.hpp"
#include "ehcr/error.hpp"

namespace ehcr {

/// One swept key and the values it takes, in canonical text form.
struct SweepAxis
{
    std::string key;
    std::vector<std::string> values;

    bool operator==(const SweepAxis&) const = default;
};

/// A base configuration plus a cartesian grid of overrides.
///
/// Text form is one `key = value` per line, `#` starts a comment, lists are
/// written `[a, b, c]`. `sweep.<key> = [...]` adds an axis; axes vary in
/// order of appearance, the last one fastest.
struct SweepSpec
{
    std::vector<std::pair<std::string, std::string>> settings; ///< in order, canonical values
    std::vector<SweepAxis> axes;

    bool operator==(const SweepSpec&) const = default;

    /// Sets or replaces a plain key, or an axis when `key` starts with
    /// "sweep.". A plain key removes an axis over the same key.
    void set(std::string_view key, std::string_view value);

    const std::string* find(std::string_view key) const;

    std::size_t grid_size() const;

    /// Axis values of grid point `index` (last axis fastest).
    std::vector<std::string> point(std::size_t index) const;

    /// Defaults, then settings, then the point's axis values; validated.
    SimConfig materialize(const std::vector<std::string>& point) const;
    SimConfig materialize_index(std::size_t index) const { return materialize(point(index)); }
};

/// Every recognized configuration key.
const std::vector<std::string>& config_keys();

/// Canonical text for a value of `key`; throws ConfigError when the value
/// does not parse for that key.
std::string canonical_value(std::string_view key, std::string_view value);

SweepSpec parse_sweep(std::string_view text);
SweepSpec load_sweep(const std::filesystem::path& path);

std::string serialize(const SweepSpec& spec);

/// A single configuration (no sweep axes allowed).
SimConfig parse_config(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_number(double v);

/// Raised when a file cannot be read or written.
class IoError : public Error
{
  public:
    using Error::Error;
};

}  // namespace ehcr
