#pragma once

#include <string_view>
#include <vector>

#include "ehcr/config.hpp"

namespace ehcr {

const std::vector<std::string_view>& preset_names();

/// Sweep reproducing one figure dataset; throws ConfigError listing the
/// valid names for an unknown one.
SweepSpec emit_figure_preset(std::string_view name);

}  // namespace ehcr
