#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spdeftle/experiments.hpp"

namespace spdeftle {

/// A parsed campaign, or every problem found in the text.
struct ConfigResult {
  std::optional<Campaign> campaign;
  std::vector<std::string> errors;

  bool ok() const { return campaign.has_value() && errors.empty(); }
};

/// INI text with sections [campaign], [parameters], [numerics]; see README for keys.
ConfigResult parse_config(std::string_view text);
ConfigResult load_config(const std::string& path);

}  // namespace spdeftle
