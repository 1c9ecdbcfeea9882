#pragma once

#include <string>
#include <string_view>

namespace spdeftle {

enum class NormMethod { ClosedForm, FullSvd, PowerIteration };

std::string_view method_name(NormMethod m);

/// lambda = log_norm / horizon; monodromy_norm = exp(log_norm) and may overflow
/// to inf for long horizons, so consumers should prefer log_norm.
struct FtleEstimate {
  double horizon = 0.0;
  double lambda = 0.0;
  double log_norm = 0.0;
  double monodromy_norm = 1.0;
  NormMethod method = NormMethod::ClosedForm;
  /// sigma_max / sigma_min of the (renormalized) monodromy, 0 when not computed
  double condition = 0.0;
  std::string storage;
};

}  // namespace spdeftle
