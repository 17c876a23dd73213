#include "maskwarp/schedule.hpp"

#include <cmath>

#include "maskwarp/error.hpp"

namespace maskwarp {

InitMode parse_init_mode(const std::string& name) {
  if (name == "zero") return InitMode::Zero;
  if (name == "centroid") return InitMode::Centroid;
  if (name == "correlation") return InitMode::Correlation;
  throw InvalidArgument("unknown init mode '" + name + "' (expected zero|centroid|correlation)");
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::Zero: return "zero";
    case InitMode::Centroid: return "centroid";
    case InitMode::Correlation: return "correlation";
  }
  return "?";
}

std::vector<std::string> WarpSchedule::validate() const {
  if (alpha.empty()) throw InvalidArgument("schedule needs at least one round");
  if (alpha.size() != beta.size()) {
    throw InvalidArgument("alpha has " + std::to_string(alpha.size()) + " entries but beta has " +
                          std::to_string(beta.size()));
  }
  for (double a : alpha) {
    if (!std::isfinite(a) || a < 0.0) throw InvalidArgument("alpha entries must be finite and >= 0");
  }
  for (double b : beta) {
    if (!std::isfinite(b) || b < 0.0) throw InvalidArgument("beta entries must be finite and >= 0");
  }
  if (!std::isfinite(gamma) || gamma < 0.0) throw InvalidArgument("gamma must be finite and >= 0");
  if (pyramid_levels < 1) throw InvalidArgument("pyramid_levels must be >= 1");
  if (iters_per_level < 0) throw InvalidArgument("iters_per_level must be >= 0");
  if (!(step_size > 0.0)) throw InvalidArgument("step_size must be > 0");
  if (!(soften_sigma >= 0.0)) throw InvalidArgument("soften_sigma must be >= 0");
  if (!(update_sigma >= 0.0)) throw InvalidArgument("update_sigma must be >= 0");
  if (edge_kernel < 3 || edge_kernel % 2 == 0) throw InvalidArgument("kernel must be odd and >= 3");
  if (max_rejections < 1) throw InvalidArgument("max_rejections must be >= 1");
  if (correlation_channels < 2 || correlation_channels % 2 != 0) {
    throw InvalidArgument("correlation channel count must be even and >= 2");
  }

  std::vector<std::string> warnings;
  for (std::size_t r = 1; r < alpha.size(); ++r) {
    if (alpha[r] < alpha[r - 1]) {
      warnings.emplace_back("alpha is not increasing across rounds");
      break;
    }
  }
  for (std::size_t r = 1; r < beta.size(); ++r) {
    if (beta[r] > beta[r - 1]) {
      warnings.emplace_back("beta is not decreasing across rounds");
      break;
    }
  }
  return warnings;
}

}  // namespace maskwarp
