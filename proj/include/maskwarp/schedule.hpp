#pragma once

#include <string>
#include <vector>

namespace maskwarp {

enum class InitMode { Zero, Centroid, Correlation };

InitMode parse_init_mode(const std::string& name);
std::string to_string(InitMode mode);

// Per-round weights and solver settings. Defaults: alpha {0.1, 0.2, 1},
// beta {0.1, 0.05, 0.01}, gamma 1, three rounds over a 1/4, 1/2, 1/1 pyramid.
struct WarpSchedule {
  std::vector<double> alpha{0.1, 0.2, 1.0};
  std::vector<double> beta{0.1, 0.05, 0.01};
  double gamma = 1.0;
  int pyramid_levels = 3;
  int iters_per_level = 300;
  double step_size = 1.0;
  double soften_sigma = 2.0;
  // Gaussian smoothing (level pixels) of the descent direction.
  double update_sigma = 4.0;
  int edge_kernel = 9;
  int max_rejections = 20;
  InitMode init = InitMode::Centroid;
  int correlation_channels = 256;

  int rounds() const noexcept { return static_cast<int>(alpha.size()); }

  // Throws InvalidArgument on hard violations; returns soft warnings
  // (alpha not increasing, beta not decreasing).
  std::vector<std::string> validate() const;
};

}  // namespace maskwarp
