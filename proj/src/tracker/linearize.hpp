#pragma once

#include <vector>

#include "hdrfusion/tracker.hpp"

namespace hdrfusion::detail {

/// Sums over all accepted correspondences at one pose.
struct Linearization {
  Mat6 H = Mat6::Zero();
  Vec6 g = Vec6::Zero();  // sum of r * J
  double cost_sum = 0;    // sum of r^2
  double ref_live = 0;    // COMP_RADIANCE: sum of a * L
  double live_sq = 0;     // COMP_RADIANCE: sum of L^2
  std::size_t count = 0;
  std::size_t reference = 0;  // valid reference pixels

  double cost() const { return count ? cost_sum / static_cast<double>(count) : 0.0; }
  double fraction() const { return reference ? static_cast<double>(count) / reference : 0.0; }
  /// Closed-form exposure scale minimizing sum (a - s L)^2.
  double optimal_scale(double fallback) const {
    return live_sq > 0 && ref_live > 0 ? ref_live / live_sq : fallback;
  }
};

struct LinearizeOptions {
  bool jacobian = true;
  double scale = 1.0;
  /// When set, only these reference pixels are used and the gates are skipped.
  const std::vector<int>* fixed = nullptr;
  /// When set, receives the accepted reference pixel indices in raster order.
  std::vector<int>* accepted = nullptr;
};

Linearization linearize(const TrackingFrame& ref, const TrackingFrame& live, int level, const Pose& pose,
                        const TrackerConfig& cfg, const LinearizeOptions& opt);

}  // namespace hdrfusion::detail
