#include <cmath>
#include <cstdio>
#include <limits>

#include <Eigen/Cholesky>

#include "hdrfusion/errors.hpp"
#include "linearize.hpp"

namespace hdrfusion {

TrackResult track_frame(const TrackingFrame& ref, const TrackingFrame& live, const Pose& init,
                        const TrackerConfig& cfg) {
  cfg.validate();
  if (!init.is_finite()) throw InvalidInput("initial pose is not finite");
  const int levels = std::min<int>(cfg.pyramid_levels, static_cast<int>(ref.levels.size()));
  const bool comp = ref.objective == Objective::CompRadiance;

  TrackResult result;
  result.pose = init;
  result.iterations.assign(static_cast<std::size_t>(levels), 0);

  auto fail = [&]() {
    TrackResult r;
    r.pose = init;
    r.converged = false;
    r.iterations = result.iterations;
    return r;
  };

  Pose pose = init;
  double scale = 1.0;
  detail::LinearizeOptions opt;
  for (int level = levels - 1; level >= 0; --level) {
    Pose best_pose = pose;
    double best_cost = std::numeric_limits<double>::infinity();
    double best_fraction = 0;
    int& iters = result.iterations[static_cast<std::size_t>(levels - 1 - level)];

    for (int it = 0; it < cfg.iterations_at(level); ++it) {
      if (comp) {
        detail::LinearizeOptions sopt;
        sopt.jacobian = false;
        sopt.scale = scale;
        scale = detail::linearize(ref, live, level, pose, cfg, sopt).optimal_scale(scale);
      }
      opt.scale = scale;
      const detail::Linearization lin = detail::linearize(ref, live, level, pose, cfg, opt);
      if (lin.count < 6 || lin.fraction() < cfg.min_valid_fraction) throw InsufficientOverlap(lin.fraction());
      const double cost = lin.cost();
      if (!std::isfinite(cost)) return fail();
      if (cost < best_cost) {
        best_cost = cost;
        best_pose = pose;
        best_fraction = lin.fraction();
      }
      const Vec6 delta = lin.H.ldlt().solve(-lin.g);
      if (!delta.allFinite()) return fail();
      pose = Pose::exp(delta) * pose;
      ++iters;
      if (delta.norm() < cfg.convergence_eps) break;
    }

    // The last update has not been scored yet.
    try {
      const ObjectiveValue v = evaluate_objective(ref, live, level, pose, cfg, scale);
      if (v.cost < best_cost) {
        best_cost = v.cost;
        best_pose = pose;
        best_fraction = v.valid_fraction;
      }
    } catch (const InsufficientOverlap&) {
    }
    if (!best_pose.is_finite()) return fail();
    pose = best_pose;
    if (level == 0) {
      result.residual_rms = std::sqrt(best_cost);
      result.valid_fraction = best_fraction;
    }
  }
  result.pose = pose;
  result.converged = true;
  result.exposure_scale = scale;
  return result;
}

double ErrorSurface::argmin() const {
  double best = std::numeric_limits<double>::infinity(), at = std::numeric_limits<double>::quiet_NaN();
  for (const auto& [offset, cost] : samples)
    if (std::isfinite(cost) && cost < best) {
      best = cost;
      at = offset;
    }
  return at;
}

ErrorSurface error_surface(const TrackingFrame& ref, const TrackingFrame& live, const Pose& center,
                           const TrackerConfig& cfg, int axis, double lo, double hi, double step) {
  if (axis < 0 || axis > 5) throw InvalidInput("error surface axis must be 0..5");
  if (!(step > 0) || !(hi >= lo)) throw InvalidInput("invalid error surface grid");
  ErrorSurface s;
  s.objective = ref.objective;
  s.axis = axis;
  const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int i = 0; i < n; ++i) {
    const double offset = lo + i * step;
    Vec6 twist = Vec6::Zero();
    twist[axis] = offset;
    const Pose pose = Pose::exp(twist) * center;
    double cost = std::numeric_limits<double>::quiet_NaN();
    try {
      double scale = 1.0;
      if (ref.objective == Objective::CompRadiance) {
        detail::LinearizeOptions opt;
        opt.jacobian = false;
        scale = detail::linearize(ref, live, 0, pose, cfg, opt).optimal_scale(1.0);
      }
      cost = evaluate_objective(ref, live, 0, pose, cfg, scale).cost;
    } catch (const InsufficientOverlap&) {
    }
    s.samples.emplace_back(offset, cost);
  }
  return s;
}

void write_error_surface(const std::filesystem::path& path, const ErrorSurface& surface) {
  static const char* kAxes[6] = {"tx", "ty", "tz", "rx", "ry", "rz"};
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "# objective=%s axis=%s\n", to_string(surface.objective), kAxes[surface.axis]);
  std::fprintf(f, "offset,cost\n");
  for (const auto& [offset, cost] : surface.samples) std::fprintf(f, "%.9f,%.9g\n", offset, cost);
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

}  // namespace hdrfusion
