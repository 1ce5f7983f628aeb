#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/mapper.hpp"

namespace hdrfusion {
namespace {

constexpr int kSaturationMargin = 2;

}  // namespace

ExposureScale estimate_exposure_scale(const SurfacePrediction& pred, const RadianceFrame& live,
                                      const ImageF& live_depth, const CameraModel& cam, const Pose& ref_to_live,
                                      const ExposureOptions& opt) {
  const int w = pred.width(), h = pred.height();
  if (w != cam.width || h != cam.height || !live.radiance.same_shape(live_depth) ||
      !live.radiance.same_shape(pred.depth))
    throw InvalidInput("exposure scale inputs differ in size");

  // Fixed raster order keeps the sums reproducible.
  double sum_w = 0, sum_wr = 0, sum_ref = 0, sum_live = 0;
  std::size_t count = 0, candidates = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!pred.radiance_valid(x, y)) continue;
      const double d = pred.depth(x, y);
      if (!(d > 0)) continue;
      ++candidates;
      const Vec3 pl = ref_to_live * Vec3((x - cam.cx) * d / cam.fx, (y - cam.cy) * d / cam.fy, d);
      if (!(pl.z() > 0)) continue;
      const double ux = cam.fx * pl.x() / pl.z() + cam.cx;
      const double uy = cam.fy * pl.y() / pl.z() + cam.cy;
      if (!(ux >= 0 && uy >= 0 && ux < w - 1 && uy < h - 1)) continue;
      // The model is blurrier than the live frame and bleeds clipped
      // highlights into their surroundings; keep clear of saturation.
      const int x0 = static_cast<int>(ux), y0 = static_cast<int>(uy);
      bool clipped = false;
      for (int yy = std::max(0, y0 - kSaturationMargin); yy <= std::min(h - 1, y0 + 1 + kSaturationMargin); ++yy)
        for (int xx = std::max(0, x0 - kSaturationMargin); xx <= std::min(w - 1, x0 + 1 + kSaturationMargin); ++xx)
          clipped = clipped || live.saturated(xx, yy);
      if (clipped) continue;
      const int xn = static_cast<int>(std::lround(ux)), yn = static_cast<int>(std::lround(uy));
      const double dl = live_depth(xn, yn);
      if (!(dl > 0) || std::abs(dl - pl.z()) > opt.depth_gate) continue;

      double r_ref = 0, r_live = 0, p = 0;
      for (int c = 0; c < 3; ++c) {
        r_ref += pred.radiance(x, y, c);
        r_live += bilinear(live.radiance, ux, uy, c);
        p += apply_variant(opt.variant, live.channel_confidence(xn, yn, c));
      }
      const double ratio = r_ref / r_live;
      if (!(r_live > 0) || !std::isfinite(ratio)) continue;
      p /= 3.0;
      sum_w += p;
      sum_wr += p * ratio;
      sum_ref += p * r_ref;
      sum_live += p * r_live;
      ++count;
    }
  const double fraction = candidates ? static_cast<double>(count) / candidates : 0.0;
  if (count == 0 || fraction < opt.min_valid_fraction) throw InsufficientOverlap(fraction);
  double scale = sum_ref / sum_live;
  if (opt.per_pixel_ratio) scale = opt.literal_omega ? sum_wr / static_cast<double>(count) : sum_wr / sum_w;
  if (!(scale > 0) || !std::isfinite(scale)) throw InvalidInput("exposure scale is not finite");
  return {scale, count};
}

}  // namespace hdrfusion
