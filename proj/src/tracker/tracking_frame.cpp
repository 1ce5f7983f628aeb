#include <algorithm>
#include <cmath>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/parallel.hpp"
#include "hdrfusion/tracker.hpp"

namespace hdrfusion {

std::size_t SurfacePrediction::valid_count() const {
  std::size_t n = 0;
  for (std::uint8_t v : valid.data()) n += v ? 1 : 0;
  return n;
}

Objective parse_objective(const std::string& name) {
  if (name == "raw" || name == "raw_intensity" || name == "RAW_INTENSITY") return Objective::RawIntensity;
  if (name == "ncc" || name == "NCC") return Objective::Ncc;
  if (name == "comp" || name == "comp_radiance" || name == "COMP_RADIANCE") return Objective::CompRadiance;
  if (name == "norm" || name == "norm_radiance" || name == "NORM_RADIANCE") return Objective::NormRadiance;
  throw InvalidInput("unknown objective '" + name + "' (expected raw, ncc, comp or norm)");
}

const char* to_string(Objective o) {
  switch (o) {
    case Objective::RawIntensity: return "raw";
    case Objective::Ncc: return "ncc";
    case Objective::CompRadiance: return "comp";
    case Objective::NormRadiance: return "norm";
  }
  return "?";
}

int TrackerConfig::iterations_at(int level) const {
  // level counts from the finest (0); the vector runs coarse to fine.
  const int idx = pyramid_levels - 1 - level;
  if (max_iterations.empty()) return 1;
  return max_iterations[std::min<std::size_t>(idx, max_iterations.size() - 1)];
}

void TrackerConfig::validate() const {
  if (pyramid_levels < 1) throw InvalidInput("tracker needs at least one pyramid level");
  if (max_iterations.empty()) throw InvalidInput("tracker iteration list is empty");
  for (int it : max_iterations)
    if (it < 1) throw InvalidInput("tracker iterations must be >= 1");
  if (!(min_valid_fraction > 0 && min_valid_fraction <= 1))
    throw InvalidInput("min_valid_fraction must be in (0, 1]");
  if (!(convergence_eps > 0)) throw InvalidInput("convergence_eps must be positive");
  if (!(depth_gate > 0)) throw InvalidInput("depth_gate must be positive");
  if (patch_radius < 1 || ncc_radius < 1) throw InvalidInput("patch radii must be >= 1");
}

std::size_t TrackingFrame::reference_valid(int level) const {
  std::size_t n = 0;
  const TrackingLevel& lv = levels.at(static_cast<std::size_t>(level));
  for (int y = 0; y < lv.valid.height(); ++y)
    for (int x = 0; x < lv.valid.width(); ++x) n += (lv.valid(x, y) && lv.depth(x, y) > 0) ? 1 : 0;
  return n;
}

namespace {

Mask invert(const Mask& m) {
  Mask out(m.width(), m.height(), 1);
  for (int y = 0; y < m.height(); ++y)
    for (int x = 0; x < m.width(); ++x) out(x, y) = m(x, y) ? 0 : 1;
  return out;
}

// Masks of pixels that are usable at every level: a coarse pixel is usable
// only when all four children are.
std::vector<Mask> usable_pyramid(const Mask& usable, int levels) {
  std::vector<Mask> bad = build_mask_pyramid_any(invert(usable), levels);
  for (Mask& m : bad) m = invert(m);
  return bad;
}

ImageF ones_like(const ImageF& img) { return ImageF(img.width(), img.height(), 1, 1.0f); }

void check_inputs(const CameraModel& cam, int w, int h, const TrackerConfig& cfg) {
  cfg.validate();
  if (!cam.valid()) throw InvalidInput("invalid camera intrinsics");
  if (cam.width != w || cam.height != h) throw InvalidInput("camera and frame resolution differ");
  check_pyramid_levels(w, h, cfg.pyramid_levels);
}

// Shared tail of the NORM_RADIANCE preparation: normalized radiance per
// level from radiance, a "do not use" mask and the depth pyramid.
void fill_normalized(TrackingFrame& out, const std::vector<ImageF>& radiance,
                     const std::vector<Mask>& unusable, const TrackerConfig& cfg, int first_level) {
  for (int l = first_level; l < cfg.pyramid_levels; ++l) {
    RadianceFrame rf;
    rf.radiance = radiance[l];
    rf.saturated = unusable[l];
    TrackingLevel& lv = out.levels[l];
    const NormalizedRadianceFrame n =
        normalize_radiance(rf, patch_radius_for_level(l, cfg.patch_radius), &lv.depth);
    lv.value = mean_normalized(n);
    lv.valid = n.valid;
  }
}

}  // namespace

TrackingFrame prepare_frame(const RgbdFrame& frame, const CameraModel& cam, const Calibration& calib,
                            const TrackerConfig& cfg) {
  const int w = frame.rgb.width(), h = frame.rgb.height();
  check_inputs(cam, w, h, cfg);
  if (!frame.depth.same_shape(frame.rgb)) throw InvalidInput("rgb and depth resolution differ");
  const int levels = cfg.pyramid_levels;

  TrackingFrame out;
  out.objective = cfg.objective;
  out.levels.resize(static_cast<std::size_t>(levels));
  const std::vector<ImageF> depth = build_depth_pyramid(frame.depth, levels);
  for (int l = 0; l < levels; ++l) {
    out.levels[l].camera = cam.at_level(l);
    out.levels[l].depth = depth[l];
  }

  if (cfg.objective == Objective::RawIntensity || cfg.objective == Objective::Ncc) {
    const std::vector<ImageF> gray = build_pyramid(channel_mean(frame.rgb), levels);
    for (int l = 0; l < levels; ++l) {
      TrackingLevel& lv = out.levels[l];
      lv.value = gray[l];
      lv.weight = ones_like(gray[l]);
      lv.valid = Mask(lv.value.width(), lv.value.height(), 1, 1);
      for (int y = 0; y < lv.valid.height(); ++y)
        for (int x = 0; x < lv.valid.width(); ++x) lv.valid(x, y) = lv.depth(x, y) > 0 ? 1 : 0;
    }
    return out;
  }

  const RadianceFrame rad = to_radiance(frame, calib.curve, calib.pcf);
  const std::vector<Mask> sat = build_mask_pyramid_any(rad.saturated, levels);

  if (cfg.objective == Objective::CompRadiance) {
    const std::vector<ImageF> lum = build_pyramid(channel_mean(rad.radiance), levels);
    for (int l = 0; l < levels; ++l) {
      TrackingLevel& lv = out.levels[l];
      lv.value = lum[l];
      lv.weight = ones_like(lum[l]);
      lv.valid = Mask(lv.value.width(), lv.value.height(), 1, 0);
      for (int y = 0; y < lv.valid.height(); ++y)
        for (int x = 0; x < lv.valid.width(); ++x)
          lv.valid(x, y) = (!sat[l](x, y) && lv.depth(x, y) > 0) ? 1 : 0;
    }
    return out;
  }

  // NORM_RADIANCE: residual weight is the PCF variant of the live pixel,
  // averaged over channels.
  ImageF weight(w, h, 1);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0;
      for (int c = 0; c < 3; ++c) s += apply_variant(cfg.pcf_variant, rad.channel_confidence(x, y, c));
      weight(x, y) = static_cast<float>(s / 3.0);
    }
  const std::vector<ImageF> weights = build_pyramid(weight, levels);
  for (int l = 0; l < levels; ++l) out.levels[l].weight = weights[l];
  fill_normalized(out, build_pyramid(rad.radiance, levels), sat, cfg, 0);
  return out;
}

TrackingFrame prepare_prediction(const SurfacePrediction& pred, const CameraModel& cam,
                                 const Calibration& calib, const TrackerConfig& cfg) {
  const int w = pred.width(), h = pred.height();
  check_inputs(cam, w, h, cfg);
  if (!pred.radiance.same_shape(pred.depth) || !pred.radiance_valid.same_shape(pred.depth))
    throw InvalidInput("prediction maps differ in size");
  const int levels = cfg.pyramid_levels;

  TrackingFrame out;
  out.objective = cfg.objective;
  out.levels.resize(static_cast<std::size_t>(levels));
  const std::vector<ImageF> depth = build_depth_pyramid(pred.depth, levels);
  Mask usable(w, h, 1, 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) usable(x, y) = (pred.radiance_valid(x, y) && pred.depth(x, y) > 0) ? 1 : 0;
  const std::vector<Mask> usable_pyr = usable_pyramid(usable, levels);
  for (int l = 0; l < levels; ++l) {
    out.levels[l].camera = cam.at_level(l);
    out.levels[l].depth = depth[l];
  }

  auto plain_levels = [&](const ImageF& base) {
    const std::vector<ImageF> pyr = build_pyramid(base, levels);
    for (int l = 0; l < levels; ++l) {
      TrackingLevel& lv = out.levels[l];
      lv.value = pyr[l];
      lv.weight = ones_like(pyr[l]);
      lv.valid = usable_pyr[l];
    }
  };

  if (cfg.objective == Objective::RawIntensity || cfg.objective == Objective::Ncc) {
    ImageF gray(w, h, 1, 0.0f);
    parallel_for(0, h, [&](int y) {
      for (int x = 0; x < w; ++x) {
        if (!usable(x, y)) continue;
        double s = 0;
        for (int c = 0; c < 3; ++c) s += calib.curve.intensity(c, pred.radiance(x, y, c));
        gray(x, y) = static_cast<float>(s / 3.0);
      }
    });
    plain_levels(gray);
    return out;
  }
  if (cfg.objective == Objective::CompRadiance) {
    plain_levels(channel_mean(pred.radiance));
    return out;
  }

  for (int l = 0; l < levels; ++l) out.levels[l].weight = ones_like(depth[l]);
  std::vector<Mask> unusable(usable_pyr.size());
  for (std::size_t l = 0; l < usable_pyr.size(); ++l) unusable[l] = invert(usable_pyr[l]);
  int first = 0;
  if (cfg.use_fused_nr) {
    TrackingLevel& lv = out.levels[0];
    lv.value = channel_mean(pred.nr);
    lv.valid = usable;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (!usable(x, y)) lv.value(x, y) = 0.0f;
    first = 1;
  }
  fill_normalized(out, build_pyramid(pred.radiance, levels), unusable, cfg, first);
  return out;
}

}  // namespace hdrfusion
