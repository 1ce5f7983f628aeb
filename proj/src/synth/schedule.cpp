#include <algorithm>
#include <random>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/synth.hpp"

namespace hdrfusion {

ScheduleMode parse_schedule_mode(const std::string& name) {
  if (name == "flicker") return ScheduleMode::Flicker;
  if (name == "smooth") return ScheduleMode::Smooth;
  throw InvalidInput("unknown schedule mode '" + name + "' (expected flicker or smooth)");
}

const char* to_string(ScheduleMode m) { return m == ScheduleMode::Flicker ? "flicker" : "smooth"; }

ExposureSchedule flicker_schedule(int frames, std::uint64_t seed) {
  if (frames < 1) throw InvalidInput("schedule needs at least one frame");
  ExposureSchedule s;
  s.mode = ScheduleMode::Flicker;
  s.seed = seed;
  std::mt19937_64 rng(split_seed(seed, 0xf11cULL));
  std::uniform_int_distribution<int> pick(0, 5);
  for (int i = 0; i < frames; ++i) s.exposure_ms.push_back(kFlickerExposures[pick(rng)]);
  return s;
}

double center_patch_mean(const ImageF& hdr, int patch) {
  if (patch < 1 || hdr.width() < patch || hdr.height() < patch) throw InvalidInput("patch larger than image");
  const int x0 = (hdr.width() - patch) / 2, y0 = (hdr.height() - patch) / 2;
  double s = 0;
  for (int y = y0; y < y0 + patch; ++y)
    for (int x = x0; x < x0 + patch; ++x)
      for (int c = 0; c < hdr.channels(); ++c) s += hdr(x, y, c);
  return s / (static_cast<double>(patch) * patch * hdr.channels());
}

double smooth_exposure(const ImageF& hdr, double C) {
  if (!(C > 0)) throw InvalidInput("exposure constant C must be positive");
  const double l = center_patch_mean(hdr);
  if (!(l > 0)) return kMaxExposureMs;
  return std::clamp(C / l, kMinExposureMs, kMaxExposureMs);
}

ExposureSchedule smooth_schedule(std::span<const HdrSourceFrame> sources, double C) {
  if (sources.empty()) throw InvalidInput("smooth schedule needs source frames");
  ExposureSchedule s;
  s.mode = ScheduleMode::Smooth;
  s.C = C;
  for (const HdrSourceFrame& f : sources) s.exposure_ms.push_back(smooth_exposure(f.hdr, C));
  return s;
}

}  // namespace hdrfusion
