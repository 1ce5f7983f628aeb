#include <cmath>
#include <cstdio>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/image_io.hpp"
#include "hdrfusion/synth.hpp"

namespace hdrfusion {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kScheduleStream = 1;
constexpr std::uint64_t kImageStream = 1000;
constexpr std::uint64_t kDepthStream = 1000000;

ImageU16 to_millimeters(const ImageF& depth) {
  ImageU16 mm(depth.width(), depth.height(), 1, 0);
  for (int y = 0; y < depth.height(); ++y)
    for (int x = 0; x < depth.width(); ++x) {
      const double d = depth(x, y);
      if (d > 0) mm(x, y) = static_cast<std::uint16_t>(std::min(65535.0, std::round(d * 1000.0)));
    }
  return mm;
}

NoiseModel sensor_noise(const SequenceSpec& spec) {
  return spec.add_noise ? spec.sensor.noise() : NoiseModel::none();
}

void write_exposure_csv(const fs::path& path, const std::vector<std::pair<int, double>>& rows) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "index,exposure_ms\n");
  for (const auto& [i, ms] : rows) std::fprintf(f, "%d,%.9g\n", i, ms);
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

}  // namespace

void write_sequence(const fs::path& dir, const Scene& scene, const SequenceSpec& spec) {
  if (spec.frames < 1) throw InvalidInput("sequence needs at least one frame");
  fs::create_directories(dir / "rgb");
  fs::create_directories(dir / "depth");
  fs::create_directories(dir / "hdr");
  write_camera_json(dir / "camera.json", spec.camera);
  save_calibration(dir / "calib.json", spec.sensor.calibration());

  const std::vector<Pose> poses = default_trajectory(spec.frames);
  const ExposureSchedule flicker = flicker_schedule(spec.frames, split_seed(spec.seed, kScheduleStream));
  const NoiseModel noise = sensor_noise(spec);
  std::vector<std::pair<int, double>> exposures;
  std::vector<StampedPose> gt;
  for (int i = 0; i < spec.frames; ++i) {
    HdrSourceFrame src = scene.render_view(poses[i], spec.camera, spec.supersample);
    src.timestamp = i / 30.0;
    const double ms =
        spec.mode == ScheduleMode::Flicker ? flicker.exposure_ms[i] : smooth_exposure(src.hdr, spec.C);
    RgbdFrame frame = simulate_ldr(src, ms, spec.sensor.curve, noise, split_seed(spec.seed, kImageStream + i),
                                   spec.sensor.gain);
    const ImageF depth =
        spec.add_depth_noise ? depth_noise(src.depth, split_seed(spec.seed, kDepthStream + i)) : src.depth;
    io::write_png8(dir / "rgb" / frame_name(i, "png"), frame.rgb);
    io::write_png16(dir / "depth" / frame_name(i, "png"), to_millimeters(depth));
    io::write_pfm(dir / "hdr" / frame_name(i, "pfm"), src.hdr);
    exposures.emplace_back(i, ms);
    gt.push_back({src.timestamp, poses[i]});
  }
  write_exposure_csv(dir / "exposure.csv", exposures);
  write_trajectory(dir / "groundtruth.txt", gt);
}

void write_calibration_stacks(const fs::path& dir, const Scene& scene, const SequenceSpec& spec) {
  const fs::path stack = dir / "exposure_stack";
  const fs::path still = dir / "noise_stack";
  fs::create_directories(stack);
  fs::create_directories(still);
  const Pose view = default_trajectory(1).front();
  const HdrSourceFrame src = scene.render_view(view, spec.camera, spec.supersample);
  const NoiseModel noise = sensor_noise(spec);

  std::vector<std::pair<int, double>> rows;
  for (int i = 0; i < 8; ++i) {
    const double ms = std::ldexp(1.0, i);
    const RgbdFrame f =
        simulate_ldr(src, ms, spec.sensor.curve, noise, split_seed(spec.seed, 77 + i), spec.sensor.gain);
    io::write_png8(stack / frame_name(i, "png"), f.rgb);
    rows.emplace_back(i, ms);
  }
  write_exposure_csv(stack / "exposure.csv", rows);

  const double ms = smooth_exposure(src.hdr, spec.C);
  rows.clear();
  for (int i = 0; i < 12; ++i) {
    const RgbdFrame f =
        simulate_ldr(src, ms, spec.sensor.curve, noise, split_seed(spec.seed, 500 + i), spec.sensor.gain);
    io::write_png8(still / frame_name(i, "png"), f.rgb);
    rows.emplace_back(i, ms);
  }
  write_exposure_csv(still / "exposure.csv", rows);
}

}  // namespace hdrfusion
