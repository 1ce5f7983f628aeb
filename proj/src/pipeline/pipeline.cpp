#include <cmath>
#include <cstdio>
#include <numbers>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/image_io.hpp"
#include "hdrfusion/pipeline.hpp"

namespace hdrfusion {

namespace fs = std::filesystem;

void write_tracking_log(const fs::path& path, const std::vector<FrameLog>& log) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "frame,exposure_ms,exposure_scale,scale_fallback,residual_rms,valid_fraction,iterations,diverged\n");
  for (const FrameLog& r : log)
    std::fprintf(f, "%d,%.9g,%.9f,%d,%.9f,%.9f,%d,%d\n", r.frame, r.exposure_ms, r.exposure_scale,
                 r.scale_fallback ? 1 : 0, r.residual_rms, r.valid_fraction, r.iterations, r.diverged ? 1 : 0);
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

PipelineResult run_pipeline(const PipelineConfig& cfg, bool write_outputs) {
  cfg.validate();
  if (cfg.calib.empty()) throw InvalidInput("no calibration file given");
  if (!fs::is_regular_file(cfg.calib)) throw IoError("calibration file not found: " + cfg.calib.string());
  if (cfg.sequence.empty()) throw InvalidInput("no sequence directory given");
  const SequenceReader seq(cfg.sequence);
  const Calibration calib = load_calibration(cfg.calib);
  const CameraModel cam = seq.camera();
  std::size_t n = seq.size();
  if (cfg.max_frames > 0) n = std::min<std::size_t>(n, static_cast<std::size_t>(cfg.max_frames));

  if (write_outputs) {
    fs::create_directories(cfg.output);
    if (cfg.prediction_every > 0) fs::create_directories(cfg.output / "pred");
  }

  PipelineResult result;
  result.camera = cam;
  result.volume = TsdfVolume(cfg.volume);
  TsdfVolume& volume = result.volume;
  const bool have_stamps = seq.ground_truth().size() >= n;

  Pose pose = Pose::identity();
  SurfacePrediction pred;
  RgbdFrame prev;
  double first_exposure = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const RgbdFrame frame = seq.frame(i);
    const RadianceFrame rad = to_radiance(frame, calib.curve, calib.pcf);
    FrameLog row;
    row.frame = frame.index;
    row.exposure_ms = frame.exposure_ms;

    bool fuse = true;
    Pose ref_to_live = Pose::identity();
    if (i == 0) {
      first_exposure = frame.exposure_ms;
    } else {
      try {
        const TrackingFrame live = prepare_frame(frame, cam, calib, cfg.tracker);
        const TrackingFrame ref = cfg.mode == TrackingMode::FrameToModel
                                      ? prepare_prediction(pred, cam, calib, cfg.tracker)
                                      : prepare_frame(prev, cam, calib, cfg.tracker);
        const TrackResult tr = track_frame(ref, live, Pose::identity(), cfg.tracker);
        row.residual_rms = tr.residual_rms;
        row.valid_fraction = tr.valid_fraction;
        for (int it : tr.iterations) row.iterations += it;
        const bool plausible = tr.pose.translation.norm() <= cfg.max_step_translation &&
                               tr.pose.angle() * 180.0 / std::numbers::pi <= cfg.max_step_rotation_deg;
        fuse = tr.converged && plausible;
        ref_to_live = tr.pose;
      } catch (const InsufficientOverlap&) {
        fuse = false;
      }
      if (fuse) {
        pose = pose * ref_to_live.inverse();
      } else {
        // Hold the last pose and leave the model untouched.
        row.diverged = true;
        ++result.diverged_frames;
        std::fprintf(stderr, "frame %d: tracking diverged, holding pose\n", frame.index);
      }
    }

    if (fuse) {
      double scale = 1.0;
      if (i > 0) {
        try {
          scale = estimate_exposure_scale(pred, rad, frame.depth, cam, ref_to_live, cfg.exposure).scale;
        } catch (const Error&) {
          scale = first_exposure / frame.exposure_ms;
          row.scale_fallback = true;
        }
      }
      row.exposure_scale = scale;
      integrate(volume, make_fusion_frame(rad, frame.depth, scale, cfg.tracker.patch_radius), cam, pose,
                cfg.fusion);
      pred = raycast(volume, pose, cam);
    }

    if (write_outputs && cfg.prediction_every > 0 && i % static_cast<std::size_t>(cfg.prediction_every) == 0)
      io::write_pfm(cfg.output / "pred" / frame_name(frame.index, "pfm"), pred.radiance);

    const double stamp = have_stamps ? seq.ground_truth()[i].timestamp : static_cast<double>(frame.index) / 30.0;
    result.trajectory.push_back({stamp, pose});
    result.log.push_back(row);
    prev = frame;
  }

  if (write_outputs) {
    write_trajectory(cfg.output / "trajectory.txt", result.trajectory);
    write_tracking_log(cfg.output / "tracking_log.csv", result.log);
    write_volume(cfg.output / "volume.bin", volume);
    try {
      write_ply(cfg.output / "cloud.ply", extract_pointcloud(volume));
    } catch (const InvalidInput& e) {
      std::fprintf(stderr, "point cloud skipped: %s\n", e.what());
    }
  }
  return result;
}

}  // namespace hdrfusion
