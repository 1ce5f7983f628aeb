// hdrfusion command line: calibrate, synth, run, eval, errsurf.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "hdrfusion/errors.hpp"
#include "hdrfusion/eval.hpp"
#include "hdrfusion/image_io.hpp"
#include "hdrfusion/pipeline.hpp"

namespace fs = std::filesystem;
using namespace hdrfusion;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDiverged = 2, kIo = 3 };

struct Common {
  std::string config, calib, objective, pcf, mode, out;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg;
  if (!c.config.empty()) cfg = load_config(c.config, cfg);
  if (!c.calib.empty()) cfg.calib = c.calib;
  if (!c.objective.empty()) cfg.tracker.objective = parse_objective(c.objective);
  if (!c.pcf.empty()) cfg.tracker.pcf_variant = parse_pcf_variant(c.pcf);
  if (!c.mode.empty()) cfg.mode = parse_tracking_mode(c.mode);
  if (!c.out.empty()) cfg.output = c.out;
  if (c.seed) cfg.synth.seed = *c.seed;
  cfg.validate();
  return cfg;
}

std::vector<LdrExposure> read_exposure_stack(const fs::path& dir) {
  std::ifstream in(dir / "exposure.csv");
  if (!in) throw IoError("missing exposure.csv in " + dir.string());
  std::vector<LdrExposure> out;
  std::string line;
  while (std::getline(in, line)) {
    int idx = 0;
    double ms = 0;
    if (std::sscanf(line.c_str(), "%d,%lf", &idx, &ms) != 2) continue;
    out.push_back({io::read_png8(dir / frame_name(idx, "png")), ms});
  }
  return out;
}

int cmd_calibrate(const fs::path& input, const fs::path& out, double lambda) {
  const std::vector<LdrExposure> stack = read_exposure_stack(input / "exposure_stack");
  const ResponseCurve curve = estimate_crf(stack, lambda);
  std::vector<ImageU8> still;
  for (const LdrExposure& e : read_exposure_stack(input / "noise_stack")) still.push_back(e.rgb);
  const NoiseModel noise = estimate_noise(still, curve);
  save_calibration(out, Calibration::from(curve, noise));
  std::printf("sigma_s %.6g %.6g %.6g\nsigma_c %.6g %.6g %.6g\nm %.6g\n", noise.sigma_s[0], noise.sigma_s[1],
              noise.sigma_s[2], noise.sigma_c[0], noise.sigma_c[1], noise.sigma_c[2], noise.m);
  return kOk;
}

int cmd_synth(const PipelineConfig& cfg, const fs::path& out) {
  const Scene scene = Scene::room();
  write_sequence(out, scene, cfg.synth);
  if (cfg.synth_calibration_stacks) write_calibration_stacks(out / "calibration", scene, cfg.synth);
  std::printf("wrote %d frames (%s) to %s\n", cfg.synth.frames, to_string(cfg.synth.mode), out.c_str());
  return kOk;
}

int cmd_run(const PipelineConfig& cfg) {
  const PipelineResult r = run_pipeline(cfg);
  std::printf("frames %zu, diverged %d, outputs in %s\n", r.trajectory.size(), r.diverged_frames,
              cfg.output.c_str());
  return r.diverged_frames > 0 ? kDiverged : kOk;
}

std::vector<Pose> poses_of(const std::vector<StampedPose>& s) {
  std::vector<Pose> out;
  for (const StampedPose& p : s) out.push_back(p.pose);
  return out;
}

int cmd_eval(const fs::path& trajectory, const fs::path& groundtruth, const fs::path& out) {
  std::vector<Pose> est = poses_of(read_trajectory(trajectory));
  std::vector<Pose> gt = poses_of(read_trajectory(groundtruth));
  if (gt.size() > est.size()) gt.resize(est.size());
  const TrajectoryReport r = trajectory_errors(est, gt);
  fs::create_directories(out);
  write_report_csv(out / "report.csv", r);
  write_report_json(out / "report.json", r);
  std::printf("ate_rmse_m %.6f\nfinal_drift_m %.6f\nmean_rot_err_deg %.6f\n", r.ate_rmse_m, r.final_drift_m,
              r.mean_rot_err_deg);
  return kOk;
}

int cmd_errsurf(const PipelineConfig& cfg, int ref_index, int live_index, const std::string& axis_name,
                double range, double step, const fs::path& out) {
  static const char* kAxes[6] = {"tx", "ty", "tz", "rx", "ry", "rz"};
  int axis = -1;
  for (int a = 0; a < 6; ++a)
    if (axis_name == kAxes[a]) axis = a;
  if (axis < 0) throw InvalidInput("axis must be one of tx ty tz rx ry rz");
  if (cfg.calib.empty()) throw InvalidInput("errsurf needs --calib");
  const SequenceReader seq(cfg.sequence);
  const Calibration calib = load_calibration(cfg.calib);
  const auto& gt = seq.ground_truth();
  if (ref_index < 0 || live_index < 0 || static_cast<std::size_t>(std::max(ref_index, live_index)) >= seq.size())
    throw InvalidInput("frame index out of range");
  if (gt.size() < seq.size()) throw InvalidInput("errsurf needs groundtruth.txt for the center pose");
  const Pose center = gt[live_index].pose.inverse() * gt[ref_index].pose;
  const TrackingFrame ref = prepare_frame(seq.frame(ref_index), seq.camera(), calib, cfg.tracker);
  const TrackingFrame live = prepare_frame(seq.frame(live_index), seq.camera(), calib, cfg.tracker);
  const ErrorSurface s = error_surface(ref, live, center, cfg.tracker, axis, -range, range, step);
  write_error_surface(out, s);
  std::printf("argmin offset %.6f\n", s.argmin());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HDR RGB-D fusion with exposure-invariant tracking"};
  app.require_subcommand(1);
  app.footer("Configuration (JSON, all keys optional; defaults shown):\n" + config_to_json(PipelineConfig{}));

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config, "JSON configuration file");
    sub->add_option("--calib", common.calib, "calibration JSON");
    sub->add_option("--objective", common.objective, "raw | ncc | comp | norm");
    sub->add_option("--pcf", common.pcf, "p0 | p1 | p2 | p3");
    sub->add_option("--mode", common.mode, "frame_to_model | frame_to_frame");
    sub->add_option("--seed", common.seed, "random seed");
    sub->add_option("--out", common.out, "output path");
  };

  std::string input, sequence, trajectory, groundtruth, schedule, axis = "tx";
  double lambda = 10.0, range = 0.02, step = 0.001;
  int frames = 0, ref_index = 0, live_index = 1;

  CLI::App* calibrate = app.add_subcommand("calibrate", "recover CRF and noise model from stacks");
  add_common(calibrate);
  calibrate->add_option("--input", input, "directory with exposure_stack/ and noise_stack/")->required();
  calibrate->add_option("--lambda", lambda, "smoothness weight")->capture_default_str();

  CLI::App* synth = app.add_subcommand("synth", "render a synthetic sequence");
  add_common(synth);
  synth->add_option("--schedule", schedule, "flicker | smooth");
  synth->add_option("--frames", frames, "frame count");

  CLI::App* run = app.add_subcommand("run", "track and fuse a sequence");
  add_common(run);
  run->add_option("--sequence", sequence, "sequence directory");

  CLI::App* eval = app.add_subcommand("eval", "trajectory errors against ground truth");
  add_common(eval);
  eval->add_option("--trajectory", trajectory, "estimated trajectory")->required();
  eval->add_option("--groundtruth", groundtruth, "ground-truth trajectory")->required();

  CLI::App* errsurf = app.add_subcommand("errsurf", "1-D error surface around the ground-truth pose");
  add_common(errsurf);
  errsurf->add_option("--sequence", sequence, "sequence directory")->required();
  errsurf->add_option("--ref", ref_index, "reference frame index")->capture_default_str();
  errsurf->add_option("--live", live_index, "live frame index")->capture_default_str();
  errsurf->add_option("--axis", axis, "tx ty tz rx ry rz")->capture_default_str();
  errsurf->add_option("--range", range, "half range")->capture_default_str();
  errsurf->add_option("--step", step, "grid step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    PipelineConfig cfg = resolve(common);
    if (calibrate->parsed()) return cmd_calibrate(input, common.out.empty() ? "calib.json" : common.out, lambda);
    if (synth->parsed()) {
      if (!schedule.empty()) cfg.synth.mode = parse_schedule_mode(schedule);
      if (frames > 0) cfg.synth.frames = frames;
      return cmd_synth(cfg, common.out.empty() ? fs::path("sequence") : fs::path(common.out));
    }
    if (!sequence.empty()) cfg.sequence = sequence;
    if (run->parsed()) return cmd_run(cfg);
    if (eval->parsed()) return cmd_eval(trajectory, groundtruth, cfg.output);
    if (errsurf->parsed())
      return cmd_errsurf(cfg, ref_index, live_index, axis, range, step,
                         common.out.empty() ? fs::path("errsurf.csv") : fs::path(common.out));
  } catch (const IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
