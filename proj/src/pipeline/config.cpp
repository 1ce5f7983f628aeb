#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/pipeline.hpp"

namespace hdrfusion {

using nlohmann::json;
namespace fs = std::filesystem;

TrackingMode parse_tracking_mode(const std::string& name) {
  if (name == "frame_to_model") return TrackingMode::FrameToModel;
  if (name == "frame_to_frame") return TrackingMode::FrameToFrame;
  throw InvalidInput("unknown mode '" + name + "' (expected frame_to_model or frame_to_frame)");
}

const char* to_string(TrackingMode m) {
  return m == TrackingMode::FrameToModel ? "frame_to_model" : "frame_to_frame";
}

void PipelineConfig::validate() const {
  tracker.validate();
  volume.validate();
  if (!(fusion.tau0 >= 0 && fusion.tau0 <= 1)) throw InvalidInput("tau0 must be in [0, 1]");
  if (!(fusion.tau1 >= 0 && fusion.tau1 <= 1)) throw InvalidInput("tau1 must be in [0, 1]");
  if (!(exposure.min_valid_fraction > 0 && exposure.min_valid_fraction <= 1))
    throw InvalidInput("exposure min_valid_fraction must be in (0, 1]");
  if (prediction_every < 0 || max_frames < 0) throw InvalidInput("frame counts must be non-negative");
  if (!(max_step_translation > 0) || !(max_step_rotation_deg > 0))
    throw InvalidInput("divergence limits must be positive");
  if (synth.frames < 1 || synth.supersample < 1) throw InvalidInput("synth frames and supersample must be >= 1");
  if (!(synth.C > 0)) throw InvalidInput("synth C must be positive");
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void read_path(const json& j, const char* key, fs::path& out) {
  if (j.contains(key)) out = j.at(key).get<std::string>();
}

json to_json(const PipelineConfig& c) {
  const TrackerConfig& t = c.tracker;
  const Vec3& o = c.volume.origin;
  return {
      {"sequence", c.sequence.string()},
      {"calib", c.calib.string()},
      {"output", c.output.string()},
      {"mode", to_string(c.mode)},
      {"tracker",
       {{"objective", to_string(t.objective)},
        {"pcf", to_string(t.pcf_variant)},
        {"pyramid_levels", t.pyramid_levels},
        {"iterations", t.max_iterations},
        {"convergence_eps", t.convergence_eps},
        {"min_valid_fraction", t.min_valid_fraction},
        {"depth_gate", t.depth_gate},
        {"patch_radius", t.patch_radius},
        {"ncc_radius", t.ncc_radius},
        {"use_fused_nr", t.use_fused_nr}}},
      {"mapper",
       {{"dims", c.volume.dims},
        {"extent", c.volume.extent},
        {"origin", {o.x(), o.y(), o.z()}},
        {"truncation_voxels", c.volume.truncation_voxels},
        {"w_max", c.volume.w_max},
        {"tau0", c.fusion.tau0},
        {"tau1", c.fusion.tau1}}},
      {"exposure",
       {{"pcf", to_string(c.exposure.variant)},
        {"depth_gate", c.exposure.depth_gate},
        {"min_valid_fraction", c.exposure.min_valid_fraction},
        {"per_pixel_ratio", c.exposure.per_pixel_ratio},
        {"literal_omega", c.exposure.literal_omega}}},
      {"pipeline",
       {{"prediction_every", c.prediction_every},
        {"max_frames", c.max_frames},
        {"max_step_translation", c.max_step_translation},
        {"max_step_rotation_deg", c.max_step_rotation_deg}}},
      {"synth",
       {{"frames", c.synth.frames},
        {"schedule", to_string(c.synth.mode)},
        {"seed", c.synth.seed},
        {"C", c.synth.C},
        {"noise", c.synth.add_noise},
        {"depth_noise", c.synth.add_depth_noise},
        {"supersample", c.synth.supersample},
        {"calibration_stacks", c.synth_calibration_stacks}}},
  };
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const PipelineConfig& base) {
  PipelineConfig c = base;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw InvalidInput("config must be a JSON object");
    read_path(j, "sequence", c.sequence);
    read_path(j, "calib", c.calib);
    read_path(j, "output", c.output);
    if (j.contains("mode")) c.mode = parse_tracking_mode(j.at("mode").get<std::string>());
    if (j.contains("tracker")) {
      const json& t = j.at("tracker");
      if (t.contains("objective")) c.tracker.objective = parse_objective(t.at("objective").get<std::string>());
      if (t.contains("pcf")) c.tracker.pcf_variant = parse_pcf_variant(t.at("pcf").get<std::string>());
      read(t, "pyramid_levels", c.tracker.pyramid_levels);
      read(t, "iterations", c.tracker.max_iterations);
      read(t, "convergence_eps", c.tracker.convergence_eps);
      read(t, "min_valid_fraction", c.tracker.min_valid_fraction);
      read(t, "depth_gate", c.tracker.depth_gate);
      read(t, "patch_radius", c.tracker.patch_radius);
      read(t, "ncc_radius", c.tracker.ncc_radius);
      read(t, "use_fused_nr", c.tracker.use_fused_nr);
    }
    if (j.contains("mapper")) {
      const json& m = j.at("mapper");
      read(m, "dims", c.volume.dims);
      read(m, "extent", c.volume.extent);
      if (m.contains("origin")) {
        const auto o = m.at("origin").get<std::vector<double>>();
        if (o.size() != 3) throw InvalidInput("mapper.origin needs 3 values");
        c.volume.origin = Vec3(o[0], o[1], o[2]);
      }
      read(m, "truncation_voxels", c.volume.truncation_voxels);
      read(m, "w_max", c.volume.w_max);
      read(m, "tau0", c.fusion.tau0);
      read(m, "tau1", c.fusion.tau1);
    }
    if (j.contains("exposure")) {
      const json& e = j.at("exposure");
      if (e.contains("pcf")) c.exposure.variant = parse_pcf_variant(e.at("pcf").get<std::string>());
      read(e, "depth_gate", c.exposure.depth_gate);
      read(e, "min_valid_fraction", c.exposure.min_valid_fraction);
      read(e, "per_pixel_ratio", c.exposure.per_pixel_ratio);
      read(e, "literal_omega", c.exposure.literal_omega);
    }
    if (j.contains("pipeline")) {
      const json& p = j.at("pipeline");
      read(p, "prediction_every", c.prediction_every);
      read(p, "max_frames", c.max_frames);
      read(p, "max_step_translation", c.max_step_translation);
      read(p, "max_step_rotation_deg", c.max_step_rotation_deg);
    }
    if (j.contains("synth")) {
      const json& s = j.at("synth");
      read(s, "frames", c.synth.frames);
      if (s.contains("schedule")) c.synth.mode = parse_schedule_mode(s.at("schedule").get<std::string>());
      read(s, "seed", c.synth.seed);
      read(s, "C", c.synth.C);
      read(s, "noise", c.synth.add_noise);
      read(s, "depth_noise", c.synth.add_depth_noise);
      read(s, "supersample", c.synth.supersample);
      read(s, "calibration_stacks", c.synth_calibration_stacks);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

PipelineConfig load_config(const fs::path& path, const PipelineConfig& base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

std::string config_to_json(const PipelineConfig& cfg) { return to_json(cfg).dump(2); }

}  // namespace hdrfusion
