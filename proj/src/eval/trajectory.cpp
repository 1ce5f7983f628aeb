#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/eval.hpp"

namespace hdrfusion {

TrajectoryReport trajectory_errors(std::span<const Pose> estimated, std::span<const Pose> ground_truth) {
  if (estimated.size() != ground_truth.size())
    throw InvalidInput("trajectory lengths differ (" + std::to_string(estimated.size()) + " vs " +
                       std::to_string(ground_truth.size()) + ")");
  TrajectoryReport r;
  if (estimated.empty()) return r;
  const Pose align = ground_truth.front() * estimated.front().inverse();
  double sq = 0, rot = 0;
  for (std::size_t i = 0; i < estimated.size(); ++i) {
    const Pose e = align * estimated[i];
    const double t = (e.translation - ground_truth[i].translation).norm();
    const Pose dr{e.rotation * ground_truth[i].rotation.transpose(), Vec3::Zero()};
    const double a = dr.angle() * 180.0 / std::numbers::pi;
    r.trans_err_m.push_back(t);
    r.rot_err_deg.push_back(a);
    sq += t * t;
    rot += a;
  }
  const double n = static_cast<double>(estimated.size());
  r.ate_rmse_m = std::sqrt(sq / n);
  r.final_drift_m = r.trans_err_m.back();
  r.mean_rot_err_deg = rot / n;
  return r;
}

void write_report_csv(const std::filesystem::path& path, const TrajectoryReport& report) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write " + path.string());
  std::fprintf(f, "frame,rot_err_deg,trans_err_m\n");
  for (std::size_t i = 0; i < report.trans_err_m.size(); ++i)
    std::fprintf(f, "%zu,%.9f,%.9f\n", i, report.rot_err_deg[i], report.trans_err_m[i]);
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

void write_report_json(const std::filesystem::path& path, const TrajectoryReport& report) {
  const nlohmann::json j = {{"ate_rmse_m", report.ate_rmse_m},
                            {"final_drift_m", report.final_drift_m},
                            {"mean_rot_err_deg", report.mean_rot_err_deg},
                            {"frames", report.trans_err_m.size()}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace hdrfusion
