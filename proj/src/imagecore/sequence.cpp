#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/image_io.hpp"
#include "hdrfusion/imagecore.hpp"

namespace hdrfusion {

namespace fs = std::filesystem;
using nlohmann::json;

std::string frame_name(int index, const char* extension) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%06d.%s", index, extension);
  return buf;
}

std::vector<StampedPose> read_trajectory(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory " + path.string());
  std::vector<StampedPose> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
      throw IoError("malformed trajectory line in " + path.string() + ": " + line);
    out.push_back({ts, Pose::from_quaternion(Eigen::Quaterniond(qw, qx, qy, qz), Vec3(tx, ty, tz))});
  }
  return out;
}

void write_trajectory(const fs::path& path, const std::vector<StampedPose>& poses) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot write trajectory " + path.string());
  for (const StampedPose& sp : poses) {
    Eigen::Quaterniond q = sp.pose.quaternion();
    if (q.w() < 0) q.coeffs() *= -1.0;
    const Vec3& t = sp.pose.translation;
    std::fprintf(f, "%.6f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n", sp.timestamp, t.x(), t.y(), t.z(),
                 q.x(), q.y(), q.z(), q.w());
  }
  if (std::fclose(f) != 0) throw IoError("failed to write " + path.string());
}

CameraModel read_camera_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  CameraModel cam;
  cam.fx = j.at("fx").get<double>();
  cam.fy = j.at("fy").get<double>();
  cam.cx = j.at("cx").get<double>();
  cam.cy = j.at("cy").get<double>();
  cam.width = j.at("width").get<int>();
  cam.height = j.at("height").get<int>();
  if (!cam.valid()) throw InvalidInput(path.string() + ": invalid camera intrinsics");
  return cam;
}

void write_camera_json(const fs::path& path, const CameraModel& cam) {
  json j = {{"fx", cam.fx}, {"fy", cam.fy},         {"cx", cam.cx},
            {"cy", cam.cy}, {"width", cam.width}, {"height", cam.height}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

SequenceReader::SequenceReader(fs::path root) : root_(std::move(root)) {
  if (!fs::is_directory(root_)) throw IoError("sequence directory not found: " + root_.string());
  camera_ = read_camera_json(root_ / "camera.json");

  std::ifstream in(root_ / "exposure.csv");
  if (!in) throw IoError("missing exposure.csv in " + root_.string());
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    int idx = 0;
    double ms = 0;
    if (std::sscanf(line.c_str(), "%d,%lf", &idx, &ms) != 2) continue;  // header row
    if (!(ms > 0)) throw InvalidInput("non-positive exposure in exposure.csv");
    exposures_.emplace_back(idx, ms);
  }
  if (exposures_.empty()) throw InvalidInput("exposure.csv lists no frames");

  if (fs::exists(root_ / "groundtruth.txt")) ground_truth_ = read_trajectory(root_ / "groundtruth.txt");
}

RgbdFrame SequenceReader::frame(std::size_t i) const {
  const int idx = exposures_.at(i).first;
  RgbdFrame f;
  f.index = idx;
  f.exposure_ms = exposures_.at(i).second;
  f.rgb = io::read_png8(root_ / "rgb" / frame_name(idx, "png"));
  if (f.rgb.channels() != 3) throw IoError("rgb frame is not 3-channel");
  const ImageU16 mm = io::read_png16(root_ / "depth" / frame_name(idx, "png"));
  if (!mm.same_shape(f.rgb)) throw InvalidInput("rgb and depth resolution differ");
  f.depth = ImageF(mm.width(), mm.height(), 1);
  for (int y = 0; y < mm.height(); ++y)
    for (int x = 0; x < mm.width(); ++x) f.depth(x, y) = static_cast<float>(mm(x, y)) * 1e-3f;
  return f;
}

}  // namespace hdrfusion
