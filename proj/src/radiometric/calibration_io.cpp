#include <fstream>

#include <nlohmann/json.hpp>

#include "hdrfusion/errors.hpp"
#include "hdrfusion/radiometric.hpp"

namespace hdrfusion {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

LevelTable read_table(const json& j, const char* key, int c) {
  const json& arr = j.at(key).at(c);
  if (!arr.is_array() || arr.size() != kLevels)
    throw IoError(std::string("calibration table '") + key + "' must have 256 entries");
  LevelTable t{};
  for (int i = 0; i < kLevels; ++i) t[i] = arr[i].get<double>();
  return t;
}

}  // namespace

void save_calibration(const fs::path& path, const Calibration& calib) {
  json j;
  j["f_inv"] = json::array();
  j["df"] = json::array();
  j["pcf"] = json::array();
  for (int c = 0; c < 3; ++c) {
    j["f_inv"].push_back(calib.curve.inverse_table(c));
    j["df"].push_back(calib.curve.derivative_table(c));
    j["pcf"].push_back(calib.pcf.p[c]);
  }
  j["sigma_s"] = calib.noise.sigma_s;
  j["sigma_c"] = calib.noise.sigma_c;
  j["m"] = calib.noise.m;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write calibration " + path.string());
  out << j.dump(1) << "\n";
  if (!out) throw IoError("failed to write calibration " + path.string());
}

Calibration load_calibration(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open calibration " + path.string());
  try {
    json j;
    in >> j;
    std::array<LevelTable, 3> inv{}, der{};
    Calibration calib;
    for (int c = 0; c < 3; ++c) {
      inv[c] = read_table(j, "f_inv", c);
      der[c] = read_table(j, "df", c);
      calib.pcf.p[c] = read_table(j, "pcf", c);
    }
    calib.curve = ResponseCurve(inv, der);
    calib.noise.sigma_s = j.at("sigma_s").get<std::array<double, 3>>();
    calib.noise.sigma_c = j.at("sigma_c").get<std::array<double, 3>>();
    calib.noise.m = j.at("m").get<double>();
    for (int c = 0; c < 3; ++c)
      for (int i = 1; i < kLevels; ++i)
        if (!(inv[c][i] >= inv[c][i - 1])) throw IoError("calibration f_inv is not monotonic");
    return calib;
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace hdrfusion
