#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hdrfusion/geometry.hpp"
#include "hdrfusion/image.hpp"

namespace hdrfusion {

/// One LDR RGB-D capture.
struct RgbdFrame {
  ImageU8 rgb;          // 3 channels
  ImageF depth;         // meters, 0 = invalid
  double exposure_ms = 0;
  int index = 0;
};

/// Linear radiance converted from an LDR frame.
struct RadianceFrame {
  ImageF radiance;            // 3 channels, radiance units (f_inv(128) == 1)
  ImageF confidence;          // mean of the per-channel PCF values, in (0, 1]
  ImageF channel_confidence;  // per-channel PCF values, 3 channels
  Mask saturated;             // any channel at level 0 or 255
  double exposure_ms = 0;
};

/// Exposure-invariant radiance standardized by local patch statistics.
struct NormalizedRadianceFrame {
  ImageF nr;     // 3 channels
  ImageF mu;     // 3 channels, local mean
  ImageF sigma;  // 3 channels, local std
  Mask valid;
  int patch_radius = 0;
};

/// Patch std below this marks a pixel invalid instead of dividing by it.
inline constexpr double kSigmaFloor = 1e-4;
/// Patch radius at full resolution.
inline constexpr int kDefaultPatchRadius = 5;

/// Patch radius used at pyramid level `level`: halved per level, minimum 2.
int patch_radius_for_level(int level, int base_radius = kDefaultPatchRadius);

// -- pyramids ---------------------------------------------------------------

/// Level 0 is the input; each further level is a 2x2 box average of the
/// previous one (odd trailing rows/columns dropped). Works for any channel count.
std::vector<ImageF> build_pyramid(const ImageF& image, int levels);

/// Depth pyramid: a 2x2 block averages its samples only if all four are valid
/// and within 0.1 m of each other; otherwise it takes the first valid sample.
std::vector<ImageF> build_depth_pyramid(const ImageF& depth, int levels);

/// Mask pyramid: a coarse pixel is set if any of its 2x2 children is set.
std::vector<Mask> build_mask_pyramid_any(const Mask& mask, int levels);

/// Throws InvalidInput when `levels` cannot be built from a w x h image.
void check_pyramid_levels(int width, int height, int levels);

// -- local statistics -------------------------------------------------------

struct LocalStats {
  ImageF mean;
  ImageF stddev;
};

/// Mean and std over the (2r+1)^2 window centered at each pixel, clipped at
/// the image border. Uses summed-area tables, so per-pixel cost does not
/// depend on the radius. `channel` selects the input channel.
LocalStats local_stats(const ImageF& map, int radius, int channel = 0);

/// Number of set mask pixels in each clipped (2r+1)^2 window.
Image<int> window_count(const Mask& mask, int radius);

// -- normalization ----------------------------------------------------------

/// Per channel nr = (R - mu) / sigma. Invalid: sigma < kSigmaFloor in any
/// channel, saturated pixels, pixels whose window touches a saturated pixel,
/// and (when `depth` is given) pixels with depth <= 0.
NormalizedRadianceFrame normalize_radiance(const RadianceFrame& frame, int radius,
                                           const ImageF* depth = nullptr);

/// Mean of the normalized channels; 0 on invalid pixels.
ImageF mean_normalized(const NormalizedRadianceFrame& frame);

/// Gray value as the plain mean of the three channels.
ImageF channel_mean(const ImageF& image3);
ImageF channel_mean(const ImageU8& image3);

// -- sequences --------------------------------------------------------------

/// Line of a TUM-style trajectory file.
struct StampedPose {
  double timestamp = 0;
  Pose pose;  // camera -> world
};

std::vector<StampedPose> read_trajectory(const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path, const std::vector<StampedPose>& poses);

CameraModel read_camera_json(const std::filesystem::path& path);
void write_camera_json(const std::filesystem::path& path, const CameraModel& cam);

/// Reader for a sequence directory:
///   rgb/%06d.png, depth/%06d.png (uint16 mm), exposure.csv (index,exposure_ms),
///   camera.json, optional groundtruth.txt.
class SequenceReader {
 public:
  explicit SequenceReader(std::filesystem::path root);

  const CameraModel& camera() const { return camera_; }
  std::size_t size() const { return exposures_.size(); }
  RgbdFrame frame(std::size_t i) const;
  double exposure_ms(std::size_t i) const { return exposures_.at(i).second; }
  int frame_index(std::size_t i) const { return exposures_.at(i).first; }
  /// Ground-truth camera -> world poses; empty when absent.
  const std::vector<StampedPose>& ground_truth() const { return ground_truth_; }
  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  CameraModel camera_;
  std::vector<std::pair<int, double>> exposures_;
  std::vector<StampedPose> ground_truth_;
};

std::string frame_name(int index, const char* extension);

}  // namespace hdrfusion
