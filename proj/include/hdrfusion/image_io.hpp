#pragma once

#include <filesystem>

#include "hdrfusion/image.hpp"

namespace hdrfusion::io {

/// 8-bit PNG, 1 or 3 channels. Throws IoError.
ImageU8 read_png8(const std::filesystem::path& path);
void write_png8(const std::filesystem::path& path, const ImageU8& image);

/// 16-bit single-channel PNG.
ImageU16 read_png16(const std::filesystem::path& path);
void write_png16(const std::filesystem::path& path, const ImageU16& image);

/// Little-endian PFM (scale -1), 1 or 3 channels, rows stored bottom-up.
ImageF read_pfm(const std::filesystem::path& path);
void write_pfm(const std::filesystem::path& path, const ImageF& image);

}  // namespace hdrfusion::io
