#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/image.hpp"

namespace mfusion {

/// Loads an 8-bit PGM (P5) or PNG (gray or RGB) image; format chosen by
/// file extension. Samples are mapped [0,255] -> [0,1] by division by 255.
Image load_image(const std::string& path);

/// Saves as 8-bit PGM or PNG depending on extension. Values are clipped to
/// [0,1] and quantized by rounding half up. PGM accepts 1-plane images only.
/// Writes are atomic (temp file + rename).
void save_image(const Image& img, const std::string& path);

/// Quantization used when writing files: clip to [0,1], scale by 255,
/// round half up.
std::uint8_t quantize_u8(double v);

/// Atomically replaces `path` with `bytes` (temp file in the same directory,
/// then rename).
void write_file_atomic(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace mfusion
