#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

// Masks are 8-bit single-channel PNG (0 = background, 1..K = classes,
// 255 = ignore). Images are 8-bit RGB PNG, mapped to real32 [0, 1] by
// dividing by 255.

ImageRGB read_image_png(const std::string& path);
void write_image_png(const std::string& path, const ImageRGB& image);

LabelMask read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const LabelMask& mask);

/// Low-level 8-bit grayscale access for other single-channel payloads
/// (e.g. drop masks stored as 255 = dropped, 0 = kept).
std::vector<std::uint8_t> read_gray8_png(const std::string& path, int& height,
                                         int& width);
void write_gray8_png(const std::string& path, int height, int width,
                     std::span<const std::uint8_t> values);

}  // namespace shapeseed
