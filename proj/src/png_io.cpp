#include "shapeseed/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <stdexcept>

namespace shapeseed {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// Decodes any PNG into packed 8-bit rows with `want_channels` (1 = gray,
// 3 = RGB), applying the usual libpng normalization transforms.
std::vector<std::uint8_t> decode_png(const std::string& path, int want_channels,
                                     int& height, int& width) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) {
    throw std::runtime_error("png: cannot open " + path);
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                           nullptr, nullptr);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw std::runtime_error("png: out of memory");
  }

  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: failed to decode " + path);
  }

  png_init_io(png, file.get());
  png_read_info(png, info);

  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_packing(png);
  const int color_type = png_get_color_type(png, info);
  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  }
  if (want_channels == 3) {
    if (color_type == PNG_COLOR_TYPE_GRAY ||
        color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_set_gray_to_rgb(png);
    }
  } else {
    if (color_type != PNG_COLOR_TYPE_GRAY &&
        color_type != PNG_COLOR_TYPE_GRAY_ALPHA) {
      png_destroy_read_struct(&png, &info, nullptr);
      throw std::runtime_error("png: " + path + " is not single-channel");
    }
    if (png_get_bit_depth(png, info) < 8) {
      png_set_expand_gray_1_2_4_to_8(png);
    }
  }
  png_read_update_info(png, info);

  height = static_cast<int>(png_get_image_height(png, info));
  width = static_cast<int>(png_get_image_width(png, info));
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  if (rowbytes != static_cast<std::size_t>(width) * want_channels) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("png: unexpected layout in " + path);
  }

  out.resize(static_cast<std::size_t>(height) * rowbytes);
  rows.resize(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[y] = out.data() + static_cast<std::size_t>(y) * rowbytes;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return out;
}

void encode_png(const std::string& path, int height, int width, int channels,
                std::span<const std::uint8_t> values) {
  if (height < 1 || width < 1 ||
      values.size() != static_cast<std::size_t>(height) * width * channels) {
    throw std::invalid_argument("png: payload does not match dimensions");
  }
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) {
    throw std::runtime_error("png: cannot open " + path + " for writing");
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  if (!png) throw std::runtime_error("png: out of memory");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: out of memory");
  }

  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: failed to encode " + path);
  }

  png_init_io(png, file.get());
  // Fixed settings keep outputs byte-identical across runs.
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width),
               static_cast<png_uint_32>(height), 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels;
  for (int y = 0; y < height; ++y) {
    rows[y] = const_cast<png_bytep>(values.data() +
                                    static_cast<std::size_t>(y) * rowbytes);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageRGB read_image_png(const std::string& path) {
  int h = 0, w = 0;
  const auto bytes = decode_png(path, 3, h, w);
  std::vector<float> data(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    data[i] = static_cast<float>(bytes[i]) / 255.0f;
  }
  return ImageRGB{Tensor3::from_data(h, w, 3, std::move(data))};
}

void write_image_png(const std::string& path, const ImageRGB& image) {
  const auto values = image.pixels.flat();
  std::vector<std::uint8_t> bytes(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const float v = values[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("write_image_png: intensity outside [0, 1]");
    }
    bytes[i] = static_cast<std::uint8_t>(v * 255.0f + 0.5f);
  }
  encode_png(path, image.height(), image.width(), 3, bytes);
}

LabelMask read_mask_png(const std::string& path) {
  LabelMask mask;
  mask.labels = decode_png(path, 1, mask.height, mask.width);
  return mask;
}

void write_mask_png(const std::string& path, const LabelMask& mask) {
  encode_png(path, mask.height, mask.width, 1, mask.labels);
}

std::vector<std::uint8_t> read_gray8_png(const std::string& path, int& height,
                                         int& width) {
  return decode_png(path, 1, height, width);
}

void write_gray8_png(const std::string& path, int height, int width,
                     std::span<const std::uint8_t> values) {
  encode_png(path, height, width, 1, values);
}

}  // namespace shapeseed
