#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace shapeseed {

inline constexpr std::uint8_t kIgnoreLabel = 255;

/// Dense H x W x C grid of 32-bit reals, row-major ((row*W + col)*C + ch).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int height, int width, int channels, float fill = 0.0f);

  /// Takes ownership of `data`; validates length and finiteness.
  static Tensor3 from_data(int height, int width, int channels,
                           std::vector<float> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float& at(int y, int x, int c) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int y, int x, int c) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<float> pixel(int y, int x) {
    return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_,
            static_cast<std::size_t>(channels_)};
  }
  std::span<const float> pixel(int y, int x) const {
    return {data_.data() + (static_cast<std::size_t>(y) * width_ + x) * channels_,
            static_cast<std::size_t>(channels_)};
  }

  std::span<float> flat() { return data_; }
  std::span<const float> flat() const { return data_; }

  bool same_shape(const Tensor3& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool same_spatial(const Tensor3& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// H x W x 3 image with intensities in [0, 1].
struct ImageRGB {
  Tensor3 pixels;

  /// Validates channel count and the [0, 1] range.
  static ImageRGB from_tensor(Tensor3 t);

  int height() const { return pixels.height(); }
  int width() const { return pixels.width(); }
};

/// Per-pixel class indices in {0..K} plus kIgnoreLabel.
struct LabelMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> labels;

  LabelMask() = default;
  LabelMask(int h, int w, std::uint8_t fill = 0);

  std::uint8_t& at(int y, int x) {
    return labels[static_cast<std::size_t>(y) * width + x];
  }
  std::uint8_t at(int y, int x) const {
    return labels[static_cast<std::size_t>(y) * width + x];
  }

  friend bool operator==(const LabelMask&, const LabelMask&) = default;
};

/// Per-pixel boolean map; used for confidence/validity.
struct ValidMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  ValidMask() = default;
  ValidMask(int h, int w, bool fill = false);

  bool at(int y, int x) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }
  void set(int y, int x, bool v) {
    bits[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
  }
  std::size_t count() const;

  friend bool operator==(const ValidMask&, const ValidMask&) = default;
};

/// Object classes present in an image. Background (index 0) is always
/// treated as present.
class ClassSet {
 public:
  ClassSet() = default;

  /// Builds from object-class indices (each >= 1); duplicates collapse.
  static ClassSet from_list(std::span<const int> object_classes);

  bool contains(int c) const;
  const std::vector<int>& object_classes() const { return object_classes_; }

  /// Channels to process in a (K+1)-channel map: {0} plus the present object
  /// classes. Throws if any present index is out of range for `channels`.
  std::vector<int> active_channels(int channels) const;

 private:
  std::vector<int> object_classes_;  // sorted, unique, all >= 1
};

// ---- grid_core operations --------------------------------------------------

/// Prepends a constant all-ones background plane as channel 0; input channels
/// shift to 1..K bit-identically.
Tensor3 append_background_plane(const Tensor3& scores);

/// Removes channel 0; inverse of append_background_plane.
Tensor3 strip_background_plane(const Tensor3& scores);

/// Per-pixel softmax across channels, computed with max-subtraction.
Tensor3 normalize_scores(const Tensor3& scores);

/// Per-pixel channel index of the maximum value; ties go to the lowest index.
LabelMask argmax_mask(const Tensor3& scores);

}  // namespace shapeseed
