#include "shapeseed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace shapeseed {

namespace {

std::size_t checked_extent(int height, int width, int channels) {
  if (height < 1 || width < 1 || channels < 0) {
    throw std::invalid_argument("Tensor3: dimensions must satisfy H,W >= 1 and C >= 0");
  }
  return static_cast<std::size_t>(height) * static_cast<std::size_t>(width) *
         static_cast<std::size_t>(channels);
}

}  // namespace

Tensor3::Tensor3(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels),
      data_(checked_extent(height, width, channels), fill) {}

Tensor3 Tensor3::from_data(int height, int width, int channels,
                           std::vector<float> data) {
  const std::size_t n = checked_extent(height, width, channels);
  if (data.size() != n) {
    throw std::invalid_argument("Tensor3: data length " + std::to_string(data.size()) +
                                " does not match H*W*C = " + std::to_string(n));
  }
  for (float v : data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("Tensor3: data contains non-finite values");
    }
  }
  Tensor3 t;
  t.height_ = height;
  t.width_ = width;
  t.channels_ = channels;
  t.data_ = std::move(data);
  return t;
}

ImageRGB ImageRGB::from_tensor(Tensor3 t) {
  if (t.channels() != 3) {
    throw std::invalid_argument("ImageRGB: expected 3 channels, got " +
                                std::to_string(t.channels()));
  }
  for (float v : t.flat()) {
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw std::invalid_argument("ImageRGB: intensities must lie in [0, 1]");
    }
  }
  return ImageRGB{std::move(t)};
}

LabelMask::LabelMask(int h, int w, std::uint8_t fill)
    : height(h), width(w),
      labels(checked_extent(h, w, 1), fill) {}

ValidMask::ValidMask(int h, int w, bool fill)
    : height(h), width(w),
      bits(checked_extent(h, w, 1), fill ? 1 : 0) {}

std::size_t ValidMask::count() const {
  return static_cast<std::size_t>(std::count_if(
      bits.begin(), bits.end(), [](std::uint8_t b) { return b != 0; }));
}

ClassSet ClassSet::from_list(std::span<const int> object_classes) {
  ClassSet set;
  set.object_classes_.assign(object_classes.begin(), object_classes.end());
  for (int c : set.object_classes_) {
    if (c < 1 || c >= static_cast<int>(kIgnoreLabel)) {
      throw std::invalid_argument("ClassSet: object class index " + std::to_string(c) +
                                  " out of range [1, 254]");
    }
  }
  std::sort(set.object_classes_.begin(), set.object_classes_.end());
  set.object_classes_.erase(
      std::unique(set.object_classes_.begin(), set.object_classes_.end()),
      set.object_classes_.end());
  return set;
}

bool ClassSet::contains(int c) const {
  if (c == 0) return true;
  return std::binary_search(object_classes_.begin(), object_classes_.end(), c);
}

std::vector<int> ClassSet::active_channels(int channels) const {
  if (channels < 1) {
    throw std::invalid_argument("ClassSet: map has no channels");
  }
  std::vector<int> active;
  active.reserve(object_classes_.size() + 1);
  active.push_back(0);
  for (int c : object_classes_) {
    if (c >= channels) {
      throw std::invalid_argument("ClassSet: present class " + std::to_string(c) +
                                  " exceeds channel count " + std::to_string(channels));
    }
    active.push_back(c);
  }
  return active;
}

Tensor3 append_background_plane(const Tensor3& scores) {
  const int h = scores.height(), w = scores.width(), c = scores.channels();
  if (c < 1) {
    throw std::invalid_argument("append_background_plane: need at least one class plane");
  }
  Tensor3 out(h, w, c + 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto src = scores.pixel(y, x);
      auto dst = out.pixel(y, x);
      dst[0] = 1.0f;
      std::copy(src.begin(), src.end(), dst.begin() + 1);
    }
  }
  return out;
}

Tensor3 strip_background_plane(const Tensor3& scores) {
  const int h = scores.height(), w = scores.width(), c = scores.channels();
  if (c < 1) {
    throw std::invalid_argument("strip_background_plane: no channels to strip");
  }
  Tensor3 out(h, w, c - 1);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto src = scores.pixel(y, x);
      auto dst = out.pixel(y, x);
      std::copy(src.begin() + 1, src.end(), dst.begin());
    }
  }
  return out;
}

Tensor3 normalize_scores(const Tensor3& scores) {
  const int h = scores.height(), w = scores.width(), c = scores.channels();
  if (c < 1) {
    throw std::invalid_argument("normalize_scores: need at least one channel");
  }
  Tensor3 out(h, w, c);
  std::vector<double> exps(static_cast<std::size_t>(c));
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto src = scores.pixel(y, x);
      const float peak = *std::max_element(src.begin(), src.end());
      double sum = 0.0;
      for (int k = 0; k < c; ++k) {
        exps[k] = std::exp(static_cast<double>(src[k]) - static_cast<double>(peak));
        sum += exps[k];
      }
      auto dst = out.pixel(y, x);
      for (int k = 0; k < c; ++k) {
        dst[k] = static_cast<float>(exps[k] / sum);
      }
    }
  }
  return out;
}

LabelMask argmax_mask(const Tensor3& scores) {
  const int h = scores.height(), w = scores.width(), c = scores.channels();
  if (c < 1) {
    throw std::invalid_argument("argmax_mask: need at least one channel");
  }
  if (c > static_cast<int>(kIgnoreLabel)) {
    throw std::invalid_argument("argmax_mask: channel index would collide with the ignore label");
  }
  LabelMask mask(h, w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto src = scores.pixel(y, x);
      int best = 0;
      for (int k = 1; k < c; ++k) {
        if (src[k] > src[best]) best = k;
      }
      mask.at(y, x) = static_cast<std::uint8_t>(best);
    }
  }
  return mask;
}

}  // namespace shapeseed
