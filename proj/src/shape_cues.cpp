#include "shapeseed/shape_cues.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "shapeseed/rng.hpp"

namespace shapeseed {

namespace {

constexpr double kSqrt2Pi = 2.50662827463100050241576528481;

// Patch vector around (cy, cx), edge-replicated, row-major within the patch.
void extract_patch(const Tensor3& grid, int cy, int cx, int half,
                   std::vector<float>& out) {
  const int h = grid.height(), w = grid.width(), c = grid.channels();
  std::size_t k = 0;
  for (int dy = -half; dy <= half; ++dy) {
    const int y = std::clamp(cy + dy, 0, h - 1);
    for (int dx = -half; dx <= half; ++dx) {
      const int x = std::clamp(cx + dx, 0, w - 1);
      auto px = grid.pixel(y, x);
      for (int ch = 0; ch < c; ++ch) {
        out[k++] = px[ch];
      }
    }
  }
}

double sq_distance(const std::vector<float>& a, const std::vector<float>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    acc += d * d;
  }
  return acc;
}

}  // namespace

void ScmParams::validate() const {
  if (patch_side < 1 || patch_side % 2 == 0) {
    throw std::invalid_argument("ScmParams: patch_side must be odd and >= 1");
  }
  if (n_samples < 1) {
    throw std::invalid_argument("ScmParams: n_samples must be >= 1");
  }
  if (neighbor_radius < 1) {
    throw std::invalid_argument("ScmParams: neighbor_radius must be >= 1");
  }
  if (!(bandwidth > 0.0f)) {
    throw std::invalid_argument("ScmParams: bandwidth must be > 0");
  }
  if (!(temperature > 0.0f)) {
    throw std::invalid_argument("ScmParams: temperature must be > 0");
  }
  if (!(target_rate >= 0.0f && target_rate <= 1.0f)) {
    throw std::invalid_argument("ScmParams: target_rate must lie in [0, 1]");
  }
}

InfoMap self_information(const Tensor3& grid, const ScmParams& params) {
  params.validate();
  const int h = grid.height(), w = grid.width(), c = grid.channels();
  if (h < params.patch_side || w < params.patch_side) {
    throw std::invalid_argument("self_information: grid smaller than one patch");
  }
  if (c < 1) {
    throw std::invalid_argument("self_information: grid has no channels");
  }

  const int half = params.patch_side / 2;
  const int radius = params.neighbor_radius;
  const double bw = static_cast<double>(params.bandwidth);
  const double inv_two_h2 = 1.0 / (2.0 * bw * bw);
  const double kernel_scale = 1.0 / (kSqrt2Pi * bw);
  const float degenerate = static_cast<float>(std::log(kSqrt2Pi * bw));

  InfoMap info;
  info.height = h;
  info.width = w;
  info.values.resize(static_cast<std::size_t>(h) * w);

  const std::size_t patch_len =
      static_cast<std::size_t>(params.patch_side) * params.patch_side * c;
  std::vector<float> center(patch_len), neighbor(patch_len);
  std::vector<std::pair<int, int>> candidates;
  candidates.reserve(static_cast<std::size_t>(2 * radius * (radius + 1)));

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      candidates.clear();
      for (int dy = -radius; dy <= radius; ++dy) {
        const int span = radius - std::abs(dy);
        for (int dx = -span; dx <= span; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          candidates.emplace_back(dy, dx);
        }
      }

      const std::uint64_t pixel_index = static_cast<std::uint64_t>(y) * w + x;
      float& value = info.values[pixel_index];
      if (candidates.empty()) {
        value = degenerate;
        continue;
      }

      const int n = std::min<int>(params.n_samples,
                                  static_cast<int>(candidates.size()));
      // Partial Fisher-Yates over the (dy, dx)-ordered candidate list.
      for (int k = 0; k < n; ++k) {
        const std::uint64_t bits = rng::hash3(params.seed, pixel_index,
                                              static_cast<std::uint64_t>(k));
        const auto remaining =
            static_cast<std::uint32_t>(candidates.size() - k);
        const int j = k + static_cast<int>(rng::bounded(bits, remaining));
        std::swap(candidates[k], candidates[j]);
      }

      extract_patch(grid, y, x, half, center);
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        extract_patch(grid, y + candidates[k].first, x + candidates[k].second,
                      half, neighbor);
        acc += std::exp(-sq_distance(center, neighbor) * inv_two_h2) *
               kernel_scale;
      }
      value = static_cast<float>(-std::log(acc / n));
    }
  }
  return info;
}

DropProbMap drop_probability(const InfoMap& info, const ScmParams& params) {
  params.validate();
  const std::size_t n = info.values.size();
  if (n == 0) {
    throw std::invalid_argument("drop_probability: empty info map");
  }
  const double tau = static_cast<double>(params.temperature);

  std::vector<double> weights(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(info.values[i])) {
      throw std::invalid_argument("drop_probability: non-finite self-information");
    }
    weights[i] = std::exp(-static_cast<double>(info.values[i]) / tau);
    sum += weights[i];
  }
  const double mean = sum / static_cast<double>(n);

  DropProbMap probs;
  probs.height = info.height;
  probs.width = info.width;
  probs.values.resize(n);
  const double rate = static_cast<double>(params.target_rate);
  for (std::size_t i = 0; i < n; ++i) {
    probs.values[i] =
        static_cast<float>(std::clamp(rate * weights[i] / mean, 0.0, 1.0));
  }
  return probs;
}

DropMask sample_drop_mask(const DropProbMap& probs, std::uint64_t seed) {
  DropMask mask;
  mask.height = probs.height;
  mask.width = probs.width;
  mask.bits.resize(probs.values.size());
  for (std::size_t i = 0; i < probs.values.size(); ++i) {
    const double u = rng::uniform(seed, static_cast<std::uint64_t>(i), 0);
    mask.bits[i] = u < static_cast<double>(probs.values[i]) ? 1 : 0;
  }
  return mask;
}

Tensor3 apply_drop(const Tensor3& grid, const DropMask& mask) {
  const int h = grid.height(), w = grid.width(), c = grid.channels();
  if (mask.height != h || mask.width != w) {
    throw std::invalid_argument("apply_drop: mask shape does not match grid");
  }
  Tensor3 out = grid;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (mask.at(y, x)) {
        auto px = out.pixel(y, x);
        std::fill(px.begin(), px.end(), 0.0f);
      }
    }
  }
  return out;
}

Tensor3 concat_channels(const Tensor3& a, const Tensor3& b) {
  if (!a.same_spatial(b)) {
    throw std::invalid_argument("concat_channels: spatial dims differ");
  }
  const int h = a.height(), w = a.width();
  const int ca = a.channels(), cb = b.channels();
  Tensor3 out(h, w, ca + cb);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto pa = a.pixel(y, x);
      auto pb = b.pixel(y, x);
      auto po = out.pixel(y, x);
      std::copy(pa.begin(), pa.end(), po.begin());
      std::copy(pb.begin(), pb.end(), po.begin() + ca);
    }
  }
  return out;
}

}  // namespace shapeseed
