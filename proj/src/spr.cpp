#include "shapeseed/spr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace shapeseed {

namespace {

void check_normalized(const Tensor3& scores) {
  const int h = scores.height(), w = scores.width();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      for (float v : scores.pixel(y, x)) sum += v;
      if (std::abs(sum - 1.0) > 1e-3) {
        throw std::invalid_argument(
            "compute_affinities: scores are not normalized (pixel sum " +
            std::to_string(sum) + ")");
      }
    }
  }
}

// Scalar local std of the color vector: sqrt of the summed per-channel
// variances over the union window (including the center), floored.
std::vector<double> color_sigma_sq(const ImageRGB& image,
                                   const std::vector<std::pair<int, int>>& offsets,
                                   float sigma_floor) {
  const Tensor3& px = image.pixels;
  const int h = px.height(), w = px.width(), c = px.channels();
  std::vector<double> out(static_cast<std::size_t>(h) * w);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double var_total = 0.0;
      for (int ch = 0; ch < c; ++ch) {
        double sum = px.at(y, x, ch), sum_sq = sum * sum;
        int count = 1;
        for (auto [dy, dx] : offsets) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const double v = px.at(ny, nx, ch);
          sum += v;
          sum_sq += v * v;
          ++count;
        }
        const double mean = sum / count;
        var_total += std::max(0.0, sum_sq / count - mean * mean);
      }
      const double sigma = std::max(std::sqrt(var_total),
                                    static_cast<double>(sigma_floor));
      out[static_cast<std::size_t>(y) * w + x] = sigma * sigma;
    }
  }
  return out;
}

AffinityField build_affinities(const ImageRGB& image, const Tensor3& scores,
                               const ClassSet& present, const SprParams& params) {
  const int h = scores.height(), w = scores.width();
  AffinityField field;
  field.height = h;
  field.width = w;
  field.offsets = window_offsets(params.radii);
  field.channels = present.active_channels(scores.channels());

  const std::size_t n_off = field.offsets.size();
  const std::size_t n_px = static_cast<std::size_t>(h) * w;
  field.weights.assign(field.channels.size() * n_px * n_off, 0.0f);

  const auto sigma_x_sq = color_sigma_sq(image, field.offsets, params.sigma_floor);
  const Tensor3 sigma_s = local_sigma(scores, params.radii, params.sigma_floor);

  const double alpha = static_cast<double>(params.alpha);
  const double beta = 1.0 - alpha;
  const Tensor3& px = image.pixels;

  std::vector<double> logits(n_off);
  for (std::size_t slot = 0; slot < field.channels.size(); ++slot) {
    const int c = field.channels[slot];
    float* plane = field.weights.data() + slot * n_px * n_off;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t pix = static_cast<std::size_t>(y) * w + x;
        const double sx2 = sigma_x_sq[pix];
        const double ss = sigma_s.at(y, x, c);
        const double ss2 = ss * ss;
        const double mc = scores.at(y, x, c);
        const auto ci = px.pixel(y, x);

        double peak = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_off; ++k) {
          const int ny = y + field.offsets[k].first;
          const int nx = x + field.offsets[k].second;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) {
            logits[k] = -std::numeric_limits<double>::infinity();
            continue;
          }
          const auto cj = px.pixel(ny, nx);
          double dist_sq = 0.0;
          for (int ch = 0; ch < 3; ++ch) {
            const double d = static_cast<double>(ci[ch]) - static_cast<double>(cj[ch]);
            dist_sq += d * d;
          }
          const double ds = std::abs(mc - static_cast<double>(scores.at(ny, nx, c)));
          logits[k] = -alpha * std::sqrt(dist_sq) / sx2 - beta * ds / ss2;
          peak = std::max(peak, logits[k]);
        }
        if (!std::isfinite(peak)) continue;  // no in-bounds neighbors

        double denom = 0.0;
        for (std::size_t k = 0; k < n_off; ++k) {
          if (std::isfinite(logits[k])) {
            logits[k] = std::exp(logits[k] - peak);
            denom += logits[k];
          } else {
            logits[k] = 0.0;
          }
        }
        float* row = plane + pix * n_off;
        for (std::size_t k = 0; k < n_off; ++k) {
          row[k] = static_cast<float>(logits[k] / denom);
        }
      }
    }
  }
  return field;
}

}  // namespace

void SprParams::validate() const {
  if (!(alpha >= 0.0f && alpha <= 1.0f)) {
    throw std::invalid_argument("SprParams: alpha must lie in [0, 1]");
  }
  if (iterations < 0) {
    throw std::invalid_argument("SprParams: iterations must be >= 0");
  }
  if (radii.empty()) {
    throw std::invalid_argument("SprParams: radii must be non-empty");
  }
  int prev = 0;
  for (int r : radii) {
    if (r < 1 || r <= prev) {
      throw std::invalid_argument("SprParams: radii must be strictly increasing and >= 1");
    }
    prev = r;
  }
  if (!(theta_frac > 0.0f && theta_frac <= 1.0f)) {
    throw std::invalid_argument("SprParams: theta_frac must lie in (0, 1]");
  }
  if (!(floor >= 0.0f && floor < 1.0f)) {
    throw std::invalid_argument("SprParams: floor must lie in [0, 1)");
  }
  if (!(sigma_floor > 0.0f)) {
    throw std::invalid_argument("SprParams: sigma_floor must be > 0");
  }
}

std::vector<std::pair<int, int>> window_offsets(const std::vector<int>& radii) {
  std::vector<std::pair<int, int>> offsets;
  offsets.reserve(radii.size() * 8);
  for (int r : radii) {
    for (int dy = -r; dy <= r; dy += r) {
      for (int dx = -r; dx <= r; dx += r) {
        if (dy == 0 && dx == 0) continue;
        offsets.emplace_back(dy, dx);
      }
    }
  }
  return offsets;
}

Tensor3 local_sigma(const Tensor3& values, const std::vector<int>& radii,
                    float sigma_floor) {
  const auto offsets = window_offsets(radii);
  const int h = values.height(), w = values.width(), c = values.channels();
  Tensor3 out(h, w, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        double sum = values.at(y, x, ch);
        double sum_sq = sum * sum;
        int count = 1;
        for (auto [dy, dx] : offsets) {
          const int ny = y + dy, nx = x + dx;
          if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
          const double v = values.at(ny, nx, ch);
          sum += v;
          sum_sq += v * v;
          ++count;
        }
        const double mean = sum / count;
        const double var = std::max(0.0, sum_sq / count - mean * mean);
        out.at(y, x, ch) = std::max(static_cast<float>(std::sqrt(var)), sigma_floor);
      }
    }
  }
  return out;
}

AffinityField compute_affinities(const ImageRGB& image, const Tensor3& scores,
                                 const ClassSet& present, const SprParams& params) {
  params.validate();
  if (!image.pixels.same_spatial(scores)) {
    throw std::invalid_argument("compute_affinities: image and scores dims differ");
  }
  check_normalized(scores);
  return build_affinities(image, scores, present, params);
}

Tensor3 refine(const Tensor3& scores, const AffinityField& affinities,
               const ClassSet& present, int iterations) {
  if (iterations < 0) {
    throw std::invalid_argument("refine: iterations must be >= 0");
  }
  const int h = scores.height(), w = scores.width();
  if (affinities.height != h || affinities.width != w) {
    throw std::invalid_argument("refine: affinity geometry does not match scores");
  }
  const auto active = present.active_channels(scores.channels());
  if (active != affinities.channels) {
    throw std::invalid_argument("refine: affinities built for a different class set");
  }

  Tensor3 current = scores;
  Tensor3 next = scores;
  const std::size_t n_off = affinities.row_stride();
  for (int t = 0; t < iterations; ++t) {
    for (std::size_t slot = 0; slot < active.size(); ++slot) {
      const int c = active[slot];
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          bool any = false;
          double acc = 0.0;
          for (std::size_t k = 0; k < n_off; ++k) {
            const int ny = y + affinities.offsets[k].first;
            const int nx = x + affinities.offsets[k].second;
            if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
            acc += static_cast<double>(affinities.weight(slot, y, x, k)) *
                   static_cast<double>(current.at(ny, nx, c));
            any = true;
          }
          // Empty neighbor sets (1x1 grids) leave the value unchanged.
          next.at(y, x, c) = any ? static_cast<float>(acc) : current.at(y, x, c);
        }
      }
    }
    std::swap(current, next);
  }
  return current;
}

Tensor3 spr(const ImageRGB& image, const Tensor3& scores, const ClassSet& present,
            const SprParams& params) {
  params.validate();
  if (!image.pixels.same_spatial(scores)) {
    throw std::invalid_argument("spr: image and scores dims differ");
  }
  check_normalized(scores);

  if (!params.recompute_affinities) {
    const AffinityField field = build_affinities(image, scores, present, params);
    return refine(scores, field, present, params.iterations);
  }
  Tensor3 current = scores;
  for (int t = 0; t < params.iterations; ++t) {
    // Per-class operators drift the per-pixel sums, so skip the
    // normalization check on intermediate maps.
    const AffinityField field = build_affinities(image, current, present, params);
    current = refine(current, field, present, 1);
  }
  return current;
}

std::pair<LabelMask, ValidMask> pseudo_mask(const Tensor3& refined,
                                            const ClassSet& present,
                                            const SprParams& params) {
  params.validate();
  const int h = refined.height(), w = refined.width(), c = refined.channels();
  const auto active = present.active_channels(c);  // throws when out of range

  std::vector<float> tau(static_cast<std::size_t>(c),
                         std::numeric_limits<float>::infinity());
  for (int ch : active) {
    float peak = -std::numeric_limits<float>::infinity();
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        peak = std::max(peak, refined.at(y, x, ch));
      }
    }
    tau[ch] = params.theta_frac * peak;
  }

  LabelMask labels(h, w, kIgnoreLabel);
  ValidMask valid(h, w, false);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      auto px = refined.pixel(y, x);
      int best = 0;
      for (int k = 1; k < c; ++k) {
        if (px[k] > px[best]) best = k;
      }
      if (!present.contains(best)) continue;
      const float m = px[best];
      if (m >= tau[best] && m >= params.floor) {
        labels.at(y, x) = static_cast<std::uint8_t>(best);
        valid.set(y, x, true);
      }
    }
  }
  return {std::move(labels), std::move(valid)};
}

}  // namespace shapeseed
