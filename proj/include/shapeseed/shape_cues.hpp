#pragma once

#include <cstdint>
#include <vector>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

/// Per-pixel patch self-information in nats.
struct InfoMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

/// Per-pixel dropping probability in [0, 1].
struct DropProbMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;

  float at(int y, int x) const {
    return values[static_cast<std::size_t>(y) * width + x];
  }
};

/// Per-pixel drop decision, true = dropped.
struct DropMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  bool at(int y, int x) const {
    return bits[static_cast<std::size_t>(y) * width + x] != 0;
  }

  friend bool operator==(const DropMask&, const DropMask&) = default;
};

struct ScmParams {
  int patch_side = 3;        // odd, >= 1
  int neighbor_radius = 7;   // Manhattan radius for neighbor patch centers
  int n_samples = 9;         // neighbor patches per center
  float bandwidth = 1.0f;    // Gaussian kernel bandwidth, > 0
  float temperature = 0.5f;  // Boltzmann temperature, > 0
  float target_rate = 0.25f; // mean drop probability after normalization
  std::uint64_t seed = 0;

  void validate() const;
};

/// Estimates patch self-information with a Gaussian kernel density over
/// sampled neighbor patches:
///   I(p) = -log[ (1/n) * sum exp(-|p - p'|^2 / 2h^2) / (sqrt(2*pi) * h) ].
///
/// Neighbor centers are drawn without replacement from the in-bounds offsets
/// with Manhattan distance in [1, neighbor_radius]; the candidate list is
/// ordered by (dy, dx) ascending and sampled by partial Fisher-Yates with
/// draw k taken from rng::hash3(seed, pixel_index, k), pixel_index = y*W + x.
/// If fewer candidates than n_samples exist, all are used; a pixel with no
/// candidates gets the degenerate zero-distance value log(sqrt(2*pi) * h).
/// Patches extending past the border are completed by edge replication.
InfoMap self_information(const Tensor3& grid, const ScmParams& params);

/// Boltzmann dropping probabilities, normalized so the map mean equals
/// target_rate before clamping: r = clamp(rate * w / mean(w), 0, 1) with
/// w = exp(-I / temperature).
DropProbMap drop_probability(const InfoMap& info, const ScmParams& params);

/// Independent per-pixel Bernoulli draws: dropped iff
/// rng::uniform(seed, pixel_index, 0) < p. Order-independent.
DropMask sample_drop_mask(const DropProbMap& probs, std::uint64_t seed);

/// Zeroes all channels at dropped pixels; everything else is bit-identical.
/// No rescaling is applied.
Tensor3 apply_drop(const Tensor3& grid, const DropMask& mask);

/// Channel concatenation (a's channels first); spatial dims must agree.
Tensor3 concat_channels(const Tensor3& a, const Tensor3& b);

}  // namespace shapeseed
