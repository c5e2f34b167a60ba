#pragma once

#include <utility>
#include <vector>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

struct SprParams {
  float alpha = 0.8f;                        // color/semantics balance in [0, 1]
  std::vector<int> radii = {1, 2, 4, 8, 12, 24};  // window dilations, increasing
  int iterations = 10;
  float theta_frac = 0.6f;   // pseudo-mask threshold as a fraction of the
                             // per-class maximum, in (0, 1]
  float floor = 0.2f;        // absolute lower confidence bound, in [0, 1)
  float sigma_floor = 1e-4f; // lower bound for local standard deviations
  bool recompute_affinities = false;  // rebuild the kernel at each iteration

  void validate() const;
};

/// Normalized propagation weights: for each pixel i and active channel c,
/// one weight per neighbor j in the union of 8-neighborhoods at every
/// dilation in `radii` (border-truncated, center excluded). In-bounds
/// weights of a row sum to 1.
struct AffinityField {
  int height = 0;
  int width = 0;
  std::vector<std::pair<int, int>> offsets;  // (dy, dx) union table
  std::vector<int> channels;                 // active channel indices, ascending
  std::vector<float> weights;  // [channel_slot][pixel][offset]; 0 out of bounds

  std::size_t row_stride() const { return offsets.size(); }
  std::size_t plane_stride() const {
    return static_cast<std::size_t>(height) * width * offsets.size();
  }
  /// Weight of offset slot k flowing into pixel (y, x) for channel slot s.
  float weight(std::size_t s, int y, int x, std::size_t k) const {
    return weights[s * plane_stride() +
                   (static_cast<std::size_t>(y) * width + x) * row_stride() + k];
  }
};

/// The (dy, dx) union offset table for a dilation set: for each radius r,
/// the 8 offsets {-r, 0, r} x {-r, 0, r} minus the center.
std::vector<std::pair<int, int>> window_offsets(const std::vector<int>& radii);

/// Per-pixel, per-channel standard deviation over the pixel's union window
/// (including itself, border-truncated), floored at sigma_floor.
Tensor3 local_sigma(const Tensor3& values, const std::vector<int>& radii,
                    float sigma_floor = 1e-4f);

/// Softmax-normalized joint color+semantics affinities:
///   k_c(i, j) = -alpha * |x_i - x_j| / sigma_x(i)^2
///               - (1 - alpha) * |m_c(i) - m_c(j)| / sigma_c(i)^2
/// with |x_i - x_j| the Euclidean RGB distance, sigma_x the local std of the
/// color vector and sigma_c the local std of channel c. `scores` must be
/// normalized (per-pixel sums within 1 +/- 1e-3) or a contract violation is
/// thrown. Active channels are background plus the present object classes.
AffinityField compute_affinities(const ImageRGB& image, const Tensor3& scores,
                                 const ClassSet& present, const SprParams& params);

/// T synchronous sweeps of m_c(i) <- sum_j w_c(j->i) * m_c(j) on the active
/// channels; absent channels pass through bit-identically.
Tensor3 refine(const Tensor3& scores, const AffinityField& affinities,
               const ClassSet& present, int iterations);

/// compute_affinities followed by `iterations` refinement sweeps. With
/// recompute_affinities the kernel is rebuilt from the current map before
/// each sweep; by default it is built once from the input.
Tensor3 spr(const ImageRGB& image, const Tensor3& scores, const ClassSet& present,
            const SprParams& params);

/// Adaptive-threshold pseudo mask: per present class c, tau_c = theta_frac *
/// max_i m_c(i); a pixel gets its argmax class iff that class is present,
/// m >= tau_c and m >= floor, else the ignore label. The valid mask marks
/// non-ignored pixels.
std::pair<LabelMask, ValidMask> pseudo_mask(const Tensor3& refined,
                                            const ClassSet& present,
                                            const SprParams& params);

}  // namespace shapeseed
