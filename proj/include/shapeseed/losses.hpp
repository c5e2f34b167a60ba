#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

struct LossParams {
  float epsilon = 1e-5f;   // pooling stabilizer, > 0
  int region_radius = 3;   // window radius for the region-wise loss, >= 1
  float margin = 3.0f;     // hinge margin for boundary pairs, > 0
  float kl_floor = 1e-8f;  // probability floor inside logs

  void validate() const;
};

/// Image-level object-class labels y (background excluded).
struct ImageLabels {
  std::vector<std::uint8_t> y;  // size K; y[c-1] != 0 means class c present

  static ImageLabels from_class_set(const ClassSet& present, int num_object_classes);
};

struct LossGrad {
  double value = 0.0;
  Tensor3 grad;
};

/// Full weak-supervision objective on one image.
struct LossReport {
  double cls = 0.0;
  double pixel = 0.0;
  double region = 0.0;
  double lambda = 0.0;
  double mask = 0.0;   // pixel + lambda * region
  double total = 0.0;  // cls + mask
  Tensor3 grad_scores;
};

// 64-bit evaluation cores. The float32 API below converts (exactly) and
// delegates; tests drive these directly for finite-difference checks.
namespace f64 {

struct LossGrad {
  double value = 0.0;
  std::vector<double> grad;  // same row-major layout as the input values
};

struct TotalLoss {
  double cls = 0.0, pixel = 0.0, region = 0.0;
  double lambda = 0.0, mask = 0.0, total = 0.0;
  std::vector<double> grad;
};

/// Normalized global weighted pooling of raw scores (background plane
/// included): v_c = sum_i m_c(i) s_c(i) / (eps + sum_i m_c(i)) with
/// m = softmax(s) per pixel.
std::vector<double> gwp_class_scores(std::span<const double> scores, int h,
                                     int w, int c, const LossParams& params);

/// Multi-label BCE over sigmoid(v) for object classes, averaged over K;
/// gradient w.r.t. the raw score map.
LossGrad classification_loss(std::span<const double> scores, int h, int w,
                             int c, const ImageLabels& labels,
                             const LossParams& params);

/// Class-balanced cross-entropy against the pseudo labels over the valid
/// set: mean over classes present in the mask of the per-class mean of
/// -log m. Gradient w.r.t. the probability map.
LossGrad pixel_loss(std::span<const double> probs, int h, int w, int c,
                    const LabelMask& pseudo, const ValidMask& valid,
                    const LossParams& params);

/// Region-wise KL hinge: neighbors agreeing with the center pull together
/// (KL), disagreeing ones are pushed to the margin. Gradient w.r.t. the
/// probability map; the inactive hinge branch has zero gradient.
LossGrad region_loss(std::span<const double> probs, int h, int w, int c,
                     const LabelMask& pseudo, const ValidMask& valid,
                     const LossParams& params);

TotalLoss total_loss(std::span<const double> scores, int h, int w, int c,
                     const ImageLabels& labels, const LabelMask& pseudo,
                     const ValidMask& valid, double lambda,
                     const LossParams& params);

}  // namespace f64

std::vector<double> gwp_class_scores(const Tensor3& scores, const LossParams& params);
LossGrad classification_loss(const Tensor3& scores, const ImageLabels& labels,
                             const LossParams& params);
LossGrad pixel_loss(const Tensor3& probs, const LabelMask& pseudo,
                    const ValidMask& valid, const LossParams& params);
LossGrad region_loss(const Tensor3& probs, const LabelMask& pseudo,
                     const ValidMask& valid, const LossParams& params);

/// Linear ramp step / total_steps; throws when step is outside [0, total].
double lambda_schedule(long long step, long long total_steps);

/// Combines all components; the pixel/region gradients are mapped through
/// the softmax so grad_scores is d(total)/d(scores).
LossReport total_loss(const Tensor3& scores, const ImageLabels& labels,
                      const LabelMask& pseudo, const ValidMask& valid,
                      double lambda, const LossParams& params);

}  // namespace shapeseed
