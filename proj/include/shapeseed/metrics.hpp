#pragma once

#include <cstdint>
#include <vector>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

/// Pixel counts indexed by (ground truth row, prediction column).
struct ConfusionMatrix {
  int num_classes = 0;  // K + 1
  std::vector<std::uint64_t> counts;

  explicit ConfusionMatrix(int num_classes);

  std::uint64_t& at(int gt, int pred) {
    return counts[static_cast<std::size_t>(gt) * num_classes + pred];
  }
  std::uint64_t at(int gt, int pred) const {
    return counts[static_cast<std::size_t>(gt) * num_classes + pred];
  }

  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
  std::uint64_t total() const;
};

struct IouResult {
  std::vector<double> per_class;  // NaN marks classes with zero union
  double mean = 0.0;
};

struct BoundaryParams {
  double d_frac = 0.05;  // boundary band as a fraction of the image diagonal

  void validate() const;
};

/// Adds one (pred, gt) pair. Pixels with gt == ignore are skipped; pred
/// ignore counts as background so evaluation is total.
void accumulate(ConfusionMatrix& conf, const LabelMask& pred, const LabelMask& gt);

/// Per-class IoU = TP / (TP + FP + FN); classes with zero union are reported
/// as NaN and excluded from the mean. Throws when every class is absent.
IouResult miou(const ConfusionMatrix& conf);

/// IoU restricted to each class's boundary band: pixels of the class mask
/// within Euclidean distance d = ceil(d_frac * diagonal) of the mask contour
/// (the image border counts as contour). Pixels with gt == ignore are
/// excluded from the counts. `num_classes` = K + 1.
IouResult boundary_iou(const LabelMask& pred, const LabelMask& gt,
                       int num_classes, const BoundaryParams& params);

/// The band distance used by boundary_iou for an H x W image.
int boundary_distance(int height, int width, const BoundaryParams& params);

/// Exact squared Euclidean distance to the nearest zero entry, per pixel;
/// entries that are zero get distance 0. Distances are capped by the virtual
/// zero ring outside the image.
std::vector<double> squared_distance_to_zero(const std::vector<std::uint8_t>& mask,
                                             int height, int width);

}  // namespace shapeseed
