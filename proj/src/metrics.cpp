#include "shapeseed/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace shapeseed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// One-dimensional squared-distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
           std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -kInf;
  z[1] = kInf;
  for (int q = 1; q < n; ++q) {
    if (f[q] == kInf) continue;
    while (true) {
      if (f[v[k]] == kInf) {
        // No finite parabola yet; replace.
        if (k == 0) {
          v[0] = q;
          z[0] = -kInf;
          z[1] = kInf;
          break;
        }
        --k;
        continue;
      }
      const double s = ((f[q] + static_cast<double>(q) * q) -
                        (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                       (2.0 * (q - v[k]));
      if (s <= z[k]) {
        --k;
        continue;
      }
      ++k;
      v[k] = q;
      z[k] = s;
      z[k + 1] = kInf;
      break;
    }
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    if (f[v[0]] == kInf) {
      d[q] = kInf;
      continue;
    }
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

void check_same_shape(const LabelMask& a, const LabelMask& b, const char* what) {
  if (a.height != b.height || a.width != b.width) {
    throw std::invalid_argument(std::string(what) + ": mask shapes differ");
  }
}

IouResult iou_from_counts(const std::vector<std::uint64_t>& intersection,
                          const std::vector<std::uint64_t>& uni) {
  IouResult result;
  result.per_class.assign(intersection.size(),
                          std::numeric_limits<double>::quiet_NaN());
  double sum = 0.0;
  int present = 0;
  for (std::size_t c = 0; c < intersection.size(); ++c) {
    if (uni[c] == 0) continue;
    result.per_class[c] = static_cast<double>(intersection[c]) /
                          static_cast<double>(uni[c]);
    sum += result.per_class[c];
    ++present;
  }
  if (present == 0) {
    throw std::domain_error("iou: no class has a nonzero union; mean undefined");
  }
  result.mean = sum / present;
  return result;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int num_classes_) : num_classes(num_classes_) {
  if (num_classes < 1) {
    throw std::invalid_argument("ConfusionMatrix: need at least one class");
  }
  counts.assign(static_cast<std::size_t>(num_classes) * num_classes, 0);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.num_classes != num_classes) {
    throw std::invalid_argument("ConfusionMatrix: class counts differ");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += other.counts[i];
  return *this;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t sum = 0;
  for (auto v : counts) sum += v;
  return sum;
}

void BoundaryParams::validate() const {
  if (!(d_frac > 0.0)) {
    throw std::invalid_argument("BoundaryParams: d_frac must be > 0");
  }
}

void accumulate(ConfusionMatrix& conf, const LabelMask& pred, const LabelMask& gt) {
  check_same_shape(pred, gt, "accumulate");
  const int k = conf.num_classes;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    const int g = gt.labels[i];
    if (g == kIgnoreLabel) continue;
    if (g >= k) {
      throw std::invalid_argument("accumulate: ground-truth label out of range");
    }
    int p = pred.labels[i];
    if (p == kIgnoreLabel) p = 0;  // unlabeled predictions count as background
    if (p >= k) {
      throw std::invalid_argument("accumulate: prediction label out of range");
    }
    ++conf.at(g, p);
  }
}

IouResult miou(const ConfusionMatrix& conf) {
  const int k = conf.num_classes;
  std::vector<std::uint64_t> intersection(static_cast<std::size_t>(k), 0);
  std::vector<std::uint64_t> uni(static_cast<std::size_t>(k), 0);
  for (int c = 0; c < k; ++c) {
    const std::uint64_t tp = conf.at(c, c);
    std::uint64_t fp = 0, fn = 0;
    for (int o = 0; o < k; ++o) {
      if (o == c) continue;
      fp += conf.at(o, c);
      fn += conf.at(c, o);
    }
    intersection[c] = tp;
    uni[c] = tp + fp + fn;
  }
  return iou_from_counts(intersection, uni);
}

std::vector<double> squared_distance_to_zero(const std::vector<std::uint8_t>& mask,
                                             int height, int width) {
  if (mask.size() != static_cast<std::size_t>(height) * width) {
    throw std::invalid_argument("squared_distance_to_zero: size mismatch");
  }
  std::vector<double> dist(mask.size());

  // Column pass.
  {
    std::vector<double> f(static_cast<std::size_t>(height));
    std::vector<double> d(static_cast<std::size_t>(height));
    std::vector<int> v(static_cast<std::size_t>(height));
    std::vector<double> z(static_cast<std::size_t>(height) + 1);
    for (int x = 0; x < width; ++x) {
      for (int y = 0; y < height; ++y) {
        f[y] = mask[static_cast<std::size_t>(y) * width + x] ? kInf : 0.0;
      }
      dt_1d(f, d, height, v, z);
      for (int y = 0; y < height; ++y) {
        dist[static_cast<std::size_t>(y) * width + x] = d[y];
      }
    }
  }
  // Row pass.
  {
    std::vector<double> f(static_cast<std::size_t>(width));
    std::vector<double> d(static_cast<std::size_t>(width));
    std::vector<int> v(static_cast<std::size_t>(width));
    std::vector<double> z(static_cast<std::size_t>(width) + 1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        f[x] = dist[static_cast<std::size_t>(y) * width + x];
      }
      dt_1d(f, d, width, v, z);
      for (int x = 0; x < width; ++x) {
        dist[static_cast<std::size_t>(y) * width + x] = d[x];
      }
    }
  }

  // The ring outside the image counts as zero.
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int border = std::min(std::min(y + 1, height - y),
                                  std::min(x + 1, width - x));
      auto& v = dist[static_cast<std::size_t>(y) * width + x];
      v = std::min(v, static_cast<double>(border) * border);
    }
  }
  return dist;
}

int boundary_distance(int height, int width, const BoundaryParams& params) {
  params.validate();
  const double diag = std::sqrt(static_cast<double>(height) * height +
                                static_cast<double>(width) * width);
  return static_cast<int>(std::ceil(params.d_frac * diag));
}

IouResult boundary_iou(const LabelMask& pred, const LabelMask& gt,
                       int num_classes, const BoundaryParams& params) {
  check_same_shape(pred, gt, "boundary_iou");
  if (num_classes < 1) {
    throw std::invalid_argument("boundary_iou: need at least one class");
  }
  const int h = gt.height, w = gt.width;
  const int d = boundary_distance(h, w, params);
  const double d_sq = static_cast<double>(d) * d;

  std::vector<std::uint64_t> intersection(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::uint64_t> uni(static_cast<std::size_t>(num_classes), 0);
  std::vector<std::uint8_t> pred_mask(gt.labels.size());
  std::vector<std::uint8_t> gt_mask(gt.labels.size());

  for (int c = 0; c < num_classes; ++c) {
    bool any = false;
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      int p = pred.labels[i];
      if (p == kIgnoreLabel) p = 0;
      pred_mask[i] = p == c ? 1 : 0;
      gt_mask[i] = gt.labels[i] == c ? 1 : 0;
      any = any || pred_mask[i] || gt_mask[i];
    }
    if (!any) continue;  // class absent from both masks

    const auto pred_dist = squared_distance_to_zero(pred_mask, h, w);
    const auto gt_dist = squared_distance_to_zero(gt_mask, h, w);
    for (std::size_t i = 0; i < gt.labels.size(); ++i) {
      if (gt.labels[i] == kIgnoreLabel) continue;
      const bool in_pred = pred_mask[i] && pred_dist[i] <= d_sq;
      const bool in_gt = gt_mask[i] && gt_dist[i] <= d_sq;
      intersection[c] += in_pred && in_gt ? 1 : 0;
      uni[c] += in_pred || in_gt ? 1 : 0;
    }
  }
  return iou_from_counts(intersection, uni);
}

}  // namespace shapeseed
