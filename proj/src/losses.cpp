#include "shapeseed/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shapeseed {

namespace {

std::size_t flat_index(int y, int x, int c, int width, int channels) {
  return (static_cast<std::size_t>(y) * width + x) * channels + c;
}

void check_shape(std::size_t n, int h, int w, int c, const char* what) {
  if (h < 1 || w < 1 || c < 1 ||
      n != static_cast<std::size_t>(h) * w * c) {
    throw std::invalid_argument(std::string(what) + ": value count does not match H*W*C");
  }
}

void check_mask_pair(const LabelMask& pseudo, const ValidMask& valid, int h, int w) {
  if (pseudo.height != h || pseudo.width != w || valid.height != h ||
      valid.width != w) {
    throw std::invalid_argument("loss: mask shape does not match the map");
  }
  for (std::size_t i = 0; i < pseudo.labels.size(); ++i) {
    const bool labeled = pseudo.labels[i] != kIgnoreLabel;
    if (labeled != (valid.bits[i] != 0)) {
      throw std::invalid_argument("loss: valid mask disagrees with pseudo-label ignores");
    }
  }
}

// Per-pixel softmax of a double map.
std::vector<double> softmax_map(std::span<const double> scores, int h, int w, int c) {
  std::vector<double> m(scores.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = flat_index(y, x, 0, w, c);
      double peak = scores[base];
      for (int k = 1; k < c; ++k) peak = std::max(peak, scores[base + k]);
      double sum = 0.0;
      for (int k = 0; k < c; ++k) {
        m[base + k] = std::exp(scores[base + k] - peak);
        sum += m[base + k];
      }
      for (int k = 0; k < c; ++k) m[base + k] /= sum;
    }
  }
  return m;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

std::vector<double> widen(const Tensor3& t) {
  const auto src = t.flat();
  return {src.begin(), src.end()};
}

Tensor3 narrow(const std::vector<double>& values, int h, int w, int c) {
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(values[i]);
  }
  return Tensor3::from_data(h, w, c, std::move(out));
}

}  // namespace

void LossParams::validate() const {
  if (!(epsilon > 0.0f)) {
    throw std::invalid_argument("LossParams: epsilon must be > 0");
  }
  if (region_radius < 1) {
    throw std::invalid_argument("LossParams: region_radius must be >= 1");
  }
  if (!(margin > 0.0f)) {
    throw std::invalid_argument("LossParams: margin must be > 0");
  }
  if (!(kl_floor > 0.0f)) {
    throw std::invalid_argument("LossParams: kl_floor must be > 0");
  }
}

ImageLabels ImageLabels::from_class_set(const ClassSet& present,
                                        int num_object_classes) {
  ImageLabels labels;
  labels.y.assign(static_cast<std::size_t>(num_object_classes), 0);
  for (int c : present.object_classes()) {
    if (c > num_object_classes) {
      throw std::invalid_argument("ImageLabels: class index exceeds K");
    }
    labels.y[c - 1] = 1;
  }
  return labels;
}

namespace f64 {

std::vector<double> gwp_class_scores(std::span<const double> scores, int h,
                                     int w, int c, const LossParams& params) {
  params.validate();
  check_shape(scores.size(), h, w, c, "gwp_class_scores");
  const auto m = softmax_map(scores, h, w, c);
  std::vector<double> v(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    double num = 0.0, den = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = flat_index(y, x, k, w, c);
        num += m[i] * scores[i];
        den += m[i];
      }
    }
    v[k] = num / (static_cast<double>(params.epsilon) + den);
  }
  return v;
}

LossGrad classification_loss(std::span<const double> scores, int h, int w,
                             int c, const ImageLabels& labels,
                             const LossParams& params) {
  params.validate();
  check_shape(scores.size(), h, w, c, "classification_loss");
  const int K = c - 1;
  if (K < 1) {
    throw std::invalid_argument("classification_loss: need at least one object class");
  }
  if (labels.y.size() != static_cast<std::size_t>(K)) {
    throw std::invalid_argument("classification_loss: labels size must equal K");
  }

  const auto m = softmax_map(scores, h, w, c);

  // v_c = A_c / B_c with A_c = sum_i m s, B_c = eps + sum_i m.
  std::vector<double> v(static_cast<std::size_t>(c)), B(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) {
    double num = 0.0, den = 0.0;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = flat_index(y, x, k, w, c);
        num += m[i] * scores[i];
        den += m[i];
      }
    }
    B[k] = static_cast<double>(params.epsilon) + den;
    v[k] = num / B[k];
  }

  LossGrad out;
  out.grad.assign(scores.size(), 0.0);

  // dL/dv per channel; background (channel 0) is excluded from the loss.
  std::vector<double> g(static_cast<std::size_t>(c), 0.0);
  double loss = 0.0;
  for (int k = 1; k < c; ++k) {
    const double p = sigmoid(v[k]);
    const double y = labels.y[k - 1] ? 1.0 : 0.0;
    loss -= y * std::log(std::max(p, 1e-300)) +
            (1.0 - y) * std::log(std::max(1.0 - p, 1e-300));
    g[k] = (p - y) / K;
  }
  out.value = loss / K;

  // d v_c / d s_i^d = [m_i^c ((c==d) - m_i^d)(s_i^c - v_c) + m_i^c (c==d)] / B_c
  std::vector<double> t(static_cast<std::size_t>(c));
  for (int k = 0; k < c; ++k) t[k] = g[k] / B[k];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = flat_index(y, x, 0, w, c);
      double weighted = 0.0;  // sum_c t_c * u_c with u_c = m_c (s_c - v_c)
      for (int k = 0; k < c; ++k) {
        weighted += t[k] * m[base + k] * (scores[base + k] - v[k]);
      }
      for (int d = 0; d < c; ++d) {
        const double u_d = m[base + d] * (scores[base + d] - v[d]);
        out.grad[base + d] =
            t[d] * (u_d + m[base + d]) - m[base + d] * weighted;
      }
    }
  }
  return out;
}

LossGrad pixel_loss(std::span<const double> probs, int h, int w, int c,
                    const LabelMask& pseudo, const ValidMask& valid,
                    const LossParams& params) {
  params.validate();
  check_shape(probs.size(), h, w, c, "pixel_loss");
  check_mask_pair(pseudo, valid, h, w);

  std::vector<std::size_t> counts(static_cast<std::size_t>(c), 0);
  for (std::size_t i = 0; i < pseudo.labels.size(); ++i) {
    if (valid.bits[i] == 0) continue;
    const int label = pseudo.labels[i];
    if (label >= c) {
      throw std::invalid_argument("pixel_loss: pseudo label exceeds channel count");
    }
    ++counts[label];
  }
  int n_classes = 0;
  for (auto count : counts) n_classes += count > 0 ? 1 : 0;

  LossGrad out;
  out.grad.assign(probs.size(), 0.0);
  if (n_classes == 0) return out;  // empty valid set

  const double floor = static_cast<double>(params.kl_floor);
  std::vector<double> per_class(static_cast<std::size_t>(c), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      if (valid.bits[pix] == 0) continue;
      const int label = pseudo.labels[pix];
      const std::size_t i = flat_index(y, x, label, w, c);
      const double p = probs[i];
      per_class[label] -= std::log(std::max(p, floor));
      if (p > floor) {
        out.grad[i] = -1.0 / (p * static_cast<double>(counts[label]) * n_classes);
      }
    }
  }
  double loss = 0.0;
  for (int k = 0; k < c; ++k) {
    if (counts[k] > 0) loss += per_class[k] / static_cast<double>(counts[k]);
  }
  out.value = loss / n_classes;
  return out;
}

LossGrad region_loss(std::span<const double> probs, int h, int w, int c,
                     const LabelMask& pseudo, const ValidMask& valid,
                     const LossParams& params) {
  params.validate();
  check_shape(probs.size(), h, w, c, "region_loss");
  check_mask_pair(pseudo, valid, h, w);

  LossGrad out;
  out.grad.assign(probs.size(), 0.0);
  const std::size_t n_valid = valid.count();
  if (n_valid == 0) return out;

  const int R = params.region_radius;
  const double gamma = static_cast<double>(params.margin);
  const double floor = static_cast<double>(params.kl_floor);
  double loss = 0.0;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t pix = static_cast<std::size_t>(y) * w + x;
      if (valid.bits[pix] == 0) continue;
      const int center_label = pseudo.labels[pix];

      // Count in-bounds window neighbors, center excluded.
      const int y0 = std::max(0, y - R), y1 = std::min(h - 1, y + R);
      const int x0 = std::max(0, x - R), x1 = std::min(w - 1, x + R);
      const int window = (y1 - y0 + 1) * (x1 - x0 + 1) - 1;
      if (window == 0) continue;

      const double coef = 1.0 / (static_cast<double>(n_valid) * window);
      const std::size_t ci = flat_index(y, x, 0, w, c);
      for (int ny = y0; ny <= y1; ++ny) {
        for (int nx = x0; nx <= x1; ++nx) {
          if (ny == y && nx == x) continue;
          const std::size_t cj = flat_index(ny, nx, 0, w, c);
          const bool boundary =
              pseudo.labels[static_cast<std::size_t>(ny) * w + nx] != center_label;

          // D = KL(m_j || m_i) with both distributions floored.
          double div = 0.0;
          for (int k = 0; k < c; ++k) {
            const double p = std::max(probs[cj + k], floor);
            const double q = std::max(probs[ci + k], floor);
            div += p * std::log(p / q);
          }

          double dscale;  // d(loss term)/dD
          if (boundary) {
            if (div >= gamma) continue;  // inactive hinge, zero gradient
            loss += coef * (gamma - div);
            dscale = -coef;
          } else {
            loss += coef * div;
            dscale = coef;
          }
          for (int k = 0; k < c; ++k) {
            const double p = std::max(probs[cj + k], floor);
            const double q = std::max(probs[ci + k], floor);
            if (probs[cj + k] > floor) {
              out.grad[cj + k] += dscale * (std::log(p / q) + 1.0);
            }
            if (probs[ci + k] > floor) {
              out.grad[ci + k] -= dscale * (p / q);
            }
          }
        }
      }
    }
  }
  out.value = loss;
  return out;
}

TotalLoss total_loss(std::span<const double> scores, int h, int w, int c,
                     const ImageLabels& labels, const LabelMask& pseudo,
                     const ValidMask& valid, double lambda,
                     const LossParams& params) {
  const auto m = softmax_map(scores, h, w, c);
  const auto cls = classification_loss(scores, h, w, c, labels, params);
  const auto pixel = pixel_loss(m, h, w, c, pseudo, valid, params);
  const auto region = region_loss(m, h, w, c, pseudo, valid, params);

  TotalLoss out;
  out.cls = cls.value;
  out.pixel = pixel.value;
  out.region = region.value;
  out.lambda = lambda;
  out.mask = pixel.value + lambda * region.value;
  out.total = cls.value + out.mask;

  // Probability-space gradients map to score space through the softmax:
  // ds_d = m_d (g_d - sum_c g_c m_c).
  out.grad.assign(scores.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t base = flat_index(y, x, 0, w, c);
      double dot = 0.0;
      for (int k = 0; k < c; ++k) {
        const double g = pixel.grad[base + k] + lambda * region.grad[base + k];
        dot += g * m[base + k];
      }
      for (int k = 0; k < c; ++k) {
        const double g = pixel.grad[base + k] + lambda * region.grad[base + k];
        out.grad[base + k] = cls.grad[base + k] + m[base + k] * (g - dot);
      }
    }
  }
  return out;
}

}  // namespace f64

std::vector<double> gwp_class_scores(const Tensor3& scores, const LossParams& params) {
  return f64::gwp_class_scores(widen(scores), scores.height(), scores.width(),
                               scores.channels(), params);
}

LossGrad classification_loss(const Tensor3& scores, const ImageLabels& labels,
                             const LossParams& params) {
  const auto r = f64::classification_loss(widen(scores), scores.height(),
                                          scores.width(), scores.channels(),
                                          labels, params);
  return {r.value, narrow(r.grad, scores.height(), scores.width(), scores.channels())};
}

LossGrad pixel_loss(const Tensor3& probs, const LabelMask& pseudo,
                    const ValidMask& valid, const LossParams& params) {
  const auto r = f64::pixel_loss(widen(probs), probs.height(), probs.width(),
                                 probs.channels(), pseudo, valid, params);
  return {r.value, narrow(r.grad, probs.height(), probs.width(), probs.channels())};
}

LossGrad region_loss(const Tensor3& probs, const LabelMask& pseudo,
                     const ValidMask& valid, const LossParams& params) {
  const auto r = f64::region_loss(widen(probs), probs.height(), probs.width(),
                                  probs.channels(), pseudo, valid, params);
  return {r.value, narrow(r.grad, probs.height(), probs.width(), probs.channels())};
}

double lambda_schedule(long long step, long long total_steps) {
  if (total_steps < 1) {
    throw std::invalid_argument("lambda_schedule: total_steps must be >= 1");
  }
  if (step < 0 || step > total_steps) {
    throw std::invalid_argument("lambda_schedule: step outside [0, total_steps]");
  }
  return static_cast<double>(step) / static_cast<double>(total_steps);
}

LossReport total_loss(const Tensor3& scores, const ImageLabels& labels,
                      const LabelMask& pseudo, const ValidMask& valid,
                      double lambda, const LossParams& params) {
  const auto r = f64::total_loss(widen(scores), scores.height(), scores.width(),
                                 scores.channels(), labels, pseudo, valid,
                                 lambda, params);
  LossReport report;
  report.cls = r.cls;
  report.pixel = r.pixel;
  report.region = r.region;
  report.lambda = r.lambda;
  report.mask = r.mask;
  report.total = r.total;
  report.grad_scores =
      narrow(r.grad, scores.height(), scores.width(), scores.channels());
  return report;
}

}  // namespace shapeseed
