#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vinpaint/random.hpp"
#include "vinpaint/schedule.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// Knobs for the random-stroke training mask generator.
struct StrokeMaskConfig {
  int strokes_min = 1, strokes_max = 5;        // strokes per clip
  double brush_min = 10.0, brush_max = 40.0;   // brush width, pixels
  int steps_min = 6, steps_max = 14;           // random-walk segments
  double drift_min = 0.5, drift_max = 3.0;     // per-frame drift, pixels

  void validate() const {
    if (strokes_min < 0 || strokes_max < strokes_min)
      throw std::invalid_argument("StrokeMaskConfig: bad strokes range");
    if (!(brush_min > 0.0) || brush_max < brush_min)
      throw std::invalid_argument("StrokeMaskConfig: bad brush range");
    if (steps_min < 1 || steps_max < steps_min)
      throw std::invalid_argument("StrokeMaskConfig: bad steps range");
    if (!(drift_min >= 0.0) || drift_max < drift_min)
      throw std::invalid_argument("StrokeMaskConfig: bad drift range");
  }
};

namespace detail {

struct Point {
  double x, y;
};

inline double point_segment_dist2(double px, double py, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double len2 = vx * vx + vy * vy;
  double s = 0.0;
  if (len2 > 0.0) s = std::clamp(((px - a.x) * vx + (py - a.y) * vy) / len2, 0.0, 1.0);
  const double dx = px - (a.x + s * vx), dy = py - (a.y + s * vy);
  return dx * dx + dy * dy;
}

template <typename Scalar>
void rasterize_stroke(Tensor4<Scalar>& mask, int frame, const std::vector<Point>& pts,
                      double ox, double oy, double radius) {
  const int H = mask.height(), W = mask.width();
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const Point a{pts[i].x + ox, pts[i].y + oy};
    const Point b{pts[i + 1].x + ox, pts[i + 1].y + oy};
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
    const int x1 = std::min(W - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
    const int y1 = std::min(H - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
    const double r2 = radius * radius;
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (point_segment_dist2(x, y, a, b) <= r2) mask.at(frame, y, x, 0) = Scalar(1);
  }
}

}  // namespace detail

/// Animated free-form training mask: random-walk polylines stamped with a
/// round brush, drifting by a small random offset every frame so the same
/// stroke stays temporally coherent while moving.
template <typename Scalar>
MaskVolume<Scalar> generate_stroke_mask(int frames, int height, int width,
                                        const StrokeMaskConfig& cfg, RandomStream& rng) {
  cfg.validate();
  MaskVolume<Scalar> mask(frames, height, width, 1);
  const int n_strokes = static_cast<int>(rng.uniform_int(cfg.strokes_min, cfg.strokes_max));
  for (int s = 0; s < n_strokes; ++s) {
    const double brush = rng.uniform(cfg.brush_min, cfg.brush_max);
    const double radius = brush / 2.0;
    const int n_steps = static_cast<int>(rng.uniform_int(cfg.steps_min, cfg.steps_max));

    std::vector<detail::Point> pts;
    pts.reserve(n_steps + 1);
    detail::Point p{rng.uniform(0.0, width), rng.uniform(0.0, height)};
    pts.push_back(p);
    double angle = rng.uniform(0.0, 2.0 * M_PI);
    for (int i = 0; i < n_steps; ++i) {
      angle += rng.uniform(-1.0, 1.0);
      const double step = rng.uniform(0.5, 1.5) * brush;
      p.x += step * std::cos(angle);
      p.y += step * std::sin(angle);
      pts.push_back(p);
    }

    const double drift = rng.uniform(cfg.drift_min, cfg.drift_max);
    double ox = 0.0, oy = 0.0;
    for (int f = 0; f < frames; ++f) {
      if (f > 0) {
        ox += rng.uniform(-drift, drift);
        oy += rng.uniform(-drift, drift);
      }
      detail::rasterize_stroke(mask, f, pts, ox, oy, radius);
    }
  }
  return mask;
}

/// Pointwise OR of two binary masks: 1 - (1 - a)(1 - b).
template <typename Scalar>
MaskVolume<Scalar> combine_masks(const MaskVolume<Scalar>& test_mask,
                                 const MaskVolume<Scalar>& train_mask) {
  test_mask.require_shape(train_mask, "combine_masks");
  MaskVolume<Scalar> out = MaskVolume<Scalar>::uninit(test_mask.frames(), test_mask.height(), test_mask.width(), 1);
  out.array() = test_mask.array().max(train_mask.array());
  return out;
}

/// Zeroes every channel of pixels where mask = 1. Implemented as a select
/// rather than a multiply so the hidden values never enter the arithmetic
/// (no -0.0 or NaN leakage).
template <typename Scalar>
Tensor4<Scalar> mask_out(const Tensor4<Scalar>& x, const MaskVolume<Scalar>& mask) {
  require_mask_shape(mask, x, "mask_out");
  Tensor4<Scalar> out = x;
  auto m = out.mat();
  const Scalar* mv = mask.data();
  const long pixels = x.pixels();
  for (long p = 0; p < pixels; ++p)
    if (mv[p] > Scalar(0.5)) m.col(p).setZero();
  return out;
}

/// The conditioning inputs for one training step.
template <typename Scalar>
struct ConditioningBundle {
  VideoClip<Scalar> x_tilde;    // noised input, test region replaced by pure noise
  VideoClip<Scalar> y;          // observations, zero under the combined mask
  MaskVolume<Scalar> mask;      // combined test-or-train mask (the M channel)
  MaskVolume<Scalar> loss_mask; // train-and-not-test: where the loss is counted
};

/// Builds (x_tilde, y, M, loss support) from a clean clip. The clip content
/// under the test mask never reaches any output field.
template <typename Scalar>
ConditioningBundle<Scalar> build_conditioning(const VideoClip<Scalar>& x0,
                                              const MaskVolume<Scalar>& test_mask,
                                              const MaskVolume<Scalar>& train_mask, int t,
                                              const Tensor4<Scalar>& eps,
                                              const DiffusionSchedule& sched) {
  require_video_shape(x0, "build_conditioning");
  require_mask_shape(test_mask, x0, "build_conditioning");
  require_mask_shape(train_mask, x0, "build_conditioning");
  x0.require_shape(eps, "build_conditioning");
  sched.require_timestep(t);

  ConditioningBundle<Scalar> b;
  b.mask = combine_masks(test_mask, train_mask);

  Tensor4<Scalar> hidden = mask_out(x0, test_mask);
  const Scalar a = static_cast<Scalar>(sched.sqrt_alpha_bar(t));
  const Scalar sb = static_cast<Scalar>(sched.sqrt_one_minus_alpha_bar(t));
  b.x_tilde = Tensor4<Scalar>::uninit(x0.frames(), x0.height(), x0.width(), 3);
  b.x_tilde.array() = a * hidden.array() + sb * eps.array();

  b.y = mask_out(x0, b.mask);

  b.loss_mask = MaskVolume<Scalar>::uninit(x0.frames(), x0.height(), x0.width(), 1);
  b.loss_mask.array() =
      (train_mask.array() > Scalar(0.5) && test_mask.array() <= Scalar(0.5))
          .select(Arr<Scalar>::Ones(train_mask.size()), Scalar(0));
  return b;
}

/// Sum of squared residuals over the loss support. Pixels outside the
/// support contribute nothing and their values are never read.
template <typename Scalar>
double masked_loss(const VideoClip<Scalar>& x0, const VideoClip<Scalar>& prediction,
                   const MaskVolume<Scalar>& loss_mask, VideoClip<Scalar>* grad = nullptr) {
  x0.require_shape(prediction, "masked_loss");
  require_mask_shape(loss_mask, x0, "masked_loss");

  if (grad) {
    *grad = VideoClip<Scalar>(x0.frames(), x0.height(), x0.width(), x0.channels());
  }
  const auto xm = x0.mat();
  const auto pm = prediction.mat();
  const Scalar* mv = loss_mask.data();
  const long pixels = x0.pixels();
  const int C = x0.channels();
  double loss = 0.0;
  for (long p = 0; p < pixels; ++p) {
    if (mv[p] <= Scalar(0.5)) continue;
    for (int c = 0; c < C; ++c) {
      const double d = static_cast<double>(xm(c, p)) - static_cast<double>(pm(c, p));
      loss += d * d;
      if (grad) grad->mat()(c, p) = static_cast<Scalar>(-2.0 * d);
    }
  }
  return loss;
}

}  // namespace vinpaint
