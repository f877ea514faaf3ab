#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// Metrics operate on the display scale: clip values in [-1, 1] are mapped
/// to [0, 1] before any comparison.
inline double to_unit(float v) { return (static_cast<double>(v) + 1.0) / 2.0; }

inline constexpr double kPsnrCap = 100.0;

/// Frame-by-frame PSNR with peak 1.0, averaged over frames. Frames with zero
/// MSE contribute the cap. When region is non-null, only pixels with
/// region = 1 are compared (frames whose region is empty are skipped).
inline double psnr(const Tensor4f& reference, const Tensor4f& candidate,
                   const Tensor4f* region = nullptr, double cap_db = kPsnrCap) {
  reference.require_shape(candidate, "psnr");
  if (region) require_mask_shape(*region, reference, "psnr");

  const int L = reference.frames();
  const long fp = reference.frame_pixels();
  const int C = reference.channels();
  double total = 0.0;
  int counted = 0;
  for (int l = 0; l < L; ++l) {
    const auto rm = reference.frame_mat(l);
    const auto cm = candidate.frame_mat(l);
    double se = 0.0;
    long n = 0;
    for (long p = 0; p < fp; ++p) {
      if (region && region->frame_mat(l)(0, p) <= 0.5f) continue;
      for (int c = 0; c < C; ++c) {
        const double d = to_unit(rm(c, p)) - to_unit(cm(c, p));
        se += d * d;
      }
      n += C;
    }
    if (n == 0) continue;
    const double mse = se / static_cast<double>(n);
    total += mse <= 0.0 ? cap_db : std::min(cap_db, -10.0 * std::log10(mse));
    ++counted;
  }
  if (counted == 0) throw std::invalid_argument("psnr: empty comparison region");
  return total / counted;
}

namespace detail {

inline std::vector<double> gaussian_window(int taps, double sigma) {
  std::vector<double> w(static_cast<std::size_t>(taps));
  const int half = taps / 2;
  double sum = 0.0;
  for (int i = 0; i < taps; ++i) {
    const double x = i - half;
    w[static_cast<std::size_t>(i)] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += w[static_cast<std::size_t>(i)];
  }
  for (auto& v : w) v /= sum;
  return w;
}

/// Luminance plane of one frame on the [0, 1] scale.
inline Mat<double> luminance(const Tensor4f& clip, int frame) {
  const int H = clip.height(), W = clip.width();
  Mat<double> y(H, W);
  const auto m = clip.frame_mat(frame);
  for (int h = 0; h < H; ++h)
    for (int w = 0; w < W; ++w) {
      const long p = static_cast<long>(h) * W + w;
      y(h, w) = 0.299 * to_unit(m(0, p)) + 0.587 * to_unit(m(1, p)) + 0.114 * to_unit(m(2, p));
    }
  return y;
}

/// Separable filter, valid region only (output is smaller by taps-1).
inline Mat<double> filter_valid(const Mat<double>& img, const std::vector<double>& w) {
  const int taps = static_cast<int>(w.size());
  const int H = static_cast<int>(img.rows()), W = static_cast<int>(img.cols());
  Mat<double> tmp(H, W - taps + 1);
  for (int h = 0; h < H; ++h)
    for (int c = 0; c + taps <= W; ++c) {
      double acc = 0.0;
      for (int k = 0; k < taps; ++k) acc += w[static_cast<std::size_t>(k)] * img(h, c + k);
      tmp(h, c) = acc;
    }
  Mat<double> out(H - taps + 1, W - taps + 1);
  for (int r = 0; r + taps <= H; ++r)
    for (int c = 0; c < tmp.cols(); ++c) {
      double acc = 0.0;
      for (int k = 0; k < taps; ++k) acc += w[static_cast<std::size_t>(k)] * tmp(r + k, c);
      out(r, c) = acc;
    }
  return out;
}

}  // namespace detail

/// Single-scale SSIM on the luminance plane: 11-tap Gaussian window with
/// sigma 1.5, C1 = 0.01^2, C2 = 0.03^2, valid-window borders, averaged over
/// pixels then frames.
inline double ssim(const Tensor4f& reference, const Tensor4f& candidate) {
  reference.require_shape(candidate, "ssim");
  constexpr int kTaps = 11;
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  if (reference.height() < kTaps || reference.width() < kTaps)
    throw std::invalid_argument("ssim: frames smaller than the 11x11 window");

  static const std::vector<double> w = detail::gaussian_window(kTaps, 1.5);
  double total = 0.0;
  for (int l = 0; l < reference.frames(); ++l) {
    const Mat<double> x = detail::luminance(reference, l);
    const Mat<double> y = detail::luminance(candidate, l);
    const Mat<double> mu_x = detail::filter_valid(x, w);
    const Mat<double> mu_y = detail::filter_valid(y, w);
    const Mat<double> xx = detail::filter_valid(x.cwiseProduct(x), w);
    const Mat<double> yy = detail::filter_valid(y.cwiseProduct(y), w);
    const Mat<double> xy = detail::filter_valid(x.cwiseProduct(y), w);

    double frame_sum = 0.0;
    for (int r = 0; r < mu_x.rows(); ++r)
      for (int c = 0; c < mu_x.cols(); ++c) {
        const double mx = mu_x(r, c), my = mu_y(r, c);
        const double var_x = xx(r, c) - mx * mx;
        const double var_y = yy(r, c) - my * my;
        const double cov = xy(r, c) - mx * my;
        frame_sum += ((2.0 * mx * my + kC1) * (2.0 * cov + kC2)) /
                     ((mx * mx + my * my + kC1) * (var_x + var_y + kC2));
      }
    total += frame_sum / (static_cast<double>(mu_x.rows()) * mu_x.cols());
  }
  return total / reference.frames();
}

/// Cross-sample variability: the per-pixel population standard deviation
/// across samples, averaged over the region, normalized by the standard
/// deviation of the reference video's intensities. Zero iff all samples
/// agree on the region.
inline double diversity(const std::vector<Tensor4f>& samples, const Tensor4f& region,
                        const Tensor4f& reference) {
  if (samples.size() < 2) throw std::invalid_argument("diversity: need at least 2 samples");
  for (const auto& s : samples) samples[0].require_shape(s, "diversity");
  require_mask_shape(region, samples[0], "diversity");

  const long pixels = samples[0].pixels();
  const int C = samples[0].channels();
  const double n = static_cast<double>(samples.size());

  double std_sum = 0.0;
  long counted = 0;
  const float* rv = region.data();
  for (long p = 0; p < pixels; ++p) {
    if (rv[p] <= 0.5f) continue;
    for (int c = 0; c < C; ++c) {
      double mean = 0.0;
      for (const auto& s : samples) mean += to_unit(s.mat()(c, p));
      mean /= n;
      double var = 0.0;
      for (const auto& s : samples) {
        const double d = to_unit(s.mat()(c, p)) - mean;
        var += d * d;
      }
      std_sum += std::sqrt(var / n);
      ++counted;
    }
  }
  if (counted == 0) throw std::invalid_argument("diversity: empty region");

  double ref_mean = 0.0, ref_sq = 0.0;
  const long total = reference.size();
  const float* rd = reference.data();
  for (long i = 0; i < total; ++i) {
    const double v = to_unit(rd[i]);
    ref_mean += v;
    ref_sq += v * v;
  }
  ref_mean /= static_cast<double>(total);
  const double ref_std = std::sqrt(std::max(0.0, ref_sq / static_cast<double>(total) - ref_mean * ref_mean));
  if (ref_std <= 0.0) throw std::invalid_argument("diversity: reference video is constant");
  return (std_sum / static_cast<double>(counted)) / ref_std;
}

// --- learned perceptual metric seam ----------------------------------------

using PerceptualFn = std::function<double(const Tensor4f& reference, const Tensor4f& candidate)>;

/// Adapters for learned perceptual metrics plug in here; none ship built in
/// (they need large pretrained feature extractors).
inline std::map<std::string, PerceptualFn>& perceptual_registry() {
  static std::map<std::string, PerceptualFn> registry;
  return registry;
}

inline void register_perceptual(const std::string& name, PerceptualFn fn) {
  perceptual_registry()[name] = std::move(fn);
}

inline bool perceptual_available(const std::string& name) {
  return perceptual_registry().count(name) > 0;
}

inline double perceptual(const std::string& name, const Tensor4f& reference,
                         const Tensor4f& candidate) {
  auto it = perceptual_registry().find(name);
  if (it == perceptual_registry().end())
    throw std::runtime_error("perceptual metric '" + name + "' is not available: no adapter registered");
  return it->second(reference, candidate);
}

// --- report -----------------------------------------------------------------

struct MetricRow {
  std::string name;
  std::optional<double> psnr_db;
  bool psnr_identical = false;  // candidate equals reference exactly
  std::optional<double> masked_psnr_db;
  std::optional<double> ssim_value;
  std::optional<double> diversity_value;
  std::map<std::string, double> plugin_values;  // keyed by plugin name
};

/// Fixed-column table: a CSV plus a readable summary. Plugin columns appear
/// only when at least one row carries the plugin's value.
struct MetricReport {
  std::vector<MetricRow> rows;
  std::string to_csv() const;
  std::string to_text() const;
};

}  // namespace vinpaint
