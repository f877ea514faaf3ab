#include "vinpaint/resize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vinpaint {

Tensor4f resize_bilinear(const Tensor4f& clip, int out_height, int out_width) {
  const int L = clip.frames(), H = clip.height(), W = clip.width(), C = clip.channels();
  Tensor4f out(L, out_height, out_width, C);
  const double sy = static_cast<double>(H) / out_height;
  const double sx = static_cast<double>(W) / out_width;
  for (int l = 0; l < L; ++l) {
    const auto src = clip.frame_mat(l);
    auto dst = out.frame_mat(l);
    for (int oy = 0; oy < out_height; ++oy) {
      const double fy = std::clamp((oy + 0.5) * sy - 0.5, 0.0, static_cast<double>(H - 1));
      const int y0 = static_cast<int>(fy);
      const int y1 = std::min(y0 + 1, H - 1);
      const double wy = fy - y0;
      for (int ox = 0; ox < out_width; ++ox) {
        const double fx = std::clamp((ox + 0.5) * sx - 0.5, 0.0, static_cast<double>(W - 1));
        const int x0 = static_cast<int>(fx);
        const int x1 = std::min(x0 + 1, W - 1);
        const double wx = fx - x0;
        for (int c = 0; c < C; ++c) {
          const double v = (1 - wy) * ((1 - wx) * src(c, y0 * W + x0) + wx * src(c, y0 * W + x1)) +
                           wy * ((1 - wx) * src(c, y1 * W + x0) + wx * src(c, y1 * W + x1));
          dst(c, static_cast<long>(oy) * out_width + ox) = static_cast<float>(v);
        }
      }
    }
  }
  return out;
}

Tensor4f resize_nearest(const Tensor4f& clip, int out_height, int out_width) {
  const int L = clip.frames(), H = clip.height(), W = clip.width(), C = clip.channels();
  Tensor4f out(L, out_height, out_width, C);
  const double sy = static_cast<double>(H) / out_height;
  const double sx = static_cast<double>(W) / out_width;
  for (int l = 0; l < L; ++l) {
    const auto src = clip.frame_mat(l);
    auto dst = out.frame_mat(l);
    for (int oy = 0; oy < out_height; ++oy) {
      const int y = std::min(H - 1, static_cast<int>((oy + 0.5) * sy));
      for (int ox = 0; ox < out_width; ++ox) {
        const int x = std::min(W - 1, static_cast<int>((ox + 0.5) * sx));
        dst.col(static_cast<long>(oy) * out_width + ox) = src.col(static_cast<long>(y) * W + x);
      }
    }
  }
  return out;
}

Tensor4f reflect_pad_to_multiple(const Tensor4f& clip, int multiple) {
  const int H = clip.height(), W = clip.width();
  const int ph = (multiple - H % multiple) % multiple;
  const int pw = (multiple - W % multiple) % multiple;
  if (ph == 0 && pw == 0) return clip;
  if (ph > H || pw > W)
    throw std::invalid_argument("reflect_pad_to_multiple: input too small to mirror-pad");

  const int L = clip.frames(), C = clip.channels();
  const int Ho = H + ph, Wo = W + pw;
  Tensor4f out(L, Ho, Wo, C);
  for (int l = 0; l < L; ++l) {
    const auto src = clip.frame_mat(l);
    auto dst = out.frame_mat(l);
    for (int y = 0; y < Ho; ++y) {
      const int sy = y < H ? y : 2 * H - 1 - y;
      for (int x = 0; x < Wo; ++x) {
        const int sx = x < W ? x : 2 * W - 1 - x;
        dst.col(static_cast<long>(y) * Wo + x) = src.col(static_cast<long>(sy) * W + sx);
      }
    }
  }
  return out;
}

Tensor4f crop(const Tensor4f& clip, int out_height, int out_width) {
  if (out_height > clip.height() || out_width > clip.width())
    throw std::invalid_argument("crop: target larger than input");
  if (out_height == clip.height() && out_width == clip.width()) return clip;
  const int L = clip.frames(), W = clip.width(), C = clip.channels();
  Tensor4f out(L, out_height, out_width, C);
  for (int l = 0; l < L; ++l) {
    const auto src = clip.frame_mat(l);
    auto dst = out.frame_mat(l);
    for (int y = 0; y < out_height; ++y)
      dst.middleCols(static_cast<long>(y) * out_width, out_width) =
          src.middleCols(static_cast<long>(y) * W, out_width);
  }
  return out;
}

WorkingResolution resize_to_working_resolution(const Tensor4f& video, const Tensor4f& mask) {
  require_mask_shape(mask, video, "resize_to_working_resolution");
  WorkingResolution wr;
  if (video.height() > kWorkingHeight || video.width() > kWorkingWidth) {
    wr.video = resize_bilinear(video, kWorkingHeight, kWorkingWidth);
    Tensor4f m = resize_nearest(mask, kWorkingHeight, kWorkingWidth);
    m.array() = (m.array() > 0.5f).select(Arr<float>::Ones(m.size()), 0.0f);
    wr.mask = std::move(m);
  } else {
    wr.video = video;
    wr.mask = mask;
  }
  wr.pre_pad_height = wr.video.height();
  wr.pre_pad_width = wr.video.width();
  wr.video = reflect_pad_to_multiple(wr.video, 8);
  wr.mask = reflect_pad_to_multiple(wr.mask, 8);
  return wr;
}

}  // namespace vinpaint
