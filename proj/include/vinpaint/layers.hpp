#pragma once

#include <cstdint>
#include <stdexcept>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

template <typename Scalar>
Tensor4<Scalar> relu_forward(const Tensor4<Scalar>& x) {
  Tensor4<Scalar> y = Tensor4<Scalar>::uninit(x.frames(), x.height(), x.width(), x.channels());
  y.array() = x.array().max(Scalar(0));
  return y;
}

template <typename Scalar>
void relu_inplace(Tensor4<Scalar>& x) {
  x.array() = x.array().max(Scalar(0));
}

/// grad through relu, gated by the stored activation output.
template <typename Scalar>
Tensor4<Scalar> relu_backward(const Tensor4<Scalar>& grad_out, const Tensor4<Scalar>& output) {
  Tensor4<Scalar> g =
      Tensor4<Scalar>::uninit(grad_out.frames(), grad_out.height(), grad_out.width(), grad_out.channels());
  g.array() = (output.array() > Scalar(0)).select(grad_out.array(), Scalar(0));
  return g;
}

template <typename Scalar>
void relu_backward_inplace(Tensor4<Scalar>& grad, const Tensor4<Scalar>& output) {
  grad.array() = (output.array() > Scalar(0)).select(grad.array(), Scalar(0));
}

/// 2x2 max pooling over height and width only; frames are untouched.
/// argmax stores the winning corner (0..3) per output element for backward.
template <typename Scalar>
Tensor4<Scalar> maxpool2_forward(const Tensor4<Scalar>& x, Tensor4<std::uint8_t>* argmax) {
  const int L = x.frames(), H = x.height(), W = x.width(), C = x.channels();
  if (H % 2 != 0 || W % 2 != 0)
    throw std::invalid_argument("maxpool2_forward: height and width must be even");
  Tensor4<Scalar> y = Tensor4<Scalar>::uninit(L, H / 2, W / 2, C);
  if (argmax) *argmax = Tensor4<std::uint8_t>::uninit(L, H / 2, W / 2, C);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    const auto in = x.frame_mat(l);
    auto out = y.frame_mat(l);
    for (int oh = 0; oh < H / 2; ++oh) {
      for (int ow = 0; ow < W / 2; ++ow) {
        const int p00 = (2 * oh) * W + 2 * ow;
        const int corners[4] = {p00, p00 + 1, p00 + W, p00 + W + 1};
        const long q = oh * (W / 2) + ow;
        for (int c = 0; c < C; ++c) {
          Scalar best = in(c, corners[0]);
          int best_k = 0;
          for (int k = 1; k < 4; ++k) {
            const Scalar v = in(c, corners[k]);
            if (v > best) {
              best = v;
              best_k = k;
            }
          }
          out(c, q) = best;
          if (argmax) argmax->frame_mat(l)(c, q) = static_cast<std::uint8_t>(best_k);
        }
      }
    }
  }
  return y;
}

template <typename Scalar>
Tensor4<Scalar> maxpool2_backward(const Tensor4<Scalar>& grad_out,
                                  const Tensor4<std::uint8_t>& argmax) {
  const int L = grad_out.frames(), Ho = grad_out.height(), Wo = grad_out.width(),
            C = grad_out.channels();
  Tensor4<Scalar> g = Tensor4<Scalar>::uninit(L, Ho * 2, Wo * 2, C);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    const auto go = grad_out.frame_mat(l);
    const auto am = argmax.frame_mat(l);
    auto gi = g.frame_mat(l);
    gi.setZero();
    const int W = Wo * 2;
    for (int oh = 0; oh < Ho; ++oh) {
      for (int ow = 0; ow < Wo; ++ow) {
        const int p00 = (2 * oh) * W + 2 * ow;
        const int corners[4] = {p00, p00 + 1, p00 + W, p00 + W + 1};
        const long q = oh * Wo + ow;
        for (int c = 0; c < C; ++c) gi(c, corners[am(c, q)]) += go(c, q);
      }
    }
  }
  return g;
}

/// Nearest-neighbor 2x spatial upsampling.
template <typename Scalar>
Tensor4<Scalar> upsample2_forward(const Tensor4<Scalar>& x) {
  const int L = x.frames(), H = x.height(), W = x.width(), C = x.channels();
  Tensor4<Scalar> y = Tensor4<Scalar>::uninit(L, H * 2, W * 2, C);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    const auto in = x.frame_mat(l);
    auto out = y.frame_mat(l);
    for (int oh = 0; oh < 2 * H; ++oh)
      for (int ow = 0; ow < 2 * W; ++ow)
        out.col(oh * 2 * W + ow) = in.col((oh / 2) * W + ow / 2);
  }
  return y;
}

template <typename Scalar>
Tensor4<Scalar> upsample2_backward(const Tensor4<Scalar>& grad_out) {
  const int L = grad_out.frames(), Ho = grad_out.height(), Wo = grad_out.width(),
            C = grad_out.channels();
  if (Ho % 2 != 0 || Wo % 2 != 0)
    throw std::invalid_argument("upsample2_backward: odd gradient shape");
  Tensor4<Scalar> g = Tensor4<Scalar>::uninit(L, Ho / 2, Wo / 2, C);
#pragma omp parallel for schedule(static)
  for (int l = 0; l < L; ++l) {
    const auto go = grad_out.frame_mat(l);
    auto gi = g.frame_mat(l);
    for (int h = 0; h < Ho / 2; ++h) {
      for (int w = 0; w < Wo / 2; ++w) {
        const int p00 = (2 * h) * Wo + 2 * w;
        gi.col(h * (Wo / 2) + w) =
            go.col(p00) + go.col(p00 + 1) + go.col(p00 + Wo) + go.col(p00 + Wo + 1);
      }
    }
  }
  return g;
}

/// Channel concatenation [a | b].
template <typename Scalar>
Tensor4<Scalar> concat_channels(const Tensor4<Scalar>& a, const Tensor4<Scalar>& b) {
  if (a.frames() != b.frames() || a.height() != b.height() || a.width() != b.width())
    throw std::invalid_argument("concat_channels: spatial shape mismatch");
  Tensor4<Scalar> y = Tensor4<Scalar>::uninit(a.frames(), a.height(), a.width(), a.channels() + b.channels());
  y.mat().topRows(a.channels()) = a.mat();
  y.mat().bottomRows(b.channels()) = b.mat();
  return y;
}

template <typename Scalar>
void split_channels(const Tensor4<Scalar>& grad, int channels_a, Tensor4<Scalar>& grad_a,
                    Tensor4<Scalar>& grad_b) {
  const int cb = grad.channels() - channels_a;
  grad_a = Tensor4<Scalar>::uninit(grad.frames(), grad.height(), grad.width(), channels_a);
  grad_b = Tensor4<Scalar>::uninit(grad.frames(), grad.height(), grad.width(), cb);
  grad_a.mat() = grad.mat().topRows(channels_a);
  grad_b.mat() = grad.mat().bottomRows(cb);
}

}  // namespace vinpaint
