#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vinpaint/random.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// 3x3x3 convolution over (frames, height, width), padding 1, stride 1.
///
/// Weights are stored as a (out_channels) x (27 * in_channels) matrix whose
/// column block o*in_channels..(o+1)*in_channels-1 holds the tap for kernel
/// offset o = ((dl+1)*3 + (dh+1))*3 + (dw+1). Forward runs one GEMM per
/// frame against an im2col patch matrix; backward-data is the transposed
/// gather so frames can be processed in parallel without write conflicts,
/// and backward-weights reduces per-frame partials in frame order. Results
/// are therefore bitwise independent of the number of threads.
template <typename Scalar>
class Conv3d {
 public:
  static constexpr int kTaps = 27;

  Conv3d() = default;

  Conv3d(int in_channels, int out_channels, RandomStream& rng)
      : in_channels_(in_channels), out_channels_(out_channels) {
    weight_.setZero(out_channels, kTaps * in_channels);
    bias_.setZero(out_channels);
    weight_grad_.setZero(out_channels, kTaps * in_channels);
    bias_grad_.setZero(out_channels);
    // Fan-in scaled uniform weights, zero biases. Zero bias keeps narrow
    // models from starting with whole layers on the dead side of the ReLU.
    const double bound = 1.0 / std::sqrt(static_cast<double>(kTaps) * in_channels);
    for (long i = 0; i < weight_.size(); ++i)
      weight_.data()[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  }

  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }
  long parameter_count() const { return weight_.size() + bias_.size(); }

  Mat<Scalar>& weight() { return weight_; }
  const Mat<Scalar>& weight() const { return weight_; }
  Vec<Scalar>& bias() { return bias_; }
  const Vec<Scalar>& bias() const { return bias_; }
  Mat<Scalar>& weight_grad() { return weight_grad_; }
  Vec<Scalar>& bias_grad() { return bias_grad_; }

  void zero_grad() {
    weight_grad_.setZero();
    bias_grad_.setZero();
  }

  Tensor4<Scalar> forward(const Tensor4<Scalar>& x) const {
    check_input(x);
    const int L = x.frames(), H = x.height(), W = x.width();
    Tensor4<Scalar> y = Tensor4<Scalar>::uninit(L, H, W, out_channels_);
#pragma omp parallel
    {
      MatMap<Scalar> patches(workspace(static_cast<std::size_t>(kTaps) * in_channels_ * H * W),
                             kTaps * in_channels_, H * W);
#pragma omp for schedule(static)
      for (int l = 0; l < L; ++l) {
        fill_patches(x, l, patches);
        auto out = y.frame_mat(l);
        out.noalias() = weight_ * patches;
        out.colwise() += bias_;
      }
    }
    return y;
  }

  /// Returns the input gradient and accumulates weight/bias gradients.
  Tensor4<Scalar> backward(const Tensor4<Scalar>& x, const Tensor4<Scalar>& grad_out) {
    check_input(x);
    if (grad_out.channels() != out_channels_ || grad_out.frames() != x.frames() ||
        grad_out.height() != x.height() || grad_out.width() != x.width())
      throw std::invalid_argument("Conv3d::backward: gradient shape mismatch");

    const int L = x.frames(), H = x.height(), W = x.width();

    // Weight/bias gradients: per-frame partials, reduced in frame order.
    std::vector<Mat<Scalar>> wpart(static_cast<std::size_t>(L));
    std::vector<Vec<Scalar>> bpart(static_cast<std::size_t>(L));
#pragma omp parallel
    {
      MatMap<Scalar> patches(workspace(static_cast<std::size_t>(kTaps) * in_channels_ * H * W),
                             kTaps * in_channels_, H * W);
#pragma omp for schedule(static)
      for (int l = 0; l < L; ++l) {
        fill_patches(x, l, patches);
        wpart[l].noalias() = grad_out.frame_mat(l) * patches.transpose();
        bpart[l] = grad_out.frame_mat(l).rowwise().sum();
      }
    }
    for (int l = 0; l < L; ++l) {
      weight_grad_ += wpart[l];
      bias_grad_ += bpart[l];
    }

    // Input gradient as a gather over the offsets that read each input frame.
    Tensor4<Scalar> grad_in = Tensor4<Scalar>::uninit(L, H, W, in_channels_);
#pragma omp parallel
    {
      MatMap<Scalar> spread(workspace(static_cast<std::size_t>(9) * in_channels_ * H * W),
                            9 * in_channels_, H * W);
#pragma omp for schedule(static)
      for (int li = 0; li < L; ++li) {
        auto gin = grad_in.frame_mat(li);
        gin.setZero();
        for (int dl = -1; dl <= 1; ++dl) {
          const int lo = li - dl;  // output frame whose offset dl reads frame li
          if (lo < 0 || lo >= L) continue;
          spread.noalias() =
              weight_.middleCols((dl + 1) * 9 * in_channels_, 9 * in_channels_).transpose() *
              grad_out.frame_mat(lo);
          for (int dh = -1; dh <= 1; ++dh) {
            for (int dw = -1; dw <= 1; ++dw) {
              const int r0 = ((dh + 1) * 3 + (dw + 1)) * in_channels_;
              for (int hi = 0; hi < H; ++hi) {
                const int ho = hi - dh;
                if (ho < 0 || ho >= H) continue;
                const int wlo = std::max(0, dw), whi = std::min(W, W + dw);
                if (whi <= wlo) continue;
                gin.middleCols(hi * W + wlo, whi - wlo) +=
                    spread.block(r0, ho * W + wlo - dw, in_channels_, whi - wlo);
              }
            }
          }
        }
      }
    }
    return grad_in;
  }

  /// Per-thread scratch shared by all convolutions; grows monotonically.
  static Scalar* workspace(std::size_t n) {
    thread_local std::vector<Scalar> buf;
    if (buf.size() < n) buf.resize(n);
    return buf.data();
  }

  /// im2col for one output frame: patches is (27*Cin) x (H*W), row block o*Cin
  /// holds the input shifted by offset o, zero outside the volume.
  void fill_patches(const Tensor4<Scalar>& x, int l, MatMap<Scalar>& patches) const {
    const int L = x.frames(), H = x.height(), W = x.width(), C = in_channels_;
    for (int dl = -1; dl <= 1; ++dl) {
      const int block0 = (dl + 1) * 9 * C;
      const int ls = l + dl;
      if (ls < 0 || ls >= L) {
        patches.middleRows(block0, 9 * C).setZero();
        continue;
      }
      const auto src = x.frame_mat(ls);
      for (int dh = -1; dh <= 1; ++dh) {
        for (int dw = -1; dw <= 1; ++dw) {
          const int r0 = block0 + ((dh + 1) * 3 + (dw + 1)) * C;
          for (int h = 0; h < H; ++h) {
            const int hs = h + dh;
            if (hs < 0 || hs >= H) {
              patches.block(r0, h * W, C, W).setZero();
              continue;
            }
            const int wlo = std::max(0, -dw), whi = std::min(W, W - dw);
            if (wlo > 0) patches.block(r0, h * W, C, wlo).setZero();
            if (whi < W) patches.block(r0, h * W + whi, C, W - whi).setZero();
            patches.block(r0, h * W + wlo, C, whi - wlo) =
                src.block(0, hs * W + wlo + dw, C, whi - wlo);
          }
        }
      }
    }
  }

 private:
  void check_input(const Tensor4<Scalar>& x) const {
    if (x.channels() != in_channels_)
      throw std::invalid_argument("Conv3d: input channel count mismatch");
  }

  int in_channels_ = 0, out_channels_ = 0;
  Mat<Scalar> weight_, weight_grad_;
  Vec<Scalar> bias_;
  Vec<Scalar> bias_grad_;
};

}  // namespace vinpaint
