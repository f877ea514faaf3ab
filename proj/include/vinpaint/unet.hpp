#pragma once

#include <string>
#include <utility>
#include <vector>

#include "vinpaint/conv3d.hpp"
#include "vinpaint/layers.hpp"
#include "vinpaint/time_encoding.hpp"

namespace vinpaint {

/// Flat view of one named parameter block and its gradient.
template <typename Scalar>
struct ParamRef {
  std::string name;
  Scalar* value;
  Scalar* grad;
  long size;
};

template <typename Scalar>
struct UNetCache {
  Tensor4<Scalar> input;
  Tensor4<Scalar> r1_0, r1_1, skip1, p1;
  Tensor4<Scalar> r2_1, skip2, p2;
  Tensor4<Scalar> r3_1, skip3, p3;
  Tensor4<Scalar> r4_1, r4_2;
  Tensor4<Scalar> cat3, r5_1, r5_2;
  Tensor4<Scalar> cat2, r6_1, r6_2;
  Tensor4<Scalar> cat1, r7_1, r7_2;
  Tensor4<std::uint8_t> am1, am2, am3;
};

/// 4-level 3D UNet predicting x0 from the 23-channel conditioning stack
/// (3 noised video + 3 observed video + 1 mask + 16 time channels).
/// 16 convolutions, all 3x3x3 / pad 1 / stride 1, ReLU on every hidden
/// layer, linear output. Pooling and upsampling act on height/width only;
/// the temporal dimension is preserved everywhere.
template <typename Scalar>
class DenoiserModel {
 public:
  static constexpr int kInputChannels = 3 + 3 + 1 + kTimeChannels;
  static constexpr int kOutputChannels = 3;

  DenoiserModel() = default;

  DenoiserModel(int channels, RandomStream& rng) : channels_(channels) {
    if (channels < 1) throw std::invalid_argument("DenoiserModel: channels must be >= 1");
    const int c = channels;
    enc1_0_ = Conv3d<Scalar>(kInputChannels, c, rng);
    enc1_1_ = Conv3d<Scalar>(c, c, rng);
    enc1_2_ = Conv3d<Scalar>(c, c, rng);
    enc2_1_ = Conv3d<Scalar>(c, c, rng);
    enc2_2_ = Conv3d<Scalar>(c, c, rng);
    enc3_1_ = Conv3d<Scalar>(c, c, rng);
    enc3_2_ = Conv3d<Scalar>(c, c, rng);
    enc4_1_ = Conv3d<Scalar>(c, c, rng);
    enc4_2_ = Conv3d<Scalar>(c, c, rng);
    dec3_1_ = Conv3d<Scalar>(2 * c, c, rng);
    dec3_2_ = Conv3d<Scalar>(c, c, rng);
    dec2_1_ = Conv3d<Scalar>(2 * c, c, rng);
    dec2_2_ = Conv3d<Scalar>(c, c, rng);
    dec1_1_ = Conv3d<Scalar>(2 * c, c, rng);
    dec1_2_ = Conv3d<Scalar>(c, c, rng);
    out_ = Conv3d<Scalar>(c, kOutputChannels, rng);
  }

  int channels() const { return channels_; }

  long parameter_count() const {
    long n = 0;
    for (const auto& [name, conv] : layers()) n += conv->parameter_count();
    return n;
  }

  Tensor4<Scalar> forward(const Tensor4<Scalar>& input, UNetCache<Scalar>* cache = nullptr) const {
    if (input.channels() != kInputChannels)
      throw std::invalid_argument("DenoiserModel::forward: expected 23 input channels");
    if (input.height() % 8 != 0 || input.width() % 8 != 0)
      throw std::invalid_argument("DenoiserModel::forward: height/width must be divisible by 8");

    UNetCache<Scalar> scratch;
    UNetCache<Scalar>& c = cache ? *cache : scratch;
    // Inference keeps only what later stages still need.
    const bool keep = cache != nullptr;
    auto drop = [keep](Tensor4<Scalar>& t) {
      if (!keep) t = Tensor4<Scalar>();
    };

    if (keep) c.input = input;
    c.r1_0 = enc1_0_.forward(input);
    relu_inplace(c.r1_0);
    c.r1_1 = enc1_1_.forward(c.r1_0);
    relu_inplace(c.r1_1);
    drop(c.r1_0);
    c.skip1 = enc1_2_.forward(c.r1_1);
    relu_inplace(c.skip1);
    drop(c.r1_1);
    c.p1 = maxpool2_forward(c.skip1, keep ? &c.am1 : nullptr);
    c.r2_1 = enc2_1_.forward(c.p1);
    relu_inplace(c.r2_1);
    drop(c.p1);
    c.skip2 = enc2_2_.forward(c.r2_1);
    relu_inplace(c.skip2);
    drop(c.r2_1);
    c.p2 = maxpool2_forward(c.skip2, keep ? &c.am2 : nullptr);
    c.r3_1 = enc3_1_.forward(c.p2);
    relu_inplace(c.r3_1);
    drop(c.p2);
    c.skip3 = enc3_2_.forward(c.r3_1);
    relu_inplace(c.skip3);
    drop(c.r3_1);
    c.p3 = maxpool2_forward(c.skip3, keep ? &c.am3 : nullptr);
    c.r4_1 = enc4_1_.forward(c.p3);
    relu_inplace(c.r4_1);
    drop(c.p3);
    c.r4_2 = enc4_2_.forward(c.r4_1);
    relu_inplace(c.r4_2);
    drop(c.r4_1);

    c.cat3 = concat_channels(upsample2_forward(c.r4_2), c.skip3);
    drop(c.r4_2);
    drop(c.skip3);
    c.r5_1 = dec3_1_.forward(c.cat3);
    relu_inplace(c.r5_1);
    drop(c.cat3);
    c.r5_2 = dec3_2_.forward(c.r5_1);
    relu_inplace(c.r5_2);
    drop(c.r5_1);

    c.cat2 = concat_channels(upsample2_forward(c.r5_2), c.skip2);
    drop(c.r5_2);
    drop(c.skip2);
    c.r6_1 = dec2_1_.forward(c.cat2);
    relu_inplace(c.r6_1);
    drop(c.cat2);
    c.r6_2 = dec2_2_.forward(c.r6_1);
    relu_inplace(c.r6_2);
    drop(c.r6_1);

    c.cat1 = concat_channels(upsample2_forward(c.r6_2), c.skip1);
    drop(c.r6_2);
    drop(c.skip1);
    c.r7_1 = dec1_1_.forward(c.cat1);
    relu_inplace(c.r7_1);
    drop(c.cat1);
    c.r7_2 = dec1_2_.forward(c.r7_1);
    relu_inplace(c.r7_2);
    drop(c.r7_1);

    Tensor4<Scalar> out = out_.forward(c.r7_2);
    drop(c.r7_2);
    return out;
  }

  /// Accumulates parameter gradients; the cache must come from a forward
  /// pass with the current parameters.
  void backward(const UNetCache<Scalar>& c, const Tensor4<Scalar>& grad_out) {
    const int cc = channels_;
    Tensor4<Scalar> d = out_.backward(c.r7_2, grad_out);

    relu_backward_inplace(d, c.r7_2);
    d = dec1_2_.backward(c.r7_1, d);
    relu_backward_inplace(d, c.r7_1);
    d = dec1_1_.backward(c.cat1, d);
    Tensor4<Scalar> d_up, d_skip1;
    split_channels(d, cc, d_up, d_skip1);
    d = upsample2_backward(d_up);

    relu_backward_inplace(d, c.r6_2);
    d = dec2_2_.backward(c.r6_1, d);
    relu_backward_inplace(d, c.r6_1);
    d = dec2_1_.backward(c.cat2, d);
    Tensor4<Scalar> d_skip2;
    split_channels(d, cc, d_up, d_skip2);
    d = upsample2_backward(d_up);

    relu_backward_inplace(d, c.r5_2);
    d = dec3_2_.backward(c.r5_1, d);
    relu_backward_inplace(d, c.r5_1);
    d = dec3_1_.backward(c.cat3, d);
    Tensor4<Scalar> d_skip3;
    split_channels(d, cc, d_up, d_skip3);
    d = upsample2_backward(d_up);

    relu_backward_inplace(d, c.r4_2);
    d = enc4_2_.backward(c.r4_1, d);
    relu_backward_inplace(d, c.r4_1);
    d = enc4_1_.backward(c.p3, d);
    d = maxpool2_backward(d, c.am3);
    d.array() += d_skip3.array();

    relu_backward_inplace(d, c.skip3);
    d = enc3_2_.backward(c.r3_1, d);
    relu_backward_inplace(d, c.r3_1);
    d = enc3_1_.backward(c.p2, d);
    d = maxpool2_backward(d, c.am2);
    d.array() += d_skip2.array();

    relu_backward_inplace(d, c.skip2);
    d = enc2_2_.backward(c.r2_1, d);
    relu_backward_inplace(d, c.r2_1);
    d = enc2_1_.backward(c.p1, d);
    d = maxpool2_backward(d, c.am1);
    d.array() += d_skip1.array();

    relu_backward_inplace(d, c.skip1);
    d = enc1_2_.backward(c.r1_1, d);
    relu_backward_inplace(d, c.r1_1);
    d = enc1_1_.backward(c.r1_0, d);
    relu_backward_inplace(d, c.r1_0);
    (void)enc1_0_.backward(c.input, d);
  }

  void zero_grad() {
    for (auto& [name, conv] : layers()) conv->zero_grad();
  }

  std::vector<std::pair<const char*, Conv3d<Scalar>*>> layers() {
    return {{"enc1_0", &enc1_0_}, {"enc1_1", &enc1_1_}, {"enc1_2", &enc1_2_},
            {"enc2_1", &enc2_1_}, {"enc2_2", &enc2_2_}, {"enc3_1", &enc3_1_},
            {"enc3_2", &enc3_2_}, {"enc4_1", &enc4_1_}, {"enc4_2", &enc4_2_},
            {"dec3_1", &dec3_1_}, {"dec3_2", &dec3_2_}, {"dec2_1", &dec2_1_},
            {"dec2_2", &dec2_2_}, {"dec1_1", &dec1_1_}, {"dec1_2", &dec1_2_},
            {"out", &out_}};
  }

  std::vector<std::pair<const char*, const Conv3d<Scalar>*>> layers() const {
    auto mutable_layers = const_cast<DenoiserModel*>(this)->layers();
    std::vector<std::pair<const char*, const Conv3d<Scalar>*>> out;
    out.reserve(mutable_layers.size());
    for (auto& [name, conv] : mutable_layers) out.emplace_back(name, conv);
    return out;
  }

  std::vector<ParamRef<Scalar>> parameters() {
    std::vector<ParamRef<Scalar>> refs;
    for (auto& [name, conv] : layers()) {
      refs.push_back({std::string(name) + ".weight", conv->weight().data(),
                      conv->weight_grad().data(), conv->weight().size()});
      refs.push_back({std::string(name) + ".bias", conv->bias().data(), conv->bias_grad().data(),
                      conv->bias().size()});
    }
    return refs;
  }

 private:
  int channels_ = 0;
  Conv3d<Scalar> enc1_0_, enc1_1_, enc1_2_;
  Conv3d<Scalar> enc2_1_, enc2_2_;
  Conv3d<Scalar> enc3_1_, enc3_2_;
  Conv3d<Scalar> enc4_1_, enc4_2_;
  Conv3d<Scalar> dec3_1_, dec3_2_;
  Conv3d<Scalar> dec2_1_, dec2_2_;
  Conv3d<Scalar> dec1_1_, dec1_2_;
  Conv3d<Scalar> out_;
};

/// Builds the conditioning stack [x_t | y | M | time(t)] and runs the UNet.
template <typename Scalar>
Tensor4<Scalar> predict_x0(const DenoiserModel<Scalar>& model, const Tensor4<Scalar>& x_t,
                           const Tensor4<Scalar>& y, const Tensor4<Scalar>& mask, int t,
                           int timesteps, UNetCache<Scalar>* cache = nullptr) {
  require_video_shape(x_t, "predict_x0");
  x_t.require_shape(y, "predict_x0");
  require_mask_shape(mask, x_t, "predict_x0");

  Tensor4<Scalar> input = Tensor4<Scalar>::uninit(x_t.frames(), x_t.height(), x_t.width(),
                                                 DenoiserModel<Scalar>::kInputChannels);
  auto m = input.mat();
  m.topRows(3) = x_t.mat();
  m.middleRows(3, 3) = y.mat();
  m.row(6) = mask.mat().row(0);
  const auto enc = encode_time(t, timesteps);
  for (int k = 0; k < kTimeChannels; ++k)
    m.row(7 + k).setConstant(static_cast<Scalar>(enc[k]));
  return model.forward(input, cache);
}

}  // namespace vinpaint
