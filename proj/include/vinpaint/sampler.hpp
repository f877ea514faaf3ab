#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "vinpaint/diffusion.hpp"
#include "vinpaint/interval_plan.hpp"
#include "vinpaint/masks.hpp"
#include "vinpaint/unet.hpp"

namespace vinpaint {

/// Reverse-process state: the evolving estimate and the next timestep to
/// execute. cursor = T means untouched noise; cursor = 0 means finished.
template <typename Scalar>
struct InferenceState {
  VideoClip<Scalar> x;
  int cursor = 0;
  RandomStream rng{0};
};

template <typename Scalar>
InferenceState<Scalar> init_inference(int frames, int height, int width, int timesteps,
                                      RandomStream rng) {
  InferenceState<Scalar> state;
  state.rng = rng;
  state.cursor = timesteps;
  state.x = VideoClip<Scalar>(frames, height, width, 3);
  fill_normal(state.x, state.rng);
  return state;
}

/// x0 prediction over the whole clip, or over overlapped temporal tiles with
/// a linear cross-fade when a window is set (for videos longer than memory
/// allows in one pass).
template <typename Scalar>
VideoClip<Scalar> predict_x0_windowed(const DenoiserModel<Scalar>& model,
                                      const VideoClip<Scalar>& x_t, const VideoClip<Scalar>& y,
                                      const MaskVolume<Scalar>& mask, int t, int timesteps,
                                      int window, int overlap) {
  const int L = x_t.frames();
  if (window <= 0 || window >= L) return predict_x0(model, x_t, y, mask, t, timesteps);
  if (overlap < 0 || overlap >= window)
    throw std::invalid_argument("predict_x0_windowed: overlap must be in [0, window)");

  VideoClip<Scalar> acc(L, x_t.height(), x_t.width(), 3);
  std::vector<double> wsum(static_cast<std::size_t>(L), 0.0);
  const int stride = window - overlap;

  std::vector<int> starts;
  for (int s = 0;; s += stride) {
    if (s + window >= L) {
      starts.push_back(L - window);
      break;
    }
    starts.push_back(s);
  }

  for (std::size_t k = 0; k < starts.size(); ++k) {
    const int s = starts[k];
    VideoClip<Scalar> tile = predict_x0(model, x_t.slice_frames(s, window),
                                        y.slice_frames(s, window),
                                        mask.slice_frames(s, window), t, timesteps);
    const bool first = k == 0, last = k + 1 == starts.size();
    for (int j = 0; j < window; ++j) {
      double w = 1.0;
      if (!first) w = std::min(w, static_cast<double>(j + 1) / (overlap + 1));
      if (!last) w = std::min(w, static_cast<double>(window - j) / (overlap + 1));
      acc.frame_mat(s + j) += static_cast<Scalar>(w) * tile.frame_mat(j);
      wsum[static_cast<std::size_t>(s + j)] += w;
    }
  }
  for (int l = 0; l < L; ++l) acc.frame_mat(l) /= static_cast<Scalar>(wsum[static_cast<std::size_t>(l)]);
  return acc;
}

/// One reverse step of the conditioned chain; decrements the cursor.
template <typename Scalar>
void advance(InferenceState<Scalar>& state, const DenoiserModel<Scalar>& model,
             const VideoClip<Scalar>& y_test, const MaskVolume<Scalar>& test_mask,
             const DiffusionSchedule& sched, int window = 0, int overlap = 4) {
  if (state.cursor < 1) throw std::logic_error("advance: inference already finished");
  VideoClip<Scalar> x_hat0 = predict_x0_windowed(model, state.x, y_test, test_mask, state.cursor,
                                                 sched.timesteps, window, overlap);
  state.x = reverse_step(state.x, x_hat0, state.cursor, sched, state.rng);
  --state.cursor;
}

/// Composites the generated content into the known video: known pixels are
/// restored bit-exactly, the test region comes from the chain, everything
/// clamped to [-1, 1].
template <typename Scalar>
VideoClip<Scalar> finalize(const InferenceState<Scalar>& state, const VideoClip<Scalar>& original,
                           const MaskVolume<Scalar>& test_mask) {
  if (state.cursor != 0) throw std::logic_error("finalize: inference has not reached t = 0");
  original.require_shape(state.x, "finalize");
  require_mask_shape(test_mask, original, "finalize");

  VideoClip<Scalar> out = original;
  auto om = out.mat();
  const auto gm = state.x.mat();
  const Scalar* mv = test_mask.data();
  const long pixels = out.pixels();
  for (long p = 0; p < pixels; ++p)
    if (mv[p] > Scalar(0.5))
      om.col(p) = gm.col(p).array().max(Scalar(-1)).min(Scalar(1)).matrix();
  return out;
}

/// Replays the reverse process through the stored per-interval model
/// trajectory. interval_models[i] is the model state that performed block i
/// of the plan; sample index 0 with the run's seed reproduces the run's own
/// output.
template <typename Scalar>
std::vector<VideoClip<Scalar>> sample_many(const std::vector<DenoiserModel<Scalar>>& interval_models,
                                           const IntervalPlan& plan, const DiffusionSchedule& sched,
                                           const VideoClip<Scalar>& original,
                                           const MaskVolume<Scalar>& test_mask, int n,
                                           std::uint64_t seed, int window = 0, int overlap = 4) {
  if (n < 1) throw std::invalid_argument("sample_many: need n >= 1");
  if (static_cast<int>(interval_models.size()) != plan.count())
    throw std::invalid_argument("sample_many: one model per interval required");

  const VideoClip<Scalar> y_test = mask_out(original, test_mask);
  std::vector<VideoClip<Scalar>> samples;
  samples.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    auto state = init_inference<Scalar>(original.frames(), original.height(), original.width(),
                                        sched.timesteps,
                                        RandomStream::derived(seed, "inference", static_cast<std::uint64_t>(k)));
    for (int i = plan.count() - 1; i >= 0; --i)
      while (state.cursor >= plan.blocks[static_cast<std::size_t>(i)].lo)
        advance(state, interval_models[static_cast<std::size_t>(i)], y_test, test_mask, sched,
                window, overlap);
    samples.push_back(finalize(state, original, test_mask));
  }
  return samples;
}

template <typename Scalar>
VideoClip<Scalar> mean_clip(const std::vector<VideoClip<Scalar>>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean_clip: no samples");
  VideoClip<Scalar> mean(samples[0].frames(), samples[0].height(), samples[0].width(),
                         samples[0].channels());
  for (const auto& s : samples) {
    samples[0].require_shape(s, "mean_clip");
    mean.array() += s.array();
  }
  mean.array() /= static_cast<Scalar>(samples.size());
  return mean;
}

}  // namespace vinpaint
