#pragma once

#include <chrono>
#include <type_traits>
#include <functional>
#include <stdexcept>

#include "vinpaint/adam.hpp"
#include "vinpaint/checkpoint.hpp"
#include "vinpaint/clip_sampling.hpp"
#include "vinpaint/interval_plan.hpp"
#include "vinpaint/masks.hpp"
#include "vinpaint/sampler.hpp"
#include "vinpaint/unet.hpp"

namespace vinpaint {

struct TrainSettings {
  int clip_length = 20;
  double learning_rate = 1e-4;
  StrokeMaskConfig stroke;
  int inference_window = 0;  // 0 = whole video in one pass
  int inference_overlap = 4;
};

struct IntervalStats {
  int block_index = 0;
  int t_lo = 0, t_hi = 0;
  long steps = 0;
  double mean_loss = 0.0;
  double train_seconds = 0.0, infer_seconds = 0.0;
};

/// Optional observers; every hook may be empty.
struct TrainHooks {
  std::function<void(int)> on_train_step;  // receives the drawn timestep
  std::function<void(int)> on_infer_step;  // receives the executed timestep
  std::function<void(const IntervalStats&)> on_interval_done;
};

/// Everything needed to continue a run: the model, optimizer moments, the
/// evolving inference state, the training randomness, and the position in
/// the interval sequence (next_block counts down; -1 = done).
template <typename Scalar>
struct TrainerState {
  DenoiserModel<Scalar> model;
  Adam<Scalar> optimizer;
  InferenceState<Scalar> inference;
  RandomStream train_rng{0};
  int next_block = -1;
  long steps_done = 0;
};

template <typename Scalar>
TrainerState<Scalar> init_trainer(int frames, int height, int width, int model_channels,
                                  const IntervalPlan& plan, const TrainSettings& settings,
                                  std::uint64_t seed) {
  TrainerState<Scalar> state;
  RandomStream model_rng = RandomStream::derived(seed, "model");
  state.model = DenoiserModel<Scalar>(model_channels, model_rng);
  state.optimizer = Adam<Scalar>(settings.learning_rate);
  state.train_rng = RandomStream::derived(seed, "train");
  state.inference = init_inference<Scalar>(frames, height, width, plan.timesteps,
                                           RandomStream::derived(seed, "inference", 0));
  state.next_block = plan.count() - 1;
  return state;
}

/// Runs one interval's training budget: every iteration draws a clip, a
/// stroke mask, noise, and a timestep uniform over the block (both ends
/// inclusive), then takes one Adam step on the masked x0 loss.
template <typename Scalar>
IntervalStats train_interval(TrainerState<Scalar>& state, const IntervalPlan& plan, int block_index,
                             const VideoClip<Scalar>& video, const MaskVolume<Scalar>& test_mask,
                             const DiffusionSchedule& sched, const TrainSettings& settings,
                             const TrainHooks& hooks = {}) {
  if (block_index < 0 || block_index >= plan.count())
    throw std::out_of_range("train_interval: bad block index");
  const IntervalBlock& block = plan.blocks[static_cast<std::size_t>(block_index)];
  const int L = video.frames();
  const int clip_len = std::min(settings.clip_length, L);

  IntervalStats stats;
  stats.block_index = block_index;
  stats.t_lo = block.lo;
  stats.t_hi = block.hi;
  stats.steps = block.iters;

  const auto t0 = std::chrono::steady_clock::now();
  double loss_sum = 0.0;
  UNetCache<Scalar> cache;
  auto params = state.model.parameters();
  for (long j = 0; j < block.iters; ++j) {
    const int start = sample_clip_start(L, clip_len, state.train_rng);
    VideoClip<Scalar> x0 = video.slice_frames(start, clip_len);
    MaskVolume<Scalar> test_clip = test_mask.slice_frames(start, clip_len);
    MaskVolume<Scalar> train_mask = generate_stroke_mask<Scalar>(
        clip_len, video.height(), video.width(), settings.stroke, state.train_rng);
    Tensor4<Scalar> eps(clip_len, video.height(), video.width(), 3);
    fill_normal(eps, state.train_rng);
    const int t = static_cast<int>(state.train_rng.uniform_int(block.lo, block.hi));

    ConditioningBundle<Scalar> bundle = build_conditioning(x0, test_clip, train_mask, t, eps, sched);
    Tensor4<Scalar> pred =
        predict_x0(state.model, bundle.x_tilde, bundle.y, bundle.mask, t, sched.timesteps, &cache);
    VideoClip<Scalar> grad;
    loss_sum += masked_loss(x0, pred, bundle.loss_mask, &grad);
    state.model.zero_grad();
    state.model.backward(cache, grad);
    state.optimizer.step(params);
    ++state.steps_done;
    if (hooks.on_train_step) hooks.on_train_step(t);
  }
  stats.mean_loss = block.iters > 0 ? loss_sum / static_cast<double>(block.iters) : 0.0;
  stats.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return stats;
}

/// The full interleaved loop: for each interval from noisiest to cleanest,
/// train for the interval's budget, then advance the reverse process through
/// exactly that interval's timesteps. checkpoint_sink (if set) is called at
/// every interval boundary with the state and the just-finished block index;
/// a run restored from such a checkpoint continues bit-exactly.
template <typename Scalar>
VideoClip<Scalar> run_interval_training(
    const VideoClip<Scalar>& video, const MaskVolume<Scalar>& test_mask, const IntervalPlan& plan,
    const DiffusionSchedule& sched, const TrainSettings& settings, TrainerState<Scalar>& state,
    const TrainHooks& hooks = {},
    const std::type_identity_t<std::function<void(const TrainerState<Scalar>&, int)>>&
        checkpoint_sink = {}) {
  require_video_shape(video, "run_interval_training");
  require_mask_shape(test_mask, video, "run_interval_training");
  if (video.height() % 8 != 0 || video.width() % 8 != 0)
    throw std::invalid_argument("run_interval_training: dimensions must be divisible by 8");
  if (settings.clip_length > video.frames())
    throw std::invalid_argument("run_interval_training: clip length exceeds video length");

  const VideoClip<Scalar> y_test = mask_out(video, test_mask);
  for (int i = state.next_block; i >= 0; --i) {
    IntervalStats stats =
        train_interval(state, plan, i, video, test_mask, sched, settings, hooks);

    const auto t0 = std::chrono::steady_clock::now();
    const IntervalBlock& block = plan.blocks[static_cast<std::size_t>(i)];
    while (state.inference.cursor >= block.lo) {
      const int t = state.inference.cursor;
      advance(state.inference, state.model, y_test, test_mask, sched, settings.inference_window,
              settings.inference_overlap);
      if (hooks.on_infer_step) hooks.on_infer_step(t);
    }
    stats.infer_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    state.next_block = i - 1;
    if (hooks.on_interval_done) hooks.on_interval_done(stats);
    if (checkpoint_sink) checkpoint_sink(state, i);
  }
  return finalize(state.inference, video, test_mask);
}

// --- checkpoint glue (runtime scalar type) ---------------------------------

inline Checkpoint to_checkpoint(const TrainerState<float>& state, const DiffusionSchedule& sched,
                                int model_channels) {
  Checkpoint ck;
  ck.set_meta("schedule.timesteps", std::to_string(sched.timesteps));
  ck.set_meta("schedule.beta_start", std::to_string(sched.beta_start));
  ck.set_meta("schedule.beta_end", std::to_string(sched.beta_end));
  ck.set_meta("model.channels", std::to_string(model_channels));
  ck.set_meta("trainer.next_block", std::to_string(state.next_block));
  ck.set_meta("trainer.steps_done", std::to_string(state.steps_done));
  ck.set_meta("trainer.train_rng", state.train_rng.serialize());
  ck.set_meta("inference.cursor", std::to_string(state.inference.cursor));
  ck.set_meta("inference.rng", state.inference.rng.serialize());
  ck.set_meta("optimizer.steps", std::to_string(state.optimizer.step_count()));
  ck.set_meta("optimizer.learning_rate", std::to_string(state.optimizer.learning_rate()));

  auto& model = const_cast<TrainerState<float>&>(state).model;
  for (auto& [name, conv] : model.layers()) {
    ck.put_f32(std::string(name) + ".weight", conv->weight().data(),
               {conv->weight().rows(), conv->weight().cols()});
    ck.put_f32(std::string(name) + ".bias", conv->bias().data(), {conv->bias().size()});
  }
  const auto& m = state.optimizer.first_moments();
  const auto& v = state.optimizer.second_moments();
  auto params = model.parameters();
  for (std::size_t i = 0; i < m.size(); ++i) {
    ck.put_f32("adam.m." + params[i].name, m[i].data(), {m[i].size()});
    ck.put_f32("adam.v." + params[i].name, v[i].data(), {v[i].size()});
  }
  const auto& x = state.inference.x;
  ck.put_f32("inference.x", x.data(), {x.frames(), x.height(), x.width(), x.channels()});
  return ck;
}

inline TrainerState<float> from_checkpoint(const Checkpoint& ck) {
  TrainerState<float> state;
  const int channels = static_cast<int>(ck.meta_long("model.channels"));
  RandomStream dummy(0);
  state.model = DenoiserModel<float>(channels, dummy);
  for (auto& [name, conv] : state.model.layers()) {
    ck.get_f32(std::string(name) + ".weight", conv->weight().data(), conv->weight().size());
    ck.get_f32(std::string(name) + ".bias", conv->bias().data(), conv->bias().size());
  }

  state.optimizer = Adam<float>(ck.meta_double("optimizer.learning_rate"));
  auto params = state.model.parameters();
  std::vector<Arr<float>> m(params.size()), v(params.size());
  const std::string first_m = "adam.m." + params[0].name;
  if (ck.has_array(first_m)) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i].setZero(params[i].size);
      v[i].setZero(params[i].size);
      ck.get_f32("adam.m." + params[i].name, m[i].data(), m[i].size());
      ck.get_f32("adam.v." + params[i].name, v[i].data(), v[i].size());
    }
    state.optimizer.restore(std::move(m), std::move(v), ck.meta_long("optimizer.steps"));
  }

  state.train_rng = RandomStream::deserialize(ck.meta("trainer.train_rng"));
  state.next_block = static_cast<int>(ck.meta_long("trainer.next_block"));
  state.steps_done = ck.meta_long("trainer.steps_done");

  const auto& xa = ck.array("inference.x");
  state.inference.x = VideoClip<float>(static_cast<int>(xa.dims[0]), static_cast<int>(xa.dims[1]),
                                       static_cast<int>(xa.dims[2]), static_cast<int>(xa.dims[3]));
  ck.get_f32("inference.x", state.inference.x.data(), state.inference.x.size());
  state.inference.cursor = static_cast<int>(ck.meta_long("inference.cursor"));
  state.inference.rng = RandomStream::deserialize(ck.meta("inference.rng"));
  return state;
}

}  // namespace vinpaint
