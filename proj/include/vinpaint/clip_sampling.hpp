#pragma once

#include <stdexcept>

#include "vinpaint/random.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// Start index of a training clip: uniform over [0, frames - clip_len].
inline int sample_clip_start(int frames, int clip_len, RandomStream& rng) {
  if (clip_len < 1 || clip_len > frames)
    throw std::invalid_argument("sample_clip_start: clip length must be in [1, frames]");
  if (clip_len == frames) return 0;
  return static_cast<int>(rng.uniform_int(0, frames - clip_len));
}

/// clip_len consecutive frames starting at a uniformly drawn index; no frame
/// dropping or reordering.
template <typename Scalar>
Tensor4<Scalar> sample_training_clip(const Tensor4<Scalar>& video, int clip_len, RandomStream& rng,
                                     int* start_out = nullptr) {
  const int start = sample_clip_start(video.frames(), clip_len, rng);
  if (start_out) *start_out = start;
  return video.slice_frames(start, clip_len);
}

}  // namespace vinpaint
