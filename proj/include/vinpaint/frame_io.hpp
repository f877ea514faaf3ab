#pragma once

#include <filesystem>
#include <string>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// Loads a directory of numbered PNG frames as a clip in [-1, 1].
/// Byte values map affinely: 0 -> -1, 255 -> +1. Frames are ordered by the
/// integer parsed from each filename stem.
Tensor4f load_frame_sequence(const std::filesystem::path& dir);

/// Loads grayscale mask frames; values >= 0.5 (128/255 and up) become 1.
/// White = occluded.
Tensor4f load_mask_sequence(const std::filesystem::path& dir);

/// Writes one %05d.png per frame, inverse affine map with clamping.
void write_frame_sequence(const Tensor4f& clip, const std::filesystem::path& dir);

/// Writes a binary mask volume as black/white %05d.png frames.
void write_mask_sequence(const Tensor4f& mask, const std::filesystem::path& dir);

}  // namespace vinpaint
