#pragma once

#include <utility>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

inline constexpr int kWorkingWidth = 432;
inline constexpr int kWorkingHeight = 240;

/// Bilinear resampling (half-pixel centers) of every frame.
Tensor4f resize_bilinear(const Tensor4f& clip, int out_height, int out_width);

/// Nearest-neighbor resampling; keeps masks exactly binary.
Tensor4f resize_nearest(const Tensor4f& clip, int out_height, int out_width);

/// Mirror-pads height/width up to the next multiple of `multiple`.
Tensor4f reflect_pad_to_multiple(const Tensor4f& clip, int multiple);

/// Crops back to the top-left original window (inverse of padding).
Tensor4f crop(const Tensor4f& clip, int out_height, int out_width);

/// Inputs larger than the 432x240 working resolution are downscaled to it
/// (video bilinear, mask nearest + re-binarize); smaller inputs pass through.
/// Both outputs are then mirror-padded so height and width divide by 8.
/// pre_pad_* report the dimensions before padding so results can be cropped
/// back.
struct WorkingResolution {
  Tensor4f video;
  Tensor4f mask;
  int pre_pad_height = 0;
  int pre_pad_width = 0;
};

WorkingResolution resize_to_working_resolution(const Tensor4f& video, const Tensor4f& mask);

}  // namespace vinpaint
