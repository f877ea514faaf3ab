#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace vinpaint {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Arr = Eigen::Array<T, Eigen::Dynamic, 1>;
template <typename T>
using MatMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Mat<T>>;
template <typename T>
using ArrMap = Eigen::Map<Arr<T>>;
template <typename T>
using ConstArrMap = Eigen::Map<const Arr<T>>;

/// Dense frames x height x width x channels block with channel-fastest
/// storage. The flat buffer doubles as a channels x (frames*height*width)
/// column-major matrix over the same memory, so one pixel's channel vector
/// is one matrix column and whole-clip linear algebra needs no copies.
template <typename Scalar>
class Tensor4 {
 public:
  Tensor4() = default;

  Tensor4(int frames, int height, int width, int channels)
      : Tensor4(frames, height, width, channels, Uninit{}) {
    array() = Scalar(0);
  }

  /// Allocation without the zero fill, for outputs that are fully
  /// overwritten. Contents are indeterminate.
  static Tensor4 uninit(int frames, int height, int width, int channels) {
    return Tensor4(frames, height, width, channels, Uninit{});
  }

  static Tensor4 constant(int frames, int height, int width, int channels, Scalar value) {
    Tensor4 t = uninit(frames, height, width, channels);
    t.array() = value;
    return t;
  }

  int frames() const { return frames_; }
  int height() const { return height_; }
  int width() const { return width_; }
  int channels() const { return channels_; }
  long pixels() const { return static_cast<long>(frames_) * height_ * width_; }
  long frame_pixels() const { return static_cast<long>(height_) * width_; }
  long size() const { return pixels() * channels_; }
  bool empty() const { return data_.size() == 0; }

  Scalar* data() { return data_.data(); }
  const Scalar* data() const { return data_.data(); }

  ArrMap<Scalar> array() { return {data_.data(), static_cast<Eigen::Index>(size())}; }
  ConstArrMap<Scalar> array() const { return {data_.data(), static_cast<Eigen::Index>(size())}; }

  /// channels x (frames*height*width) view of the whole clip.
  MatMap<Scalar> mat() { return {data_.data(), channels_, pixels()}; }
  ConstMatMap<Scalar> mat() const { return {data_.data(), channels_, pixels()}; }

  /// channels x (height*width) view of one frame.
  MatMap<Scalar> frame_mat(int frame) {
    return {data_.data() + frame * frame_pixels() * channels_, channels_, frame_pixels()};
  }
  ConstMatMap<Scalar> frame_mat(int frame) const {
    return {data_.data() + frame * frame_pixels() * channels_, channels_, frame_pixels()};
  }

  Scalar& at(int frame, int row, int col, int channel) {
    return data_[static_cast<std::size_t>(((static_cast<long>(frame) * height_ + row) * width_ + col) * channels_ + channel)];
  }
  Scalar at(int frame, int row, int col, int channel) const {
    return data_[static_cast<std::size_t>(((static_cast<long>(frame) * height_ + row) * width_ + col) * channels_ + channel)];
  }

  bool same_shape(const Tensor4& other) const {
    return frames_ == other.frames_ && height_ == other.height_ &&
           width_ == other.width_ && channels_ == other.channels_;
  }

  void require_shape(const Tensor4& other, const char* what) const {
    if (!same_shape(other))
      throw std::invalid_argument(std::string(what) + ": shape mismatch");
  }

  Tensor4 slice_frames(int start, int count) const {
    if (start < 0 || count < 1 || start + count > frames_)
      throw std::out_of_range("Tensor4::slice_frames: range out of bounds");
    Tensor4 out = uninit(count, height_, width_, channels_);
    const long stride = frame_pixels() * channels_;
    std::copy(data_.data() + start * stride, data_.data() + (start + count) * stride,
              out.data_.data());
    return out;
  }

  void setZero() { array() = Scalar(0); }

  template <typename Other>
  Tensor4<Other> cast() const {
    Tensor4<Other> out = Tensor4<Other>::uninit(frames_, height_, width_, channels_);
    out.array() = array().template cast<Other>();
    return out;
  }

 private:
  struct Uninit {};
  Tensor4(int frames, int height, int width, int channels, Uninit)
      : frames_(frames), height_(height), width_(width), channels_(channels) {
    if (frames < 1 || height < 1 || width < 1 || channels < 1)
      throw std::invalid_argument("Tensor4: all dimensions must be >= 1");
    data_.resize(size());  // Eigen leaves the block uninitialized
  }

  int frames_ = 0, height_ = 0, width_ = 0, channels_ = 0;
  Arr<Scalar> data_;
};

using Tensor4f = Tensor4<float>;
using Tensor4d = Tensor4<double>;

/// A video clip: values in [-1, 1], 3 channels.
template <typename Scalar>
using VideoClip = Tensor4<Scalar>;

/// A mask volume: values exactly 0 or 1, single channel, 1 = unknown region.
template <typename Scalar>
using MaskVolume = Tensor4<Scalar>;

template <typename Scalar>
void require_video_shape(const Tensor4<Scalar>& clip, const char* what) {
  if (clip.channels() != 3)
    throw std::invalid_argument(std::string(what) + ": expected a 3-channel clip");
}

template <typename Scalar>
void require_mask_shape(const Tensor4<Scalar>& mask, const Tensor4<Scalar>& clip, const char* what) {
  if (mask.channels() != 1)
    throw std::invalid_argument(std::string(what) + ": expected a 1-channel mask");
  if (mask.frames() != clip.frames() || mask.height() != clip.height() ||
      mask.width() != clip.width())
    throw std::invalid_argument(std::string(what) + ": mask/clip shape mismatch");
}

}  // namespace vinpaint
