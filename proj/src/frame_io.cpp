#include "vinpaint/frame_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace vinpaint {

namespace {

struct ImageU8 {
  int width = 0, height = 0, channels = 0;
  std::vector<unsigned char> pixels;  // row-major, interleaved
};

ImageU8 read_png(const std::filesystem::path& path, int want_channels) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw std::runtime_error("cannot read PNG '" + path.string() + "': " + image.message);
  image.format = want_channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;

  ImageU8 out;
  out.width = static_cast<int>(image.width);
  out.height = static_cast<int>(image.height);
  out.channels = want_channels;
  out.pixels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, out.pixels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw std::runtime_error("cannot decode PNG '" + path.string() + "': " + image.message);
  }
  return out;
}

void write_png(const std::filesystem::path& path, const ImageU8& img) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = img.channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, img.pixels.data(), 0, nullptr))
    throw std::runtime_error("cannot write PNG '" + path.string() + "': " + image.message);
}

/// Numbered frame files, ordered by the integer in the filename stem.
std::vector<std::filesystem::path> list_frames(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw std::runtime_error("frame directory '" + dir.string() + "' does not exist");
  std::vector<std::pair<long, std::filesystem::path>> numbered;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".png") continue;
    const std::string stem = entry.path().stem().string();
    std::string digits;
    for (char c : stem)
      if (std::isdigit(static_cast<unsigned char>(c))) digits += c;
    if (digits.empty())
      throw std::runtime_error("frame file '" + entry.path().string() + "' has no frame number");
    numbered.emplace_back(std::stol(digits), entry.path());
  }
  if (numbered.empty())
    throw std::runtime_error("no PNG frames found in '" + dir.string() + "'");
  std::sort(numbered.begin(), numbered.end());
  std::vector<std::filesystem::path> paths;
  paths.reserve(numbered.size());
  for (auto& [n, p] : numbered) paths.push_back(std::move(p));
  return paths;
}

/// byte -> [-1, 1], exact at both endpoints
const float* byte_to_unit_lut() {
  static const auto lut = [] {
    std::array<float, 256> t{};
    for (int b = 0; b < 256; ++b)
      t[static_cast<std::size_t>(b)] = static_cast<float>((b - 127.5) / 127.5);
    return t;
  }();
  return lut.data();
}

Tensor4f load_sequence(const std::filesystem::path& dir, int channels) {
  const auto paths = list_frames(dir);
  const float* lut = byte_to_unit_lut();
  Tensor4f clip;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const ImageU8 img = read_png(paths[i], channels);
    if (i == 0) {
      clip = Tensor4f(static_cast<int>(paths.size()), img.height, img.width, channels);
    } else if (img.width != clip.width() || img.height != clip.height()) {
      throw std::runtime_error("frame '" + paths[i].string() + "' has inconsistent resolution");
    }
    float* dst = clip.data() + static_cast<long>(i) * clip.frame_pixels() * channels;
    const long n = clip.frame_pixels() * channels;
    for (long j = 0; j < n; ++j) dst[j] = lut[img.pixels[static_cast<std::size_t>(j)]];
  }
  return clip;
}

unsigned char to_byte(float v) {
  const float scaled = (v + 1.0f) * 127.5f;
  return static_cast<unsigned char>(std::clamp(std::lround(scaled), 0L, 255L));
}

}  // namespace

Tensor4f load_frame_sequence(const std::filesystem::path& dir) { return load_sequence(dir, 3); }

Tensor4f load_mask_sequence(const std::filesystem::path& dir) {
  Tensor4f gray = load_sequence(dir, 1);
  // threshold at 0.5 on the [0, 1] scale, i.e. 0 on the internal [-1, 1] scale
  Tensor4f mask(gray.frames(), gray.height(), gray.width(), 1);
  mask.array() = (gray.array() >= 0.0f).select(Arr<float>::Ones(gray.size()), 0.0f);
  return mask;
}

void write_frame_sequence(const Tensor4f& clip, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  ImageU8 img;
  img.width = clip.width();
  img.height = clip.height();
  img.channels = clip.channels();
  img.pixels.resize(static_cast<std::size_t>(clip.frame_pixels()) * clip.channels());
  char name[16];
  for (int l = 0; l < clip.frames(); ++l) {
    const float* src = clip.data() + static_cast<long>(l) * clip.frame_pixels() * clip.channels();
    for (std::size_t j = 0; j < img.pixels.size(); ++j) img.pixels[j] = to_byte(src[j]);
    std::snprintf(name, sizeof(name), "%05d.png", l);
    write_png(dir / name, img);
  }
}

void write_mask_sequence(const Tensor4f& mask, const std::filesystem::path& dir) {
  if (mask.channels() != 1) throw std::invalid_argument("write_mask_sequence: expected 1 channel");
  std::filesystem::create_directories(dir);
  ImageU8 img;
  img.width = mask.width();
  img.height = mask.height();
  img.channels = 1;
  img.pixels.resize(static_cast<std::size_t>(mask.frame_pixels()));
  char name[16];
  for (int l = 0; l < mask.frames(); ++l) {
    const float* src = mask.data() + static_cast<long>(l) * mask.frame_pixels();
    for (std::size_t j = 0; j < img.pixels.size(); ++j)
      img.pixels[j] = src[j] > 0.5f ? 255 : 0;
    std::snprintf(name, sizeof(name), "%05d.png", l);
    write_png(dir / name, img);
  }
}

}  // namespace vinpaint
