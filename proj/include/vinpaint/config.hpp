#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "vinpaint/masks.hpp"

namespace vinpaint {

/// Raised for invalid configuration or command-line usage (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One experiment, fully determined. Defaults are the full-scale texture
/// settings; presets in configs/ override them.
struct ExperimentConfig {
  // [paths]
  std::string video_dir;
  std::string mask_dir;
  std::string output_dir;

  // [schedule]
  int timesteps = 1000;
  double beta_start = 1e-4;
  double beta_end = 0.02;

  // [plan]
  int interval_length = 50;
  long total_iters = 40000;

  // [model]
  int channels = 32;

  // [masks]
  StrokeMaskConfig stroke;

  // [train]
  int clip_length = 20;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  bool seed_set = false;  // a seed is mandatory; no implicit nondeterminism
  int checkpoint_every = 1;
  bool save_interval_checkpoints = false;
  int inference_window = 0;
  int inference_overlap = 4;

  // [metrics]
  bool metric_psnr = true;
  bool metric_ssim = true;
  bool synthetic_mask = true;  // the input video doubles as ground truth
  std::vector<std::string> plugins;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& cfg);

/// Checks paths, ranges, and the mandatory seed. Throws config_error.
void validate_config(const ExperimentConfig& cfg);

}  // namespace vinpaint
