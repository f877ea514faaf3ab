#pragma once

#include <string>
#include <vector>

#include "vinpaint/config.hpp"

namespace vinpaint {

/// End-to-end single-video inpainting run: train/infer interleaved over the
/// interval plan, write the composited frames, metrics (when the mask is
/// synthetic), timing, and checkpoints. resume_path continues a previous run
/// from its last interval boundary.
void cmd_inpaint(const ExperimentConfig& cfg, const std::string& resume_path = "");

/// One full run per interval length at the same total budget; emits a
/// comparison table under <output>/ablation/.
void cmd_ablate_intervals(const ExperimentConfig& cfg, const std::vector<int>& lengths);

/// Replays inference through the retained per-interval checkpoints n times
/// with fresh noise, writes sample_%03d/ directories plus the mean video,
/// and reports diversity and PSNR when ground truth is available.
void cmd_sample(const ExperimentConfig& cfg, int n);

}  // namespace vinpaint
