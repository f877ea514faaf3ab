#include "vinpaint/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>

#include "vinpaint/frame_io.hpp"
#include "vinpaint/metrics.hpp"
#include "vinpaint/resize.hpp"
#include "vinpaint/trainer.hpp"

namespace vinpaint {

namespace {

namespace fs = std::filesystem;

struct LoadedInput {
  Tensor4f video;  // working resolution, padded
  Tensor4f mask;
  int out_height = 0, out_width = 0;  // pre-padding size for final cropping
};

LoadedInput load_input(const ExperimentConfig& cfg) {
  Tensor4f video = load_frame_sequence(cfg.video_dir);
  Tensor4f mask = load_mask_sequence(cfg.mask_dir);
  if (mask.frames() != video.frames() || mask.height() != video.height() ||
      mask.width() != video.width())
    throw std::runtime_error("mask sequence shape does not match the video");
  WorkingResolution wr = resize_to_working_resolution(video, mask);
  return {std::move(wr.video), std::move(wr.mask), wr.pre_pad_height, wr.pre_pad_width};
}

TrainSettings settings_from(const ExperimentConfig& cfg) {
  TrainSettings s;
  s.clip_length = cfg.clip_length;
  s.learning_rate = cfg.learning_rate;
  s.stroke = cfg.stroke;
  s.inference_window = cfg.inference_window;
  s.inference_overlap = cfg.inference_overlap;
  return s;
}

fs::path interval_checkpoint_path(const fs::path& out_dir, int block_index) {
  char name[32];
  std::snprintf(name, sizeof(name), "interval_%03d.ckpt", block_index);
  return out_dir / "checkpoints" / name;
}

MetricRow evaluate_result(const std::string& name, const Tensor4f& result,
                          const Tensor4f& ground_truth, const Tensor4f& region,
                          const ExperimentConfig& cfg) {
  MetricRow row;
  row.name = name;
  if (cfg.metric_psnr) {
    row.psnr_db = psnr(ground_truth, result);
    row.psnr_identical = (ground_truth.array() == result.array()).all();
    row.masked_psnr_db = psnr(ground_truth, result, &region);
  }
  if (cfg.metric_ssim) row.ssim_value = ssim(ground_truth, result);
  for (const auto& p : cfg.plugins) row.plugin_values[p] = perceptual(p, ground_truth, result);
  return row;
}

void write_report(const MetricReport& report, const fs::path& dir, const std::string& stem) {
  std::ofstream csv(dir / (stem + ".csv"));
  csv << report.to_csv();
  std::ofstream txt(dir / (stem + ".txt"));
  txt << report.to_text();
  std::printf("%s", report.to_text().c_str());
}

struct RunOutcome {
  Tensor4f result;          // cropped to output size
  Tensor4f ground_truth;    // cropped working-resolution input
  Tensor4f region;          // cropped test mask
  double train_seconds = 0.0;
  double infer_seconds = 0.0;
  double total_seconds = 0.0;
};

/// The shared inpainting job: everything cmd_inpaint does short of the
/// metric report, so the ablation driver can reuse it.
RunOutcome run_job(const ExperimentConfig& cfg, const std::string& resume_path) {
  const auto wall0 = std::chrono::steady_clock::now();
  LoadedInput in = load_input(cfg);

  const DiffusionSchedule sched = make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end);
  const IntervalPlan plan =
      make_interval_plan(cfg.timesteps, cfg.interval_length, cfg.total_iters);
  const TrainSettings settings = settings_from(cfg);

  const fs::path out_dir(cfg.output_dir);
  fs::create_directories(out_dir);
  if (cfg.save_interval_checkpoints) fs::create_directories(out_dir / "checkpoints");
  {
    std::ofstream echo(out_dir / "config.cfg");
    echo << serialize_config(cfg);
  }

  TrainerState<float> state;
  if (!resume_path.empty()) {
    state = from_checkpoint(Checkpoint::load(resume_path));
    std::printf("resumed from %s (next interval %d, cursor t=%d)\n", resume_path.c_str(),
                state.next_block, state.inference.cursor);
  } else {
    state = init_trainer<float>(in.video.frames(), in.video.height(), in.video.width(),
                                cfg.channels, plan, settings, cfg.seed);
  }

  double train_total = 0.0, infer_total = 0.0;
  TrainHooks hooks;
  hooks.on_interval_done = [&](const IntervalStats& st) {
    train_total += st.train_seconds;
    infer_total += st.infer_seconds;
    std::printf("[interval %2d/%d] t=%d..%d  steps=%ld  mean_loss=%.6g  train=%.1fs  infer=%.1fs\n",
                plan.count() - st.block_index, plan.count(), st.t_lo, st.t_hi, st.steps,
                st.mean_loss, st.train_seconds, st.infer_seconds);
    std::fflush(stdout);
  };
  auto sink = [&](const TrainerState<float>& st, int finished_block) {
    const int done = plan.count() - finished_block;
    if (done % cfg.checkpoint_every == 0 || finished_block == 0)
      to_checkpoint(st, sched, cfg.channels).save(out_dir / "checkpoint_latest.ckpt");
    if (cfg.save_interval_checkpoints)
      to_checkpoint(st, sched, cfg.channels).save(interval_checkpoint_path(out_dir, finished_block));
  };

  Tensor4f result =
      run_interval_training(in.video, in.mask, plan, sched, settings, state, hooks, sink);

  RunOutcome outcome;
  outcome.result = crop(result, in.out_height, in.out_width);
  outcome.ground_truth = crop(in.video, in.out_height, in.out_width);
  outcome.region = crop(in.mask, in.out_height, in.out_width);
  write_frame_sequence(outcome.result, out_dir / "frames");

  outcome.train_seconds = train_total;
  outcome.infer_seconds = infer_total;
  outcome.total_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  std::printf("done: total %.1fs (train %.1fs, inference %.1fs, %.3f s/frame inference)\n",
              outcome.total_seconds, train_total, infer_total,
              infer_total / outcome.result.frames());
  return outcome;
}

}  // namespace

void cmd_inpaint(const ExperimentConfig& cfg, const std::string& resume_path) {
  validate_config(cfg);
  RunOutcome outcome = run_job(cfg, resume_path);
  if (cfg.synthetic_mask) {
    MetricReport report;
    report.rows.push_back(
        evaluate_result("result", outcome.result, outcome.ground_truth, outcome.region, cfg));
    write_report(report, cfg.output_dir, "report");
  }
}

void cmd_ablate_intervals(const ExperimentConfig& cfg, const std::vector<int>& lengths) {
  validate_config(cfg);
  if (lengths.empty()) throw config_error("ablate: no interval lengths given");
  for (int l : lengths)
    if (l < 1 || l > cfg.timesteps)
      throw config_error("ablate: interval length " + std::to_string(l) + " outside [1, timesteps]");

  const fs::path base = fs::path(cfg.output_dir) / "ablation";
  MetricReport report;
  for (int length : lengths) {
    ExperimentConfig run_cfg = cfg;
    run_cfg.interval_length = length;
    char sub[32];
    std::snprintf(sub, sizeof(sub), "length_%04d", length);
    run_cfg.output_dir = (base / sub).string();
    std::printf("=== interval length %d (budget %ld) ===\n", length, cfg.total_iters);
    RunOutcome outcome = run_job(run_cfg, "");
    MetricRow row = evaluate_result(sub, outcome.result, outcome.ground_truth, outcome.region,
                                    run_cfg);
    report.rows.push_back(std::move(row));
  }
  write_report(report, base, "report");

  const auto best = std::max_element(report.rows.begin(), report.rows.end(),
                                     [](const MetricRow& a, const MetricRow& b) {
                                       return a.masked_psnr_db.value_or(0) < b.masked_psnr_db.value_or(0);
                                     });
  if (best != report.rows.end() && best->masked_psnr_db)
    std::printf("best masked PSNR: %s (%.2f dB)\n", best->name.c_str(), *best->masked_psnr_db);
}

void cmd_sample(const ExperimentConfig& cfg, int n) {
  validate_config(cfg);
  if (n < 1) throw config_error("sample: n must be >= 1");

  LoadedInput in = load_input(cfg);
  const DiffusionSchedule sched = make_schedule(cfg.timesteps, cfg.beta_start, cfg.beta_end);
  const IntervalPlan plan =
      make_interval_plan(cfg.timesteps, cfg.interval_length, cfg.total_iters);
  const fs::path out_dir(cfg.output_dir);

  std::vector<DenoiserModel<float>> models;
  models.reserve(static_cast<std::size_t>(plan.count()));
  for (int i = 0; i < plan.count(); ++i) {
    const fs::path ckpt = interval_checkpoint_path(out_dir, i);
    if (!fs::exists(ckpt))
      throw std::runtime_error("sample: missing per-interval checkpoint '" + ckpt.string() +
                               "' (run inpaint with save_interval_checkpoints = true)");
    models.push_back(from_checkpoint(Checkpoint::load(ckpt)).model);
  }

  std::vector<Tensor4f> samples =
      sample_many(models, plan, sched, in.video, in.mask, n, cfg.seed, cfg.inference_window,
                  cfg.inference_overlap);

  const fs::path samples_dir = out_dir / "samples";
  MetricReport report;
  std::vector<Tensor4f> cropped;
  cropped.reserve(samples.size());
  for (int k = 0; k < n; ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "sample_%03d", k);
    Tensor4f s = crop(samples[static_cast<std::size_t>(k)], in.out_height, in.out_width);
    write_frame_sequence(s, samples_dir / name);
    cropped.push_back(std::move(s));
  }
  const Tensor4f gt = crop(in.video, in.out_height, in.out_width);
  const Tensor4f region = crop(in.mask, in.out_height, in.out_width);
  if (cfg.synthetic_mask)
    for (int k = 0; k < n; ++k) {
      char name[32];
      std::snprintf(name, sizeof(name), "sample_%03d", k);
      report.rows.push_back(evaluate_result(name, cropped[static_cast<std::size_t>(k)], gt, region, cfg));
    }

  const Tensor4f mean = mean_clip(cropped);
  write_frame_sequence(mean, samples_dir / "mean");
  if (cfg.synthetic_mask) {
    MetricRow mean_row = evaluate_result("mean", mean, gt, region, cfg);
    if (n >= 2) mean_row.diversity_value = diversity(cropped, region, gt);
    report.rows.push_back(std::move(mean_row));
  }
  if (!report.rows.empty()) write_report(report, samples_dir, "report");
  std::printf("wrote %d samples and their mean under %s\n", n, samples_dir.string().c_str());
}

}  // namespace vinpaint
