#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "vinpaint/commands.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

vinpaint::ExperimentConfig load_config(const std::string& path, const std::string& seed_override) {
  vinpaint::ExperimentConfig cfg = vinpaint::parse_config(path);
  if (!seed_override.empty()) {
    cfg.seed = std::stoull(seed_override);
    cfg.seed_set = true;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Single-video diffusion inpainting: trains a small 3D-convolutional "
               "denoiser on the input video and fills the masked region by interval-wise "
               "reverse diffusion."};
  app.require_subcommand(1);

  std::string config_path, seed_override, resume_path, lengths_arg;
  int n_samples = 1;

  auto* inpaint = app.add_subcommand("inpaint", "train on the video and inpaint the test mask");
  inpaint->add_option("--config", config_path, "experiment config file")->required();
  inpaint->add_option("--seed", seed_override, "override the config seed");
  inpaint->add_option("--resume", resume_path, "checkpoint to continue from");

  auto* ablate = app.add_subcommand("ablate", "compare interval lengths at equal budget");
  ablate->add_option("--config", config_path, "experiment config file")->required();
  ablate->add_option("--lengths", lengths_arg, "comma-separated interval lengths")->required();
  ablate->add_option("--seed", seed_override, "override the config seed");

  auto* sample = app.add_subcommand("sample", "draw n inpaintings from a finished run");
  sample->add_option("--config", config_path, "experiment config file")->required();
  sample->add_option("--n", n_samples, "number of samples")->required();
  sample->add_option("--seed", seed_override, "override the config seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    vinpaint::ExperimentConfig cfg = load_config(config_path, seed_override);
    if (inpaint->parsed()) {
      vinpaint::cmd_inpaint(cfg, resume_path);
    } else if (ablate->parsed()) {
      std::vector<int> lengths;
      std::size_t pos = 0;
      while (pos < lengths_arg.size()) {
        std::size_t next = lengths_arg.find(',', pos);
        if (next == std::string::npos) next = lengths_arg.size();
        lengths.push_back(std::stoi(lengths_arg.substr(pos, next - pos)));
        pos = next + 1;
      }
      vinpaint::cmd_ablate_intervals(cfg, lengths);
    } else if (sample->parsed()) {
      vinpaint::cmd_sample(cfg, n_samples);
    }
  } catch (const vinpaint::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntimeError;
  }
  return 0;
}
