#include "vinpaint/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace vinpaint {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw config_error("config: key '" + key + "' expects a boolean, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> items;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += items[i];
  }
  return out;
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"paths.video", [&](const std::string&, const std::string& v) { cfg.video_dir = v; }},
      {"paths.mask", [&](const std::string&, const std::string& v) { cfg.mask_dir = v; }},
      {"paths.output", [&](const std::string&, const std::string& v) { cfg.output_dir = v; }},
      {"schedule.timesteps", [&](const std::string& k, const std::string& v) { cfg.timesteps = std::stoi(v); }},
      {"schedule.beta_start", [&](const std::string& k, const std::string& v) { cfg.beta_start = std::stod(v); }},
      {"schedule.beta_end", [&](const std::string& k, const std::string& v) { cfg.beta_end = std::stod(v); }},
      {"plan.interval_length", [&](const std::string& k, const std::string& v) { cfg.interval_length = std::stoi(v); }},
      {"plan.total_iters", [&](const std::string& k, const std::string& v) { cfg.total_iters = std::stol(v); }},
      {"model.channels", [&](const std::string& k, const std::string& v) { cfg.channels = std::stoi(v); }},
      {"masks.strokes_min", [&](const std::string& k, const std::string& v) { cfg.stroke.strokes_min = std::stoi(v); }},
      {"masks.strokes_max", [&](const std::string& k, const std::string& v) { cfg.stroke.strokes_max = std::stoi(v); }},
      {"masks.brush_min", [&](const std::string& k, const std::string& v) { cfg.stroke.brush_min = std::stod(v); }},
      {"masks.brush_max", [&](const std::string& k, const std::string& v) { cfg.stroke.brush_max = std::stod(v); }},
      {"masks.steps_min", [&](const std::string& k, const std::string& v) { cfg.stroke.steps_min = std::stoi(v); }},
      {"masks.steps_max", [&](const std::string& k, const std::string& v) { cfg.stroke.steps_max = std::stoi(v); }},
      {"masks.drift_min", [&](const std::string& k, const std::string& v) { cfg.stroke.drift_min = std::stod(v); }},
      {"masks.drift_max", [&](const std::string& k, const std::string& v) { cfg.stroke.drift_max = std::stod(v); }},
      {"train.clip_length", [&](const std::string& k, const std::string& v) { cfg.clip_length = std::stoi(v); }},
      {"train.learning_rate", [&](const std::string& k, const std::string& v) { cfg.learning_rate = std::stod(v); }},
      {"train.seed",
       [&](const std::string& k, const std::string& v) {
         cfg.seed = std::stoull(v);
         cfg.seed_set = true;
       }},
      {"train.checkpoint_every", [&](const std::string& k, const std::string& v) { cfg.checkpoint_every = std::stoi(v); }},
      {"train.save_interval_checkpoints",
       [&](const std::string& k, const std::string& v) { cfg.save_interval_checkpoints = parse_bool(v, k); }},
      {"train.inference_window", [&](const std::string& k, const std::string& v) { cfg.inference_window = std::stoi(v); }},
      {"train.inference_overlap", [&](const std::string& k, const std::string& v) { cfg.inference_overlap = std::stoi(v); }},
      {"metrics.psnr", [&](const std::string& k, const std::string& v) { cfg.metric_psnr = parse_bool(v, k); }},
      {"metrics.ssim", [&](const std::string& k, const std::string& v) { cfg.metric_ssim = parse_bool(v, k); }},
      {"metrics.synthetic_mask", [&](const std::string& k, const std::string& v) { cfg.synthetic_mask = parse_bool(v, k); }},
      {"metrics.plugins", [&](const std::string& k, const std::string& v) { cfg.plugins = parse_list(v); }},
  };

  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw config_error("config line " + std::to_string(lineno) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = section + "." + trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw config_error("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const config_error&) {
      throw;
    } catch (const std::exception&) {
      throw config_error("config line " + std::to_string(lineno) + ": bad value for '" + key + "'");
    }
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw config_error("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "[paths]\n";
  os << "video = " << cfg.video_dir << "\n";
  os << "mask = " << cfg.mask_dir << "\n";
  os << "output = " << cfg.output_dir << "\n";
  os << "\n[schedule]\n";
  os << "timesteps = " << cfg.timesteps << "\n";
  os << "beta_start = " << fmt_double(cfg.beta_start) << "\n";
  os << "beta_end = " << fmt_double(cfg.beta_end) << "\n";
  os << "\n[plan]\n";
  os << "interval_length = " << cfg.interval_length << "\n";
  os << "total_iters = " << cfg.total_iters << "\n";
  os << "\n[model]\n";
  os << "channels = " << cfg.channels << "\n";
  os << "\n[masks]\n";
  os << "strokes_min = " << cfg.stroke.strokes_min << "\n";
  os << "strokes_max = " << cfg.stroke.strokes_max << "\n";
  os << "brush_min = " << fmt_double(cfg.stroke.brush_min) << "\n";
  os << "brush_max = " << fmt_double(cfg.stroke.brush_max) << "\n";
  os << "steps_min = " << cfg.stroke.steps_min << "\n";
  os << "steps_max = " << cfg.stroke.steps_max << "\n";
  os << "drift_min = " << fmt_double(cfg.stroke.drift_min) << "\n";
  os << "drift_max = " << fmt_double(cfg.stroke.drift_max) << "\n";
  os << "\n[train]\n";
  os << "clip_length = " << cfg.clip_length << "\n";
  os << "learning_rate = " << fmt_double(cfg.learning_rate) << "\n";
  if (cfg.seed_set) os << "seed = " << cfg.seed << "\n";
  os << "checkpoint_every = " << cfg.checkpoint_every << "\n";
  os << "save_interval_checkpoints = " << (cfg.save_interval_checkpoints ? "true" : "false") << "\n";
  os << "inference_window = " << cfg.inference_window << "\n";
  os << "inference_overlap = " << cfg.inference_overlap << "\n";
  os << "\n[metrics]\n";
  os << "psnr = " << (cfg.metric_psnr ? "true" : "false") << "\n";
  os << "ssim = " << (cfg.metric_ssim ? "true" : "false") << "\n";
  os << "synthetic_mask = " << (cfg.synthetic_mask ? "true" : "false") << "\n";
  if (!cfg.plugins.empty()) os << "plugins = " << join(cfg.plugins) << "\n";
  return os.str();
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.video_dir.empty()) throw config_error("config: paths.video is required");
  if (cfg.mask_dir.empty()) throw config_error("config: paths.mask is required");
  if (cfg.output_dir.empty()) throw config_error("config: paths.output is required");
  if (!std::filesystem::is_directory(cfg.video_dir))
    throw config_error("config: video directory '" + cfg.video_dir + "' does not exist");
  if (!std::filesystem::is_directory(cfg.mask_dir))
    throw config_error("config: mask directory '" + cfg.mask_dir + "' does not exist");
  if (!cfg.seed_set) throw config_error("config: train.seed is mandatory");
  if (cfg.timesteps < 2) throw config_error("config: schedule.timesteps must be >= 2");
  if (!(0.0 < cfg.beta_start && cfg.beta_start < cfg.beta_end && cfg.beta_end < 1.0))
    throw config_error("config: need 0 < beta_start < beta_end < 1");
  if (cfg.interval_length < 1 || cfg.interval_length > cfg.timesteps)
    throw config_error("config: plan.interval_length must be in [1, timesteps]");
  if (cfg.total_iters < 0) throw config_error("config: plan.total_iters must be >= 0");
  if (cfg.channels < 1) throw config_error("config: model.channels must be >= 1");
  if (cfg.clip_length < 1) throw config_error("config: train.clip_length must be >= 1");
  if (cfg.learning_rate <= 0.0) throw config_error("config: train.learning_rate must be > 0");
  if (cfg.checkpoint_every < 1) throw config_error("config: train.checkpoint_every must be >= 1");
  if (cfg.inference_window < 0) throw config_error("config: train.inference_window must be >= 0");
  if (cfg.inference_window > 0 && cfg.inference_overlap >= cfg.inference_window)
    throw config_error("config: inference_overlap must be smaller than inference_window");
  if (cfg.inference_overlap < 0) throw config_error("config: inference_overlap must be >= 0");
  try {
    cfg.stroke.validate();
  } catch (const std::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  }
}

}  // namespace vinpaint
