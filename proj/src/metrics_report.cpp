#include "vinpaint/metrics.hpp"

#include <cstdio>
#include <set>
#include <sstream>

namespace vinpaint {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

std::vector<std::string> plugin_columns(const std::vector<MetricRow>& rows) {
  std::set<std::string> names;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.plugin_values) names.insert(k);
  return {names.begin(), names.end()};
}

}  // namespace

std::string MetricReport::to_csv() const {
  const auto plugins = plugin_columns(rows);
  std::ostringstream os;
  os << "sequence,psnr_db,masked_psnr_db,ssim,diversity";
  for (const auto& p : plugins) os << "," << p;
  os << "\n";
  for (const auto& r : rows) {
    os << r.name;
    os << "," << (r.psnr_db ? fmt(*r.psnr_db) : "");
    os << "," << (r.masked_psnr_db ? fmt(*r.masked_psnr_db) : "");
    os << "," << (r.ssim_value ? fmt(*r.ssim_value) : "");
    os << "," << (r.diversity_value ? fmt(*r.diversity_value) : "");
    for (const auto& p : plugins) {
      auto it = r.plugin_values.find(p);
      os << "," << (it != r.plugin_values.end() ? fmt(it->second) : "");
    }
    os << "\n";
  }
  return os.str();
}

std::string MetricReport::to_text() const {
  const auto plugins = plugin_columns(rows);
  std::ostringstream os;
  for (const auto& r : rows) {
    os << r.name << ":";
    if (r.psnr_db) {
      os << "  PSNR " << fmt(*r.psnr_db) << " dB";
      if (r.psnr_identical) os << " (identical)";
    }
    if (r.masked_psnr_db) os << "  masked-PSNR " << fmt(*r.masked_psnr_db) << " dB";
    if (r.ssim_value) os << "  SSIM " << fmt(*r.ssim_value);
    if (r.diversity_value) os << "  diversity " << fmt(*r.diversity_value);
    for (const auto& p : plugins) {
      auto it = r.plugin_values.find(p);
      if (it != r.plugin_values.end()) os << "  " << p << " " << fmt(it->second);
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace vinpaint
