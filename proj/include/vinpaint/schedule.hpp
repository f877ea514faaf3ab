#pragma once

#include <cmath>
#include <stdexcept>

#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// Precomputed forward/reverse noise schedule. Tables are indexed by timestep
/// t in 1..timesteps; index 0 holds the closure values alpha_bar[0] = 1 and
/// sigma2[0] = 0 so the final reverse step is deterministic.
struct DiffusionSchedule {
  int timesteps = 0;
  double beta_start = 0.0, beta_end = 0.0;
  Vec<double> beta;       // forward variance per step
  Vec<double> alpha;      // 1 - beta
  Vec<double> alpha_bar;  // running product of alpha
  Vec<double> sigma2;     // fixed reverse variance
  // Posterior mean mu = coef_x0[t] * x0_hat + coef_xt[t] * x_t.
  Vec<double> coef_x0;
  Vec<double> coef_xt;

  double sqrt_alpha_bar(int t) const { return std::sqrt(alpha_bar[t]); }
  double sqrt_one_minus_alpha_bar(int t) const { return std::sqrt(1.0 - alpha_bar[t]); }
  double sigma(int t) const { return std::sqrt(sigma2[t]); }

  void require_timestep(int t) const {
    if (t < 1 || t > timesteps)
      throw std::out_of_range("timestep out of range [1, T]");
  }
};

/// Linear beta schedule between the two endpoints, all derived tables filled.
inline DiffusionSchedule make_schedule(int timesteps, double beta_start, double beta_end) {
  if (timesteps < 2) throw std::invalid_argument("make_schedule: need timesteps >= 2");
  if (!(0.0 < beta_start && beta_start < beta_end && beta_end < 1.0))
    throw std::invalid_argument("make_schedule: need 0 < beta_start < beta_end < 1");

  DiffusionSchedule s;
  s.timesteps = timesteps;
  s.beta_start = beta_start;
  s.beta_end = beta_end;
  s.beta.setZero(timesteps + 1);
  s.alpha.setConstant(timesteps + 1, 1.0);
  s.alpha_bar.setConstant(timesteps + 1, 1.0);
  s.sigma2.setZero(timesteps + 1);
  s.coef_x0.setZero(timesteps + 1);
  s.coef_xt.setZero(timesteps + 1);

  for (int t = 1; t <= timesteps; ++t) {
    s.beta[t] = beta_start + (beta_end - beta_start) * (t - 1) / (timesteps - 1);
    s.alpha[t] = 1.0 - s.beta[t];
    s.alpha_bar[t] = s.alpha_bar[t - 1] * s.alpha[t];
    s.sigma2[t] = (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]) * s.beta[t];
    s.coef_x0[t] = std::sqrt(s.alpha_bar[t - 1]) * s.beta[t] / (1.0 - s.alpha_bar[t]);
    s.coef_xt[t] = std::sqrt(s.alpha[t]) * (1.0 - s.alpha_bar[t - 1]) / (1.0 - s.alpha_bar[t]);
  }
  return s;
}

}  // namespace vinpaint
