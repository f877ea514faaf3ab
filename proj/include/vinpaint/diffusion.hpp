#pragma once

#include "vinpaint/random.hpp"
#include "vinpaint/schedule.hpp"
#include "vinpaint/tensor.hpp"

namespace vinpaint {

/// x_t = sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * eps.
template <typename Scalar>
Tensor4<Scalar> forward_diffuse(const Tensor4<Scalar>& x0, int t, const Tensor4<Scalar>& eps,
                                const DiffusionSchedule& sched) {
  sched.require_timestep(t);
  x0.require_shape(eps, "forward_diffuse");
  const Scalar a = static_cast<Scalar>(sched.sqrt_alpha_bar(t));
  const Scalar b = static_cast<Scalar>(sched.sqrt_one_minus_alpha_bar(t));
  Tensor4<Scalar> out = Tensor4<Scalar>::uninit(x0.frames(), x0.height(), x0.width(), x0.channels());
  out.array() = a * x0.array() + b * eps.array();
  return out;
}

/// Posterior mean of the reverse kernel in the x0 parameterization.
template <typename Scalar>
Tensor4<Scalar> posterior_mean(const Tensor4<Scalar>& x_hat0, const Tensor4<Scalar>& x_t, int t,
                               const DiffusionSchedule& sched) {
  sched.require_timestep(t);
  x_hat0.require_shape(x_t, "posterior_mean");
  const Scalar c0 = static_cast<Scalar>(sched.coef_x0[t]);
  const Scalar ct = static_cast<Scalar>(sched.coef_xt[t]);
  Tensor4<Scalar> out = Tensor4<Scalar>::uninit(x_t.frames(), x_t.height(), x_t.width(), x_t.channels());
  out.array() = c0 * x_hat0.array() + ct * x_t.array();
  return out;
}

template <typename Scalar>
Tensor4<Scalar> clamp_unit(const Tensor4<Scalar>& x) {
  Tensor4<Scalar> out = Tensor4<Scalar>::uninit(x.frames(), x.height(), x.width(), x.channels());
  out.array() = x.array().max(Scalar(-1)).min(Scalar(1));
  return out;
}

/// One reverse transition x_t -> x_{t-1}. The x0 prediction is clamped to
/// [-1, 1] before use. At t = 1 the step is deterministic (sigma_1 = 0 and
/// the posterior mean reduces to the clamped prediction), so no randomness
/// is consumed there.
template <typename Scalar>
Tensor4<Scalar> reverse_step(const Tensor4<Scalar>& x_t, const Tensor4<Scalar>& x_hat0, int t,
                             const DiffusionSchedule& sched, RandomStream& rng) {
  sched.require_timestep(t);
  x_t.require_shape(x_hat0, "reverse_step");
  Tensor4<Scalar> clamped = clamp_unit(x_hat0);
  if (t == 1) return clamped;

  Tensor4<Scalar> out = posterior_mean(clamped, x_t, t, sched);
  const Scalar sigma = static_cast<Scalar>(sched.sigma(t));
  Scalar* p = out.data();
  const long n = out.size();
  for (long i = 0; i < n; ++i) p[i] += sigma * static_cast<Scalar>(rng.normal());
  return out;
}

}  // namespace vinpaint
