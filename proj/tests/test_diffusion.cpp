#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "vinpaint/diffusion.hpp"

using namespace vinpaint;

namespace {

Tensor4d scalar_tensor(double v) {
  Tensor4d t(1, 1, 1, 1);
  t.at(0, 0, 0, 0) = v;
  return t;
}

/// Schedule stub with hand-chosen alpha_bar at one timestep.
DiffusionSchedule stub_schedule(int t, double alpha_bar_t, double alpha_bar_prev, double beta_t) {
  DiffusionSchedule s = make_schedule(std::max(2, t + 1), 1e-4, 0.02);
  s.alpha_bar[t] = alpha_bar_t;
  s.alpha_bar[t - 1] = alpha_bar_prev;
  s.beta[t] = beta_t;
  s.alpha[t] = 1.0 - beta_t;
  s.sigma2[t] = (1.0 - alpha_bar_prev) / (1.0 - alpha_bar_t) * beta_t;
  s.coef_x0[t] = std::sqrt(alpha_bar_prev) * beta_t / (1.0 - alpha_bar_t);
  s.coef_xt[t] = std::sqrt(1.0 - beta_t) * (1.0 - alpha_bar_prev) / (1.0 - alpha_bar_t);
  return s;
}

}  // namespace

TEST_CASE("forward_diffuse special cases and the scalar probe") {
  const DiffusionSchedule s = make_schedule(100, 1e-4, 0.02);
  RandomStream rng(1);
  Tensor4d x0(2, 4, 4, 3), eps(2, 4, 4, 3);
  fill_normal(x0, rng);

  SUBCASE("zero noise") {
    Tensor4d out = forward_diffuse(x0, 37, eps, s);
    for (long i = 0; i < out.size(); ++i)
      CHECK(out.data()[i] == doctest::Approx(std::sqrt(s.alpha_bar[37]) * x0.data()[i]));
  }
  SUBCASE("zero signal") {
    fill_normal(eps, rng);
    x0.setZero();
    Tensor4d out = forward_diffuse(x0, 99, eps, s);
    for (long i = 0; i < out.size(); ++i)
      CHECK(out.data()[i] == doctest::Approx(std::sqrt(1.0 - s.alpha_bar[99]) * eps.data()[i]));
  }
  SUBCASE("frozen scalar probe: alpha_bar = 0.25, x0 = eps = 1") {
    const DiffusionSchedule probe = stub_schedule(5, 0.25, 0.3, 0.01);
    Tensor4d out = forward_diffuse(scalar_tensor(1.0), 5, scalar_tensor(1.0), probe);
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(1.3660254037844386).epsilon(1e-12));
  }
  SUBCASE("t out of range") {
    CHECK_THROWS_AS(forward_diffuse(x0, 0, eps, s), std::out_of_range);
    CHECK_THROWS_AS(forward_diffuse(x0, 101, eps, s), std::out_of_range);
  }
}

TEST_CASE("forward_diffuse is linear in (x0, eps)") {
  const DiffusionSchedule s = make_schedule(100, 1e-4, 0.02);
  RandomStream rng(2);
  Tensor4d a(1, 4, 4, 3), b(1, 4, 4, 3), ea(1, 4, 4, 3), eb(1, 4, 4, 3);
  fill_normal(a, rng);
  fill_normal(b, rng);
  fill_normal(ea, rng);
  fill_normal(eb, rng);
  Tensor4d combo(1, 4, 4, 3), ec(1, 4, 4, 3);
  combo.array() = 2.0 * a.array() - 3.0 * b.array();
  ec.array() = 2.0 * ea.array() - 3.0 * eb.array();
  Tensor4d lhs = forward_diffuse(combo, 50, ec, s);
  Tensor4d fa = forward_diffuse(a, 50, ea, s);
  Tensor4d fb = forward_diffuse(b, 50, eb, s);
  for (long i = 0; i < lhs.size(); ++i)
    CHECK(lhs.data()[i] == doctest::Approx(2.0 * fa.data()[i] - 3.0 * fb.data()[i]).epsilon(1e-12));
}

TEST_CASE("posterior_mean reduces to x0_hat at t = 1") {
  const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
  RandomStream rng(3);
  Tensor4d x0(1, 4, 4, 3), xt(1, 4, 4, 3);
  fill_normal(x0, rng);
  fill_normal(xt, rng);
  Tensor4d mu = posterior_mean(x0, xt, 1, s);
  for (long i = 0; i < mu.size(); ++i)
    CHECK(mu.data()[i] == doctest::Approx(x0.data()[i]).epsilon(1e-12));
}

TEST_CASE("posterior_mean: constant inputs give the closed-form scalar") {
  const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
  const int t = 613;
  const double c = 0.37;
  Tensor4d xc = scalar_tensor(c);
  Tensor4d mu = posterior_mean(xc, xc, t, s);
  const double expected = c *
      (std::sqrt(s.alpha_bar[t - 1]) * s.beta[t] +
       std::sqrt(s.alpha[t]) * (1.0 - s.alpha_bar[t - 1])) /
      (1.0 - s.alpha_bar[t]);
  CHECK(mu.at(0, 0, 0, 0) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("posterior coefficients match an independently coded oracle at random t") {
  const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
  const oracles::ScheduleOracle ref(1000, 1e-4, 0.02);
  RandomStream rng(4);
  for (int trial = 0; trial < 10; ++trial) {
    const int t = static_cast<int>(rng.uniform_int(2, 1000));
    const double x0v = rng.normal(), xtv = rng.normal();
    Tensor4d mu = posterior_mean(scalar_tensor(x0v), scalar_tensor(xtv), t, s);
    const long double expected =
        (std::sqrt(ref.alpha_bar[t - 1]) * ref.beta[t] * x0v +
         std::sqrt(ref.alpha[t]) * (1.0L - ref.alpha_bar[t - 1]) * xtv) /
        (1.0L - ref.alpha_bar[t]);
    CHECK(mu.at(0, 0, 0, 0) == doctest::Approx(static_cast<double>(expected)).epsilon(1e-10));
  }
}

TEST_CASE("reverse_step: final step is exact, zero variance is deterministic") {
  const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
  RandomStream rng(5);
  Tensor4d xt(1, 4, 4, 3), xhat(1, 4, 4, 3);
  fill_normal(xt, rng);
  fill_normal(xhat, rng);

  SUBCASE("t = 1 returns clamp(x0_hat) exactly") {
    Tensor4d out = reverse_step(xt, xhat, 1, s, rng);
    for (long i = 0; i < out.size(); ++i)
      CHECK(out.data()[i] == std::clamp(xhat.data()[i], -1.0, 1.0));
  }
  SUBCASE("forced sigma2 = 0 returns the posterior mean") {
    DiffusionSchedule frozen = s;
    frozen.sigma2[700] = 0.0;
    Tensor4d clamped = clamp_unit(xhat);
    Tensor4d mu = posterior_mean(clamped, xt, 700, frozen);
    Tensor4d out = reverse_step(xt, xhat, 700, frozen, rng);
    for (long i = 0; i < out.size(); ++i) CHECK(out.data()[i] == mu.data()[i]);
  }
}

TEST_CASE("reverse_step injects noise with the scheduled variance") {
  const DiffusionSchedule s = make_schedule(1000, 1e-4, 0.02);
  const int t = 500;
  RandomStream rng(6);
  Tensor4d xt = scalar_tensor(0.2), xhat = scalar_tensor(-0.1);
  const Tensor4d mu = posterior_mean(clamp_unit(xhat), xt, t, s);
  const int n = 10000;
  double sq = 0.0;
  for (int i = 0; i < n; ++i) {
    Tensor4d out = reverse_step(xt, xhat, t, s, rng);
    const double d = out.at(0, 0, 0, 0) - mu.at(0, 0, 0, 0);
    sq += d * d;
  }
  const double var = sq / n;
  CHECK(var == doctest::Approx(s.sigma2[t]).epsilon(0.05));
}

TEST_CASE("oracle chain: reverse pass with the true x0 terminates at x0") {
  // Replacing the model by the truth at every step must reproduce x0 since
  // the t = 1 step returns the prediction itself.
  const DiffusionSchedule s = make_schedule(50, 1e-4, 0.02);
  RandomStream rng(7);
  Tensor4f x0(2, 8, 8, 3);
  for (long i = 0; i < x0.size(); ++i)
    x0.data()[i] = static_cast<float>(rng.uniform(-0.9, 0.9));
  Tensor4f x(2, 8, 8, 3);
  fill_normal(x, rng);
  for (int t = 50; t >= 1; --t) x = reverse_step(x, x0, t, s, rng);
  for (long i = 0; i < x.size(); ++i)
    CHECK(std::abs(x.data()[i] - x0.data()[i]) <= 1e-5f);
}
