#include <doctest.h>

#include <cmath>

#include "vinpaint/masks.hpp"

using namespace vinpaint;

namespace {

Tensor4f random_binary(int L, int H, int W, RandomStream& rng) {
  Tensor4f m(L, H, W, 1);
  for (long i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform() < 0.5 ? 0.0f : 1.0f;
  return m;
}

}  // namespace

TEST_CASE("combine_masks equals pointwise OR") {
  SUBCASE("truth table") {
    Tensor4f a(1, 1, 2, 1), b(1, 1, 2, 1);
    // (0,0) (1,0) then (0,1) (1,1)
    a.at(0, 0, 0, 0) = 0;
    a.at(0, 0, 1, 0) = 1;
    b.setZero();
    Tensor4f m = combine_masks(a, b);
    CHECK(m.at(0, 0, 0, 0) == 0.0f);
    CHECK(m.at(0, 0, 1, 0) == 1.0f);
    b.at(0, 0, 0, 0) = 1;
    b.at(0, 0, 1, 0) = 1;
    m = combine_masks(a, b);
    CHECK(m.at(0, 0, 0, 0) == 1.0f);
    CHECK(m.at(0, 0, 1, 0) == 1.0f);
  }
  SUBCASE("identity with empty train mask") {
    RandomStream rng(31);
    Tensor4f a = random_binary(2, 4, 4, rng);
    Tensor4f zero(2, 4, 4, 1);
    Tensor4f m = combine_masks(a, zero);
    CHECK((m.array() == a.array()).all());
  }
  SUBCASE("random volumes match the elementwise oracle; OR is commutative, idempotent, monotone") {
    RandomStream rng(32);
    for (int trial = 0; trial < 20; ++trial) {
      Tensor4f a = random_binary(2, 4, 4, rng);
      Tensor4f b = random_binary(2, 4, 4, rng);
      Tensor4f m = combine_masks(a, b);
      for (long i = 0; i < m.size(); ++i) {
        const bool expect = a.data()[i] > 0.5f || b.data()[i] > 0.5f;
        CHECK(m.data()[i] == (expect ? 1.0f : 0.0f));
        CHECK(m.data()[i] >= a.data()[i]);  // monotone above each input
      }
      Tensor4f ba = combine_masks(b, a);
      CHECK((m.array() == ba.array()).all());
      Tensor4f mm = combine_masks(m, m);
      CHECK((mm.array() == m.array()).all());
    }
  }
  SUBCASE("shape mismatch") {
    Tensor4f a(1, 4, 4, 1), b(1, 4, 8, 1);
    CHECK_THROWS_AS(combine_masks(a, b), std::invalid_argument);
  }
}

TEST_CASE("stroke masks: binary, deterministic, empty when zero strokes") {
  StrokeMaskConfig cfg;
  cfg.strokes_min = cfg.strokes_max = 0;
  RandomStream rng(33);
  Tensor4f empty = generate_stroke_mask<float>(3, 32, 32, cfg, rng);
  CHECK(empty.array().abs().maxCoeff() == 0.0f);

  StrokeMaskConfig small;
  small.strokes_min = 1;
  small.strokes_max = 3;
  small.brush_min = 4;
  small.brush_max = 10;
  small.steps_min = 3;
  small.steps_max = 6;
  RandomStream r1(34), r2(34);
  Tensor4f m1 = generate_stroke_mask<float>(4, 32, 32, small, r1);
  Tensor4f m2 = generate_stroke_mask<float>(4, 32, 32, small, r2);
  CHECK((m1.array() == m2.array()).all());
  for (long i = 0; i < m1.size(); ++i)
    CHECK((m1.data()[i] == 0.0f || m1.data()[i] == 1.0f));
  CHECK(m1.array().sum() > 0.0f);
}

TEST_CASE("stroke masks: coverage fraction regression band") {
  // Band measured over 300 default-config masks at the working resolution
  // and frozen; guards against silent generator drift.
  StrokeMaskConfig cfg;
  RandomStream rng(35);
  double total = 0.0;
  const int trials = 300;
  for (int i = 0; i < trials; ++i) {
    Tensor4f m = generate_stroke_mask<float>(8, 240, 432, cfg, rng);
    total += static_cast<double>(m.array().sum()) / static_cast<double>(m.size());
  }
  const double mean_fraction = total / trials;
  CHECK(mean_fraction > 0.02);
  CHECK(mean_fraction < 0.30);
}

TEST_CASE("build_conditioning field identities") {
  const DiffusionSchedule sched = make_schedule(100, 1e-4, 0.02);
  RandomStream rng(36);
  Tensor4f x0(2, 8, 8, 3), eps(2, 8, 8, 3);
  fill_normal(x0, rng);
  fill_normal(eps, rng);

  SUBCASE("fully occluded test mask: x_tilde is pure scaled noise") {
    Tensor4f mtest = Tensor4f::constant(2, 8, 8, 1, 1.0f);
    Tensor4f mtrain(2, 8, 8, 1);
    auto b = build_conditioning(x0, mtest, mtrain, 42, eps, sched);
    const float sb = static_cast<float>(sched.sqrt_one_minus_alpha_bar(42));
    for (long i = 0; i < eps.size(); ++i)
      CHECK(b.x_tilde.data()[i] == sb * eps.data()[i]);
    CHECK(b.y.array().abs().maxCoeff() == 0.0f);
  }
  SUBCASE("fully observed: y = x0, M = 0") {
    Tensor4f zero(2, 8, 8, 1);
    auto b = build_conditioning(x0, zero, zero, 10, eps, sched);
    CHECK((b.y.array() == x0.array()).all());
    CHECK(b.mask.array().abs().maxCoeff() == 0.0f);
    CHECK(b.loss_mask.array().abs().maxCoeff() == 0.0f);
  }
  SUBCASE("mask algebra: M = OR, loss_mask = train and-not test, y zero under M") {
    Tensor4f mtest(2, 8, 8, 1), mtrain(2, 8, 8, 1);
    for (long i = 0; i < mtest.size(); ++i) {
      mtest.data()[i] = rng.uniform() < 0.3 ? 1.0f : 0.0f;
      mtrain.data()[i] = rng.uniform() < 0.3 ? 1.0f : 0.0f;
    }
    auto b = build_conditioning(x0, mtest, mtrain, 10, eps, sched);
    for (long p = 0; p < mtest.size(); ++p) {
      const bool test = mtest.data()[p] > 0.5f, train = mtrain.data()[p] > 0.5f;
      CHECK(b.mask.data()[p] == ((test || train) ? 1.0f : 0.0f));
      CHECK(b.loss_mask.data()[p] == ((train && !test) ? 1.0f : 0.0f));
      if (test || train)
        for (int c = 0; c < 3; ++c) CHECK(b.y.mat()(c, p) == 0.0f);
    }
  }
}

TEST_CASE("no-leakage: poisoning the test region changes nothing, bit for bit") {
  const DiffusionSchedule sched = make_schedule(100, 1e-4, 0.02);
  RandomStream rng(37);
  Tensor4f x0(2, 8, 8, 3), eps(2, 8, 8, 3);
  fill_normal(x0, rng);
  fill_normal(eps, rng);
  Tensor4f mtest(2, 8, 8, 1), mtrain(2, 8, 8, 1);
  for (long i = 0; i < mtest.size(); ++i) {
    mtest.data()[i] = rng.uniform() < 0.4 ? 1.0f : 0.0f;
    mtrain.data()[i] = rng.uniform() < 0.4 ? 1.0f : 0.0f;
  }

  Tensor4f poisoned = x0;
  for (long p = 0; p < mtest.size(); ++p)
    if (mtest.data()[p] > 0.5f)
      for (int c = 0; c < 3; ++c)
        poisoned.mat()(c, p) = static_cast<float>(rng.normal() * 1e6) +
                               (c == 0 ? std::numeric_limits<float>::quiet_NaN() : 0.0f);

  auto clean = build_conditioning(x0, mtest, mtrain, 30, eps, sched);
  auto dirty = build_conditioning(poisoned, mtest, mtrain, 30, eps, sched);
  CHECK(std::memcmp(clean.x_tilde.data(), dirty.x_tilde.data(),
                    sizeof(float) * static_cast<std::size_t>(clean.x_tilde.size())) == 0);
  CHECK(std::memcmp(clean.y.data(), dirty.y.data(),
                    sizeof(float) * static_cast<std::size_t>(clean.y.size())) == 0);
  CHECK((clean.mask.array() == dirty.mask.array()).all());
  CHECK((clean.loss_mask.array() == dirty.loss_mask.array()).all());

  // the loss ignores residuals outside its support even with NaNs there
  Tensor4f pred(2, 8, 8, 3);
  fill_normal(pred, rng);
  const double l_clean = masked_loss(x0, pred, clean.loss_mask);
  const double l_dirty = masked_loss(poisoned, pred, clean.loss_mask);
  CHECK(l_clean == l_dirty);
}

TEST_CASE("masked_loss values and gradient support") {
  Tensor4f x0(1, 2, 2, 3), pred(1, 2, 2, 3), support(1, 2, 2, 1);
  x0.array() = 0.25f;
  pred = x0;

  SUBCASE("zero residual") {
    support.array() = 1.0f;
    CHECK(masked_loss(x0, pred, support) == 0.0);
  }
  SUBCASE("residual outside the support is ignored") {
    support.setZero();
    pred.array() += 5.0f;
    CHECK(masked_loss(x0, pred, support) == 0.0);
  }
  SUBCASE("single supported pixel with residual d gives d^2 per channel") {
    support.setZero();
    support.at(0, 1, 0, 0) = 1.0f;
    pred = x0;
    pred.at(0, 1, 0, 1) = x0.at(0, 1, 0, 1) + 0.5f;
    Tensor4f grad;
    const double loss = masked_loss(x0, pred, support, &grad);
    CHECK(loss == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(grad.at(0, 1, 0, 1) == doctest::Approx(1.0).epsilon(1e-6));  // -2 * (x0 - pred)
    CHECK(grad.at(0, 0, 0, 1) == 0.0f);
    CHECK(grad.at(0, 1, 0, 0) == 0.0f);
  }
}
