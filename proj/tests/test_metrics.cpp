#include <doctest.h>

#include <cmath>

#include "vinpaint/metrics.hpp"
#include "vinpaint/random.hpp"

using namespace vinpaint;

namespace {

Tensor4f random_clip(int L, int H, int W, RandomStream& rng) {
  Tensor4f t(L, H, W, 3);
  for (long i = 0; i < t.size(); ++i) t.data()[i] = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

}  // namespace

TEST_CASE("psnr closed forms") {
  RandomStream rng(71);
  Tensor4f a = random_clip(3, 16, 16, rng);

  SUBCASE("identical inputs hit the cap") { CHECK(psnr(a, a) == kPsnrCap); }
  SUBCASE("uniform 0.1 difference on the unit scale is 20 dB") {
    Tensor4f b = a;
    b.array() = (a.array() - 1.0f).max(-1.0f);  // keep headroom, then shift by exactly 0.2
    Tensor4f shifted = b;
    shifted.array() += 0.2f;
    CHECK(psnr(b, shifted) == doctest::Approx(20.0).epsilon(1e-4));
  }
  SUBCASE("matches an independently coded frame MSE oracle") {
    Tensor4f b = random_clip(3, 16, 16, rng);
    double expected = 0.0;
    for (int l = 0; l < 3; ++l) {
      double se = 0.0;
      for (long p = 0; p < a.frame_pixels(); ++p)
        for (int c = 0; c < 3; ++c) {
          const double d = (a.frame_mat(l)(c, p) - b.frame_mat(l)(c, p)) / 2.0;
          se += d * d;
        }
      expected += -10.0 * std::log10(se / (a.frame_pixels() * 3.0));
    }
    expected /= 3.0;
    CHECK(psnr(a, b) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("monotone decay with noise amplitude") {
    RandomStream noise(72);
    Tensor4f n(3, 16, 16, 3);
    fill_normal(n, noise);
    double prev = 1e9;
    for (double amp : {0.01, 0.05, 0.25}) {
      Tensor4f b = a;
      b.array() += static_cast<float>(amp) * n.array();
      const double v = psnr(a, b);
      CHECK(v < prev);
      prev = v;
    }
  }
  SUBCASE("masked region restriction") {
    Tensor4f b = a;
    Tensor4f region(3, 16, 16, 1);
    region.at(1, 4, 4, 0) = 1.0f;
    b.at(1, 4, 4, 0) += 0.5f;  // damage only inside the region
    const double masked = psnr(a, b, &region);
    CHECK(masked < psnr(a, b));
    Tensor4f empty_region(3, 16, 16, 1);
    CHECK_THROWS_AS(psnr(a, b, &empty_region), std::invalid_argument);
  }
  SUBCASE("shape mismatch") {
    Tensor4f b(3, 16, 8, 3);
    CHECK_THROWS_AS(psnr(a, b), std::invalid_argument);
  }
}

TEST_CASE("ssim properties and closed forms") {
  RandomStream rng(73);
  Tensor4f a = random_clip(2, 24, 24, rng);

  SUBCASE("self similarity is exactly 1") { CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12)); }
  SUBCASE("symmetry") {
    Tensor4f b = random_clip(2, 24, 24, rng);
    CHECK(ssim(a, b) == doctest::Approx(ssim(b, a)).epsilon(1e-12));
  }
  SUBCASE("negation of a high-variance frame goes negative") {
    Tensor4f neg = a;
    neg.array() = -a.array();
    CHECK(ssim(a, neg) < 0.0);
  }
  SUBCASE("constant frames: closed form with zero variances") {
    Tensor4f x = Tensor4f::constant(1, 16, 16, 3, 0.2f);
    Tensor4f y = Tensor4f::constant(1, 16, 16, 3, -0.4f);
    const double mx = to_unit(0.2f), my = to_unit(-0.4f), c1 = 1e-4;
    const double expected = (2 * mx * my + c1) / (mx * mx + my * my + c1);
    CHECK(ssim(x, y) == doctest::Approx(expected).epsilon(1e-9));
  }
  SUBCASE("window does not fit") {
    Tensor4f tiny(1, 8, 8, 3);
    CHECK_THROWS_AS(ssim(tiny, tiny), std::invalid_argument);
  }
}

TEST_CASE("diversity closed forms and invariances") {
  RandomStream rng(74);
  Tensor4f ref = random_clip(2, 8, 8, rng);
  Tensor4f region = Tensor4f::constant(2, 8, 8, 1, 1.0f);

  SUBCASE("duplicated samples have zero diversity") {
    std::vector<Tensor4f> samples{ref, ref, ref};
    CHECK(diversity(samples, region, ref) == 0.0);
  }
  SUBCASE("two samples differing by a constant: c/2 over the reference std") {
    Tensor4f b = ref;
    b.array() += 0.2f;  // 0.1 on the unit scale
    std::vector<Tensor4f> samples{ref, b};
    double mean = 0.0, sq = 0.0;
    for (long i = 0; i < ref.size(); ++i) {
      const double v = to_unit(ref.data()[i]);
      mean += v;
      sq += v * v;
    }
    mean /= ref.size();
    const double ref_std = std::sqrt(sq / ref.size() - mean * mean);
    CHECK(diversity(samples, region, ref) == doctest::Approx(0.05 / ref_std).epsilon(1e-5));
  }
  SUBCASE("invariant under a common perturbation") {
    Tensor4f b = ref;
    b.array() += 0.3f;
    std::vector<Tensor4f> samples{ref, b};
    const double base = diversity(samples, region, ref);
    Tensor4f p(2, 8, 8, 3);
    fill_normal(p, rng);
    std::vector<Tensor4f> moved = samples;
    for (auto& s : moved) s.array() += 0.01f * p.array();
    CHECK(diversity(moved, region, ref) == doctest::Approx(base).epsilon(1e-6));
  }
  SUBCASE("needs two samples") {
    std::vector<Tensor4f> one{ref};
    CHECK_THROWS_AS(diversity(one, region, ref), std::invalid_argument);
  }
}

TEST_CASE("perceptual plugin seam") {
  RandomStream rng(75);
  Tensor4f a = random_clip(1, 16, 16, rng), b = random_clip(1, 16, 16, rng);

  SUBCASE("unregistered name fails loudly") {
    CHECK(!perceptual_available("lpips"));
    CHECK_THROWS_AS(perceptual("lpips", a, b), std::runtime_error);
  }
  SUBCASE("registered adapter passes through and shows up in the report") {
    register_perceptual("const_metric", [](const Tensor4f&, const Tensor4f&) { return 0.125; });
    CHECK(perceptual("const_metric", a, b) == 0.125);

    MetricReport with;
    MetricRow row;
    row.name = "seq";
    row.psnr_db = 30.0;
    row.plugin_values["const_metric"] = 0.125;
    with.rows.push_back(row);
    CHECK(with.to_csv().find("const_metric") != std::string::npos);

    MetricReport without;
    MetricRow bare;
    bare.name = "seq";
    bare.psnr_db = 30.0;
    without.rows.push_back(bare);
    CHECK(without.to_csv().find("const_metric") == std::string::npos);
    perceptual_registry().erase("const_metric");
  }
}
