#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "core/metrics.hpp"
#include "support/synthetic.hpp"

using namespace mfusion;

namespace {

Image quantize(const Image& img) {
  Image out = img;
  for (double& v : out.data()) v = std::round(std::clamp(v, 0.0, 1.0) * 255.0) / 255.0;
  return out;
}

Image shuffled(const Image& img, std::uint64_t seed) {
  Image out = img;
  std::mt19937_64 rng(seed);
  std::shuffle(out.data().begin(), out.data().end(), rng);
  return out;
}

// Histogram-entropy oracle for MI(X;X) = H(X).
double entropy_oracle(const Image& img) {
  std::vector<double> hist(256, 0.0);
  for (double v : img.data()) {
    hist[std::clamp<int>(static_cast<int>(std::lround(v * 255.0)), 0, 255)] += 1.0;
  }
  double h = 0.0;
  for (double count : hist) {
    if (count > 0.0) {
      const double p = count / static_cast<double>(img.data().size());
      h -= p * std::log2(p);
    }
  }
  return h;
}

}  // namespace

TEST_CASE("mse basics") {
  const Image img = testsupport::make_texture(24, 24, 40);
  CHECK(mse(img, img) == 0.0);

  Image shifted = img;
  for (double& v : shifted.data()) v = std::clamp(v + 1.0 / 255.0, 0.0, 1.0);
  // guard against clipping at the top end: texture stays within [0.05, 0.95]
  CHECK(mse(img, shifted) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(mse(shifted, img) == doctest::Approx(1.0).epsilon(1e-9));

  Image black(8, 8, 1), white(8, 8, 1);
  for (double& v : white.data()) v = 1.0;
  CHECK(mse(black, white) == doctest::Approx(65025.0));

  Image other(8, 9, 1);
  CHECK_THROWS_AS(mse(black, other), Error);
}

TEST_CASE("mse is non-negative and symmetric on random pairs") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    const Image a = testsupport::make_texture(16, 16, rng());
    const Image b = testsupport::make_texture(16, 16, rng());
    const double ab = mse(a, b);
    CHECK(ab >= 0.0);
    CHECK(ab == doctest::Approx(mse(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("ssim of an image with itself is 1") {
  const Image img = testsupport::make_texture(32, 32, 42);
  CHECK(ssim(img, img) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ssim drops below 0.5 against the inverted image") {
  const Image img = testsupport::make_texture(64, 64, 43);
  Image inverted = img;
  for (double& v : inverted.data()) v = 1.0 - v;
  CHECK(ssim(img, inverted) < 0.5);
}

TEST_CASE("ssim stays above 0.999 under tiny noise") {
  const Image img = testsupport::make_texture(64, 64, 44);
  std::mt19937_64 rng(45);
  std::normal_distribution<double> gauss(0.0, 1e-4);
  Image noisy = img;
  for (double& v : noisy.data()) v = std::clamp(v + gauss(rng), 0.0, 1.0);
  CHECK(ssim(img, noisy) >= 0.999);
}

TEST_CASE("ssim is invariant to a global shift when window means match") {
  // A period-2 checkerboard perturbation has zero mean in every 8x8 window,
  // which keeps the luminance term exact under a simultaneous shift.
  const Image base = testsupport::make_texture(40, 40, 46);
  Image x(40, 40, 1), y(40, 40, 1);
  for (int r = 0; r < 40; ++r) {
    for (int c = 0; c < 40; ++c) {
      const double v = 0.3 + 0.3 * base.at(0, r, c);
      x.at(0, r, c) = v;
      y.at(0, r, c) = v + ((r + c) % 2 ? 0.02 : -0.02);
    }
  }
  const double before = ssim(x, y);
  Image xs = x, ys = y;
  for (double& v : xs.data()) v += 0.1;
  for (double& v : ys.data()) v += 0.1;
  const double after = ssim(xs, ys);
  CHECK(after == doctest::Approx(before).epsilon(1e-9));
}

TEST_CASE("nmi of three identical non-constant images is exactly 2") {
  const Image img = quantize(testsupport::make_texture(48, 48, 47));
  REQUIRE(entropy_oracle(img) > 0.0);  // non-constant
  CHECK(nmi(img, img, img) == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("nmi of an unrelated (shuffled) fusion is near zero") {
  // Histogram MI has a positive finite-sample bias of roughly
  // bins^2 / (2 N ln 2) bits, so the independence check uses a bin count
  // small enough for the bias to stay well under the 0.05 threshold.
  const Image a = quantize(testsupport::make_texture(128, 128, 48));
  const Image b = quantize(testsupport::make_texture(128, 128, 49));
  const Image f = shuffled(quantize(testsupport::make_texture(128, 128, 50)), 51);
  CHECK(nmi(a, b, f, 32) < 0.05);
}

TEST_CASE("nmi is invariant under an identical gray-level relabeling") {
  std::mt19937_64 rng(52);
  std::vector<int> relabel(256);
  std::iota(relabel.begin(), relabel.end(), 0);
  std::shuffle(relabel.begin(), relabel.end(), rng);
  const auto apply = [&](const Image& img) {
    Image out = img;
    for (double& v : out.data()) {
      v = relabel[std::clamp<int>(static_cast<int>(std::lround(v * 255.0)), 0, 255)] / 255.0;
    }
    return out;
  };
  const Image a = quantize(testsupport::make_texture(40, 40, 53));
  const Image b = quantize(testsupport::make_texture(40, 40, 54));
  const Image f = quantize(testsupport::make_texture(40, 40, 55));
  CHECK(nmi(apply(a), apply(b), apply(f)) == doctest::Approx(nmi(a, b, f)).epsilon(1e-12));
}

TEST_CASE("qabf: perfect fusion scores near 1, constant fusion near 0") {
  const Image img = testsupport::make_texture(64, 64, 56);
  CHECK(qabf(img, img, img) > 0.99);

  Image flat(64, 64, 1);
  for (double& v : flat.data()) v = 0.5;
  CHECK(qabf(img, img, flat) < 0.05);
}

TEST_CASE("qabf flags all-flat inputs as degenerate zero") {
  Image flat(16, 16, 1);
  bool degenerate = false;
  CHECK(qabf(flat, flat, flat, &degenerate) == 0.0);
  CHECK(degenerate);
}

TEST_CASE("qabf stays within [0,1] on random inputs") {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 20; ++trial) {
    const Image a = testsupport::make_texture(24, 24, rng());
    const Image b = testsupport::make_texture(24, 24, rng());
    const Image f = testsupport::make_texture(24, 24, rng());
    const double q = qabf(a, b, f);
    CHECK(q >= 0.0);
    CHECK(q <= 1.0);
  }
}

TEST_CASE("metrics reject shape and plane mismatches") {
  Image small(8, 8, 1), big(9, 9, 1), color(8, 8, 3);
  CHECK_THROWS_AS(ssim(small, big), Error);
  CHECK_THROWS_AS(ssim(color, color), Error);
  CHECK_THROWS_AS(nmi(small, small, big), Error);
  CHECK_THROWS_AS(qabf(small, big, small), Error);
}
