#include <doctest.h>

#include <random>

#include "core/tv.hpp"
#include "support/synthetic.hpp"

using namespace mfusion;

namespace {

Image noisy_step(int size, double noise, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, noise);
  Image img(size, size, 1);
  for (int r = 0; r < size; ++r) {
    for (int c = 0; c < size; ++c) {
      const double base = c < size / 2 ? 0.25 : 0.75;
      img.at(0, r, c) = std::clamp(base + gauss(rng), 0.0, 1.0);
    }
  }
  return img;
}

double objective_of(const Image& candidate, const Image& observed, double eta) {
  double data = 0.0;
  for (std::size_t i = 0; i < candidate.data().size(); ++i) {
    const double d = candidate.data()[i] - observed.data()[i];
    data += 0.5 * d * d;
  }
  return data + eta * tv_value(candidate);
}

}  // namespace

TEST_CASE("gradient of a constant image is zero") {
  Image flat(8, 10, 1);
  for (double& v : flat.data()) v = 0.3;
  const GradientField g = gradient(flat);
  for (double v : g.h) CHECK(v == 0.0);
  for (double v : g.v) CHECK(v == 0.0);
}

TEST_CASE("gradient of a horizontal ramp") {
  const int w = 10, h = 6;
  Image ramp(h, w, 1);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) ramp.at(0, r, c) = static_cast<double>(c) / w;
  }
  const GradientField g = gradient(ramp);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      if (c + 1 < w) {
        CHECK(g.h[i] == doctest::Approx(1.0 / w).epsilon(1e-12));
      } else {
        CHECK(g.h[i] == 0.0);  // Neumann border
      }
      CHECK(g.v[i] == 0.0);
    }
  }
}

TEST_CASE("adjoint identity <grad I, P> = <I, adjoint(P)>") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int h = 2 + static_cast<int>(rng() % 14);
    const int w = 2 + static_cast<int>(rng() % 14);
    Image img(h, w, 1);
    for (double& v : img.data()) v = uni(rng);
    GradientField p{h, w, std::vector<double>(img.data().size()),
                    std::vector<double>(img.data().size())};
    for (double& v : p.h) v = uni(rng) - 0.5;
    for (double& v : p.v) v = uni(rng) - 0.5;

    const GradientField g = gradient(img);
    double lhs = 0.0;
    for (std::size_t i = 0; i < g.h.size(); ++i) lhs += g.h[i] * p.h[i] + g.v[i] * p.v[i];
    const std::vector<double> adj = adjoint_gradient(p);
    double rhs = 0.0;
    for (std::size_t i = 0; i < adj.size(); ++i) rhs += img.data()[i] * adj[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("shrink_iso: zero threshold is the identity") {
  GradientField f{1, 2, {0.5, -0.3}, {0.1, 0.9}};
  const GradientField out = shrink_iso(f, 0.0);
  CHECK(out.h == f.h);
  CHECK(out.v == f.v);
}

TEST_CASE("shrink_iso: magnitudes below the threshold vanish") {
  GradientField f{1, 2, {0.1, -0.05}, {0.05, 0.02}};
  const GradientField out = shrink_iso(f, 1.0);
  for (double v : out.h) CHECK(v == 0.0);
  for (double v : out.v) CHECK(v == 0.0);
}

TEST_CASE("shrink_iso shrinks (3,4) by 1 to (2.4,3.2)") {
  GradientField f{1, 1, {3.0}, {4.0}};
  const GradientField out = shrink_iso(f, 1.0);
  CHECK(out.h[0] == doctest::Approx(2.4).epsilon(1e-12));
  CHECK(out.v[0] == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("tv_admm with eta = 0 returns the input exactly") {
  const Image img = testsupport::make_texture(32, 32, 71);
  TvParams params;
  params.eta = 0.0;
  const TvResult result = tv_admm(img, params);
  CHECK(result.converged);
  CHECK(result.image.data() == img.data());
}

TEST_CASE("tv_admm leaves a constant image fixed") {
  Image flat(24, 24, 1);
  for (double& v : flat.data()) v = 0.6;
  TvParams params;
  params.eta = 0.1;
  const TvResult result = tv_admm(flat, params);
  CHECK(result.converged);
  for (double v : result.image.data()) CHECK(v == doctest::Approx(0.6).epsilon(1e-10));
}

TEST_CASE("tv_admm objective is non-increasing after a short burn-in") {
  const Image img = noisy_step(64, 0.08, 72);
  TvParams params;
  params.eta = 0.1;
  params.max_iters = 150;
  const TvResult result = tv_admm(img, params);
  REQUIRE(result.objective.size() >= 10);
  for (std::size_t t = 5; t + 1 < result.objective.size(); ++t) {
    CHECK(result.objective[t + 1] <= result.objective[t] + 1e-8);
  }
}

TEST_CASE("tv_admm matches a long-run self-oracle within 0.5%") {
  const Image img = noisy_step(64, 0.08, 73);
  TvParams params;
  params.eta = 0.1;
  params.rho = 1.0;
  const TvResult fast = tv_admm(img, params);

  TvParams oracle_params = params;
  oracle_params.max_iters = 10000;
  oracle_params.tol = 1e-14;
  const TvResult oracle = tv_admm(img, oracle_params);

  const double j_fast = objective_of(fast.image, img, params.eta);
  const double j_oracle = objective_of(oracle.image, img, params.eta);
  CHECK(j_fast <= j_oracle * 1.005);
  CHECK(j_fast >= j_oracle * 0.9);  // sanity: cannot beat the minimizer by much
}

TEST_CASE("tv_admm reduces total variation for positive eta") {
  const Image img = noisy_step(48, 0.1, 74);
  TvParams params;
  params.eta = 0.05;
  const TvResult result = tv_admm(img, params);
  CHECK(tv_value(result.image) <= tv_value(img));
}

TEST_CASE("tv_admm validates parameters") {
  const Image img = testsupport::make_texture(16, 16, 75);
  TvParams params;
  params.rho = 0.0;
  CHECK_THROWS_AS(tv_admm(img, params), Error);
  params = TvParams{};
  params.gamma = 2.5;
  CHECK_THROWS_AS(tv_admm(img, params), Error);
  params = TvParams{};
  params.eta = -1.0;
  CHECK_THROWS_AS(tv_admm(img, params), Error);
  params = TvParams{};
  params.tol = 0.0;
  CHECK_THROWS_AS(tv_admm(img, params), Error);
}

TEST_CASE("tv_admm flags non-convergence but still returns an image") {
  const Image img = noisy_step(32, 0.1, 76);
  TvParams params;
  params.eta = 0.2;
  params.max_iters = 2;
  params.tol = 1e-12;
  const TvResult result = tv_admm(img, params);
  CHECK_FALSE(result.converged);
  CHECK(result.iterations == 2);
  CHECK(result.image.same_shape(img));
}
