#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>

#include "core/dictionary_learning.hpp"
#include "core/fusion.hpp"
#include "core/metrics.hpp"
#include "support/synthetic.hpp"

using namespace mfusion;

namespace {

SparseCode make_code(int length, std::vector<int> support, std::vector<double> values) {
  SparseCode code;
  code.length = length;
  code.support = std::move(support);
  code.values = Eigen::Map<Eigen::VectorXd>(values.data(), values.size());
  return code;
}

const CoupledDictionary& trained_dictionary() {
  static const CoupledDictionary dict = [] {
    const TrainingSet ts = testsupport::make_training_set(811, 128, 8, 3);
    LearnOptions opts;
    opts.atom_count = 64;
    opts.cycles = 8;
    opts.eps = 0.1;
    opts.max_atoms = 16;
    opts.seed = 4;
    return coupled_learn(ts, opts);
  }();
  return dict;
}

// All-textured scene so every window carries focus evidence.
Image textured_scene(int size, std::uint64_t seed) {
  return testsupport::make_depth_scene(size, seed, 0.0).sharp;
}

FusionConfig small_config() {
  FusionConfig cfg;
  cfg.patch_side = 8;
  cfg.overlap = 4;  // stride 4 keeps tests quick
  cfg.max_atoms = 8;
  return cfg;
}

// Fraction of anchors matching the truth, skipping windows that touch the
// boundary band (half-width `band` pixels around the region edge).
double mask_accuracy(const DecisionMask& mask, const Image& region, int band) {
  int correct = 0, counted = 0;
  for (int p = 0; p < mask.count(); ++p) {
    const int ar = mask.anchor_rows[p / mask.grid_cols];
    const int ac = mask.anchor_cols[p % mask.grid_cols];
    bool inside = false;
    const int r0 = std::max(0, ar - band), c0 = std::max(0, ac - band);
    const int r1 = std::min(region.height(), ar + mask.patch_side + band);
    const int c1 = std::min(region.width(), ac + mask.patch_side + band);
    bool any_in = false, any_out = false;
    for (int r = r0; r < r1; ++r) {
      for (int c = c0; c < c1; ++c) (region.at(0, r, c) >= 0.5 ? any_in : any_out) = true;
    }
    if (any_in && any_out) continue;  // boundary band
    inside = any_in;
    ++counted;
    const int expected = inside ? 0 : 1;  // source 0 is sharp inside the region
    if (mask.winner[p] == expected) ++correct;
  }
  REQUIRE(counted > 0);
  return static_cast<double>(correct) / counted;
}

}  // namespace

TEST_CASE("select implements the weighted-l1 rule") {
  // code 1 has all focused energy, code 2 all blurred energy
  const std::vector<SparseCode> codes{make_code(8, {0}, {1.0}), make_code(8, {5}, {-1.0})};
  const SelectionResult sel = select(codes, 0.54);
  CHECK(sel.scores[0] == doctest::Approx(0.54));
  CHECK(sel.scores[1] == doctest::Approx(0.46));
  CHECK(sel.winner == 0);
}

TEST_CASE("select at omega = 0.5 reduces to the max-l1 rule") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<SparseCode> codes;
    const int k_sources = 2 + static_cast<int>(rng() % 3);
    for (int k = 0; k < k_sources; ++k) {
      std::vector<int> support;
      std::vector<double> values;
      for (int j = 0; j < 10; ++j) {
        if (rng() % 3 == 0) {
          support.push_back(j);
          values.push_back(mag(rng));
        }
      }
      codes.push_back(make_code(10, support, values));
    }
    const SelectionResult sel = select(codes, 0.5);
    int max_l1 = 0;
    for (int k = 1; k < k_sources; ++k) {
      if (codes[k].l1_norm() > codes[max_l1].l1_norm()) max_l1 = k;
    }
    CHECK(sel.winner == max_l1);
  }
}

TEST_CASE("select: scaling all codes by the same positive factor keeps the winner") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> mag(-1.0, 1.0);
  for (int trial = 0; trial < 60; ++trial) {
    std::vector<SparseCode> codes;
    for (int k = 0; k < 3; ++k) {
      codes.push_back(make_code(6, {0, 3, 5}, {mag(rng), mag(rng), mag(rng)}));
    }
    const double omega = 0.5 + 0.49 * (rng() % 100) / 100.0;
    const SelectionResult base = select(codes, omega);

    const double scale = 0.1 + 3.0 * (rng() % 100) / 100.0;
    std::vector<SparseCode> scaled = codes;
    for (SparseCode& code : scaled) code.values *= scale;
    CHECK(select(scaled, omega).winner == base.winner);
  }
}

TEST_CASE("select: permuting sources permutes the winner (ties to lowest)") {
  const std::vector<SparseCode> codes{make_code(4, {0}, {0.3}), make_code(4, {1}, {0.9}),
                                      make_code(4, {2}, {-0.9})};
  const SelectionResult sel = select(codes, 0.6);
  CHECK(sel.winner == 1);  // |0.9| ties with |-0.9|, lowest index wins
  const std::vector<SparseCode> swapped{codes[2], codes[1], codes[0]};
  CHECK(select(swapped, 0.6).winner == 1);
  const std::vector<SparseCode> rotated{codes[1], codes[2], codes[0]};
  CHECK(select(rotated, 0.6).winner == 0);
}

TEST_CASE("select: increasing omega never shrinks the gap toward the focused-heavy code") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> mag(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const double fa = mag(rng), ba = mag(rng), fb = mag(rng), bb = mag(rng);
    const std::vector<SparseCode> codes{make_code(4, {0, 2}, {fa, ba}),
                                        make_code(4, {1, 3}, {fb, bb})};
    // code 0's focused-minus-blurred excess over code 1
    const double excess = (fa - ba) - (fb - bb);
    const SelectionResult low = select(codes, 0.55);
    const SelectionResult high = select(codes, 0.85);
    const double gap_low = low.scores[0] - low.scores[1];
    const double gap_high = high.scores[0] - high.scores[1];
    if (excess >= 0.0) {
      CHECK(gap_high >= gap_low - 1e-12);
    } else {
      CHECK(gap_high <= gap_low + 1e-12);
    }
  }
}

TEST_CASE("select validates omega and code lengths") {
  const std::vector<SparseCode> codes{make_code(4, {0}, {1.0}), make_code(4, {1}, {1.0})};
  CHECK_THROWS_AS(select(codes, 0.49), Error);
  CHECK_THROWS_AS(select(codes, 1.0), Error);
  const std::vector<SparseCode> mismatched{make_code(4, {0}, {1.0}), make_code(6, {1}, {1.0})};
  CHECK_THROWS_AS(select(mismatched, 0.54), Error);
  const std::vector<SparseCode> lonely{make_code(4, {0}, {1.0})};
  CHECK_THROWS_AS(select(lonely, 0.54), Error);
}

TEST_CASE("select with a zero-padded single dictionary reproduces max-l1 over it") {
  // Coupled dictionary [D | 0]: OMP never selects a zero atom, so the
  // blurred segment stays empty and omega=0.5 ranks by total l1 norm.
  std::mt19937_64 rng(15);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd base(16, 12);
  for (int j = 0; j < 12; ++j) {
    for (int i = 0; i < 16; ++i) base(i, j) = gauss(rng);
    base.col(j).normalize();
  }
  Eigen::MatrixXd padded(16, 24);
  padded.leftCols(12) = base;
  padded.rightCols(12).setZero();
  const Dictionary single(base, DictLabel::single);
  const Dictionary coupled(padded, DictLabel::coupled);

  for (int trial = 0; trial < 40; ++trial) {
    std::vector<SparseCode> padded_codes, single_codes;
    for (int k = 0; k < 2; ++k) {
      Eigen::VectorXd patch(16);
      for (int i = 0; i < 16; ++i) patch[i] = gauss(rng);
      patch.normalize();
      padded_codes.push_back(omp_encode(patch, coupled, 0.1, 8));
      single_codes.push_back(omp_encode(patch, single, 0.1, 8));
      CHECK(padded_codes.back().support == single_codes.back().support);
      CHECK(padded_codes.back().segment_l1(12, 24) == 0.0);
    }
    const int winner = select(padded_codes, 0.5).winner;
    const int baseline = single_codes[0].l1_norm() >= single_codes[1].l1_norm() ? 0 : 1;
    CHECK(winner == baseline);
  }
}

TEST_CASE("apply_mask returns the chosen patch verbatim") {
  Eigen::MatrixXd patches(4, 3);
  patches.col(0) << 0.1, 0.2, 0.3, 0.4;
  patches.col(1) << 0.5, 0.6, 0.7, 0.8;
  patches.col(2).setConstant(0.9);
  CHECK(apply_mask(0, patches) == patches.col(0));
  CHECK(apply_mask(2, patches) == patches.col(2));
  CHECK_THROWS_AS(apply_mask(3, patches), Error);
  CHECK_THROWS_AS(apply_mask(-1, patches), Error);

  Eigen::MatrixXd same(4, 2);
  same.col(0).setConstant(0.25);
  same.col(1).setConstant(0.25);
  CHECK(apply_mask(0, same) == apply_mask(1, same));
}

TEST_CASE("fuse_images of identical sources returns that source") {
  const Image img = textured_scene(48, 900);
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images({img, img}, dict, small_config());
  REQUIRE(result.fused.same_shape(img));
  double worst = 0.0;
  for (std::size_t i = 0; i < img.data().size(); ++i) {
    worst = std::max(worst, std::abs(result.fused.data()[i] - img.data()[i]));
  }
  CHECK(worst <= 1.0 / 255.0);
  for (int winner : result.mask.winner) {
    CHECK(winner >= 0);
    CHECK(winner < 2);
  }
}

TEST_CASE("fuse_images recovers the decision mask of a synthetic pair") {
  const Image sharp = textured_scene(96, 901);
  const Image region = testsupport::half_region(96, 96);
  const MultifocusPair pair = generate_multifocus(sharp, 2.0, region);
  const CoupledDictionary& dict = trained_dictionary();

  const FusionResult result = fuse_images({pair.a, pair.b}, dict, small_config());
  CHECK(mask_accuracy(result.mask, region, 8) >= 0.95);
}

TEST_CASE("fuse_images: three sources with disjoint sharp regions beat every input") {
  const int size = 96;
  const Image sharp = textured_scene(size, 902);
  // three vertical bands
  std::vector<Image> sources;
  for (int k = 0; k < 3; ++k) {
    Image band(size, size, 1);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        const int third = std::min(2, 3 * c / size);
        band.at(0, r, c) = third == k ? 1.0 : 0.0;
      }
    }
    sources.push_back(generate_multifocus(sharp, 2.0, band).a);
  }
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images(sources, dict, small_config());

  const double fused_mse = mse(sharp, result.fused);
  double best_source = std::numeric_limits<double>::infinity();
  for (const Image& src : sources) best_source = std::min(best_source, mse(sharp, src));
  CHECK(fused_mse < best_source);
}

TEST_CASE("fuse_images applies the grayscale mask to every color plane") {
  const Image gray_sharp = textured_scene(64, 903);
  Image color(64, 64, 3);
  for (int r = 0; r < 64; ++r) {
    for (int c = 0; c < 64; ++c) {
      const double v = gray_sharp.at(0, r, c);
      color.at(0, r, c) = v;
      color.at(1, r, c) = std::clamp(1.0 - v, 0.0, 1.0);
      color.at(2, r, c) = std::clamp(0.5 * v + 0.25, 0.0, 1.0);
    }
  }
  const Image region = testsupport::circle_region(64, 64);
  const MultifocusPair pair = generate_multifocus(color, 2.0, region);
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images({pair.a, pair.b}, dict, small_config());
  REQUIRE(result.fused.planes() == 3);
  // fused color should be close to the sharp color everywhere
  CHECK(mse(color, result.fused) < std::min(mse(color, pair.a), mse(color, pair.b)));
}

TEST_CASE("fuse_images rejects bad inputs") {
  const CoupledDictionary& dict = trained_dictionary();
  const Image a = testsupport::make_texture(32, 32, 904);
  const Image b = testsupport::make_texture(32, 40, 905);
  CHECK_THROWS_AS(fuse_images({a, b}, dict, small_config()), Error);
  CHECK_THROWS_AS(fuse_images({a}, dict, small_config()), Error);
  FusionConfig cfg = small_config();
  cfg.patch_side = 6;  // dictionary dim is 64
  CHECK_THROWS_AS(fuse_images({a, a}, dict, cfg), Error);
  cfg = small_config();
  cfg.omega = 0.4;
  CHECK_THROWS_AS(fuse_images({a, a}, dict, cfg), Error);
}

TEST_CASE("degenerate positions fall back to the max-variance source") {
  // Flat sources everywhere: all codes are zero, variance picks; with equal
  // variances the lowest index wins.
  Image flat_a(16, 16, 1), flat_b(16, 16, 1);
  for (double& v : flat_a.data()) v = 0.25;
  for (double& v : flat_b.data()) v = 0.75;
  const CoupledDictionary& dict = trained_dictionary();
  FusionConfig cfg = small_config();
  const FusionResult result = fuse_images({flat_a, flat_b}, dict, cfg);
  for (int p = 0; p < result.mask.count(); ++p) {
    CHECK(result.mask.degenerate[p] == 1);
    CHECK(result.mask.winner[p] == 0);  // tie -> lowest source index
  }
  for (double v : result.fused.data()) CHECK(v == doctest::Approx(0.25));
}

TEST_CASE("every fused pixel is a convex combination of co-located source pixels") {
  const Image sharp = textured_scene(64, 908);
  const MultifocusPair pair = generate_multifocus(sharp, 2.0, testsupport::circle_region(64, 64));
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images({pair.a, pair.b}, dict, small_config());
  for (std::size_t i = 0; i < result.fused.data().size(); ++i) {
    const double lo = std::min(pair.a.data()[i], pair.b.data()[i]);
    const double hi = std::max(pair.a.data()[i], pair.b.data()[i]);
    CHECK(result.fused.data()[i] >= lo - 1e-12);
    CHECK(result.fused.data()[i] <= hi + 1e-12);
  }
}

TEST_CASE("decision mask invariant: winner is the argmax of stored scores") {
  const Image sharp = textured_scene(48, 906);
  const MultifocusPair pair = generate_multifocus(sharp, 2.0, testsupport::half_region(48, 48));
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images({pair.a, pair.b}, dict, small_config());
  const DecisionMask& mask = result.mask;
  for (int p = 0; p < mask.count(); ++p) {
    int best = 0;
    for (int k = 1; k < mask.source_count; ++k) {
      if (mask.scores[p * mask.source_count + k] > mask.scores[p * mask.source_count + best]) {
        best = k;
      }
    }
    CHECK(mask.winner[p] == best);
  }
}

TEST_CASE("render_mask paints nearest-anchor winners at 0 and 255 for pairs") {
  const Image sharp = textured_scene(48, 907);
  const Image region = testsupport::half_region(48, 48);
  const MultifocusPair pair = generate_multifocus(sharp, 2.0, region);
  const CoupledDictionary& dict = trained_dictionary();
  const FusionResult result = fuse_images({pair.a, pair.b}, dict, small_config());
  const Image rendered = render_mask(result.mask, 48, 48);
  REQUIRE(rendered.same_shape(Image(48, 48, 1)));
  for (double v : rendered.data()) CHECK((v == 0.0 || v == 1.0));
  // far inside the region the winner must be source 0 (black)
  CHECK(rendered.at(0, 24, 4) == 0.0);
  CHECK(rendered.at(0, 24, 44) == 1.0);
}
