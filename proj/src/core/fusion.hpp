#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "core/dictionary.hpp"
#include "core/image.hpp"
#include "core/sparse_coding.hpp"
#include "core/tv.hpp"

namespace mfusion {

struct FusionConfig {
  int patch_side = 8;
  int overlap = 7;
  double omega = 0.54;  // focused-subspace weight, 0.5 <= omega < 1
  double eps = 0.1;     // sparse-coding squared-residual tolerance
  int max_atoms = 16;
  bool tv_enabled = false;
  TvParams tv{};

  void validate() const;
};

/// Per-anchor selection outcome. `scores` hold the values the winner was
/// the argmax of: the weighted-l1 selection scores normally, or raw patch
/// variances at positions where every code was zero (flagged degenerate).
/// Winner indices are 0-based source indices.
struct DecisionMask {
  int grid_rows = 0;
  int grid_cols = 0;
  int source_count = 0;
  int patch_side = 0;
  std::vector<int> anchor_rows;
  std::vector<int> anchor_cols;
  std::vector<int> winner;               // grid_rows*grid_cols
  std::vector<double> scores;            // [position*source_count + k]
  std::vector<std::uint8_t> degenerate;  // variance fallback used

  int count() const { return grid_rows * grid_cols; }
};

struct SelectionResult {
  int winner = 0;                // 0-based source index, ties -> lowest
  std::vector<double> scores;    // ω‖α_k^F‖₁ + (1−ω)‖α_k^B‖₁ per source
};

/// Weighted max-l1 selection over codes sharing one coupled dictionary
/// (even length 2M; the first M entries are the focused segment).
SelectionResult select(const std::vector<SparseCode>& codes, double omega);

/// Returns the winning source's raw patch verbatim. patches is d²×K,
/// winner is a 0-based column index.
Eigen::VectorXd apply_mask(int winner, const Eigen::MatrixXd& patches);

struct FusionResult {
  Image fused;
  DecisionMask mask;
  bool tv_converged = true;  // meaningful only when TV ran
};

/// Full pipeline: grayscale conversion, patch extraction and
/// preprocessing, sparse approximation over [D^F | D^B], weighted-l1
/// selection per position (raw-variance fallback when all codes are zero),
/// verbatim patch copy from the winning source, and overlap-average
/// reconstruction. Color inputs derive one mask from their grayscale
/// versions and reuse it on each RGB plane. When cfg.tv_enabled the result
/// is refined per plane by tv_admm.
FusionResult fuse_images(const std::vector<Image>& sources, const CoupledDictionary& dict,
                         const FusionConfig& cfg);

/// Winner map rendered at pixel resolution by nearest-anchor fill, with
/// gray level winner·⌊255/(K−1)⌋.
Image render_mask(const DecisionMask& mask, int height, int width);

}  // namespace mfusion
