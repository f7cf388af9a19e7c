#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <utility>
#include <vector>

#include "core/image.hpp"

namespace mfusion {

/// Sliding-window patches of a 1-plane image. A d×d window anchored at
/// (r,c) is vectorized column-major: window element (i,j) maps to v[j*d+i].
/// Anchors enumerate row-major, left-top to right-bottom. The anchor
/// lattice steps by `stride`; when the stride does not land exactly on the
/// image edge a final clamped anchor is appended per axis so the last
/// window ends at the border.
struct PatchGrid {
  int patch_side = 0;
  int stride = 0;
  int image_height = 0;
  int image_width = 0;
  std::vector<int> anchor_rows;  // ascending row lattice
  std::vector<int> anchor_cols;  // ascending col lattice
  Eigen::MatrixXd vectors;       // d² × count, one column per anchor

  // Filled by preprocess():
  Eigen::VectorXd means;               // removed per-patch mean
  Eigen::VectorXd norms;               // Frobenius norm before normalization
  std::vector<std::uint8_t> degenerate;  // constant patches (stored as zero)
  bool preprocessed = false;

  int grid_rows() const { return static_cast<int>(anchor_rows.size()); }
  int grid_cols() const { return static_cast<int>(anchor_cols.size()); }
  int count() const { return grid_rows() * grid_cols(); }
  std::pair<int, int> anchor(int index) const {
    return {anchor_rows[index / grid_cols()], anchor_cols[index % grid_cols()]};
  }
  std::vector<std::pair<int, int>> anchors() const;
};

/// Number of anchors along one axis of length `extent` (see PatchGrid).
int anchor_count(int extent, int patch_side, int stride);

/// Extracts raw (unnormalized) patches. Requires 1-plane input,
/// 0 <= overlap < d and d <= min(H, W); stride = d - overlap.
PatchGrid extract_patches(const Image& img, int patch_side, int overlap);

/// Removes each patch's mean and scales to unit Frobenius norm, recording
/// both. Patches that are constant (norm < 1e-12 after mean removal) are
/// stored as zero vectors and flagged degenerate.
PatchGrid preprocess(PatchGrid grid);

/// Rebuilds an H×W image by averaging every patch value covering each
/// pixel; the result is clipped to [0,1]. Every pixel must be covered by
/// at least one patch. Patches are raw intensities in the PatchGrid
/// vectorization order.
Image reconstruct_overlap_average(const std::vector<std::pair<int, int>>& anchors,
                                  const Eigen::MatrixXd& patches, int height, int width);

/// Population variance of the entries of a patch vector.
double patch_variance(const Eigen::Ref<const Eigen::VectorXd>& v);

}  // namespace mfusion
