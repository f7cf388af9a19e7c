#pragma once

#include <Eigen/Core>
#include <vector>

#include "core/dictionary.hpp"
#include "core/patches.hpp"

namespace mfusion {

/// Sparse coefficient vector over an M-atom dictionary, stored as
/// (support, values) pairs. residual_norm_sq is ‖patch − D·α‖².
struct SparseCode {
  int length = 0;
  std::vector<int> support;
  Eigen::VectorXd values;
  double residual_norm_sq = 0.0;

  bool empty() const { return support.empty(); }
  double l1_norm() const { return values.size() ? values.cwiseAbs().sum() : 0.0; }
  /// Σ|α_j| over support indices j with begin <= j < end.
  double segment_l1(int begin, int end) const;
  Eigen::VectorXd dense() const;
};

/// Orthogonal matching pursuit. Greedily selects the atom most correlated
/// with the residual (ties break to the lowest index), refits all selected
/// coefficients by least squares, and stops once the squared residual norm
/// drops to eps or max_atoms atoms are in use. The input must be normalized
/// (‖patch‖ <= 1 + 1e-9); eps bounds the *squared* residual norm.
SparseCode omp_encode(const Eigen::VectorXd& patch, const Dictionary& dict, double eps,
                      int max_atoms);

/// Column-wise omp_encode. Zero columns (norm < 1e-12) yield all-zero codes.
/// Runs patch-parallel; output order matches column order and is identical
/// to a serial run. Errors are rethrown with the column index attached.
std::vector<SparseCode> batch_encode(const Eigen::MatrixXd& columns, const Dictionary& dict,
                                     double eps, int max_atoms);

/// batch_encode over a preprocessed patch grid.
std::vector<SparseCode> batch_encode(const PatchGrid& grid, const Dictionary& dict, double eps,
                                     int max_atoms);

}  // namespace mfusion
