#include "core/sparse_coding.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "core/parallel.hpp"

namespace mfusion {

namespace {
constexpr double kZeroColumnNormSq = 1e-24;
constexpr double kNegligibleCorrelation = 1e-12;
}  // namespace

double SparseCode::segment_l1(int begin, int end) const {
  double total = 0.0;
  for (std::size_t t = 0; t < support.size(); ++t) {
    if (support[t] >= begin && support[t] < end) total += std::abs(values[t]);
  }
  return total;
}

Eigen::VectorXd SparseCode::dense() const {
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(length);
  for (std::size_t t = 0; t < support.size(); ++t) alpha[support[t]] = values[t];
  return alpha;
}

SparseCode omp_encode(const Eigen::VectorXd& patch, const Dictionary& dict, double eps,
                      int max_atoms) {
  const Eigen::MatrixXd& D = dict.atoms();
  require(patch.size() == D.rows(), Errc::dimension, "omp_encode: patch/dictionary dim mismatch");
  require(patch.allFinite(), Errc::numeric, "omp_encode: non-finite patch");
  require(eps > 0.0, Errc::invalid_argument, "omp_encode: eps must be positive");
  const int M = static_cast<int>(D.cols());
  require(max_atoms >= 1 && max_atoms <= std::min<int>(static_cast<int>(D.rows()), M),
          Errc::invalid_argument, "omp_encode: max_atoms outside [1, min(dim, M)]");
  require(patch.norm() <= 1.0 + 1e-9, Errc::invalid_argument,
          "omp_encode: patch must be normalized");

  SparseCode code;
  code.length = M;
  code.residual_norm_sq = patch.squaredNorm();
  if (code.residual_norm_sq <= eps) return code;

  Eigen::VectorXd residual = patch;
  Eigen::MatrixXd basis(D.rows(), max_atoms);
  std::vector<char> used(M, 0);

  while (static_cast<int>(code.support.size()) < max_atoms) {
    const Eigen::VectorXd corr = D.transpose() * residual;
    int best = -1;
    double best_abs = kNegligibleCorrelation;
    for (int j = 0; j < M; ++j) {
      if (used[j]) continue;
      const double a = std::abs(corr[j]);
      if (a > best_abs) {  // strict ">" keeps the lowest index on ties
        best_abs = a;
        best = j;
      }
    }
    if (best < 0) break;  // residual orthogonal to every unused atom

    used[best] = 1;
    basis.col(static_cast<int>(code.support.size())) = D.col(best);
    code.support.push_back(best);
    const int k = static_cast<int>(code.support.size());

    // Least squares on the current support via normal equations.
    const auto A = basis.leftCols(k);
    const Eigen::MatrixXd gram = A.transpose() * A;
    const Eigen::VectorXd rhs = A.transpose() * patch;
    code.values = gram.ldlt().solve(rhs);

    residual = patch - A * code.values;
    code.residual_norm_sq = residual.squaredNorm();
    if (code.residual_norm_sq <= eps) break;
  }
  return code;
}

std::vector<SparseCode> batch_encode(const Eigen::MatrixXd& columns, const Dictionary& dict,
                                     double eps, int max_atoms) {
  require(columns.rows() == dict.atoms().rows(), Errc::dimension,
          "batch_encode: column/dictionary dim mismatch");
  std::vector<SparseCode> codes(columns.cols());
  parallel_for(0, columns.cols(), [&](std::ptrdiff_t i) {
    const Eigen::VectorXd col = columns.col(i);
    if (col.squaredNorm() < kZeroColumnNormSq) {
      codes[i].length = dict.atom_count();
      codes[i].residual_norm_sq = 0.0;
      return;
    }
    try {
      codes[i] = omp_encode(col, dict, eps, max_atoms);
    } catch (const Error& e) {
      fail(e.code(), "patch " + std::to_string(i) + ": " + e.what());
    }
  });
  return codes;
}

std::vector<SparseCode> batch_encode(const PatchGrid& grid, const Dictionary& dict, double eps,
                                     int max_atoms) {
  require(grid.preprocessed, Errc::invalid_argument, "batch_encode: grid is not preprocessed");
  return batch_encode(grid.vectors, dict, eps, max_atoms);
}

}  // namespace mfusion
