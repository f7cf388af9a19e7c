#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "core/dictionary.hpp"
#include "core/sparse_coding.hpp"

namespace mfusion {

/// Paired focused/blurred training patches. Column i of `focused`
/// corresponds to column i of `blurred`; both are preprocessed (zero-mean,
/// unit Frobenius norm, or exactly zero when degenerate).
struct TrainingSet {
  Eigen::MatrixXd focused;  // dim × N
  Eigen::MatrixXd blurred;  // dim × N

  int dim() const { return static_cast<int>(focused.rows()); }
  int pair_count() const { return static_cast<int>(focused.cols()); }
  void validate() const;
};

struct LearnOptions {
  int atom_count = 256;
  int cycles = 10;
  double eps = 0.1;      // squared-residual stopping tolerance for the coder
  int max_atoms = 16;
  std::uint64_t seed = 0;
};

struct LearnDiagnostics {
  // Σ‖x − Dα‖² after each cycle's coding and atom updates, measured before
  // the duplicate-atom cleanup that prepares the next cycle.
  std::vector<double> objective;
  int unused_replaced = 0;
  int duplicate_replaced = 0;
};

/// K-SVD: alternates batch sparse coding with per-atom rank-1 updates. Each
/// atom is replaced by the dominant singular pair of the residual matrix of
/// the samples that use it (power iteration, tol 1e-10, max 1000 steps);
/// the corresponding coefficients are refreshed in place. Atoms that end a
/// coding pass unused, or that duplicate another atom (|inner product| >
/// 0.99), are re-seeded from the worst-approximated sample. The dictionary
/// is initialized from atom_count distinct non-degenerate samples chosen by
/// a PRNG seeded with opts.seed. samples is dim × N, N >= atom_count,
/// columns unit-norm or zero.
Dictionary ksvd_learn(const Eigen::MatrixXd& samples, const LearnOptions& opts,
                      DictLabel label = DictLabel::single, LearnDiagnostics* diag = nullptr);

/// Joint learning: stacks each (focused, blurred) pair into one 2·dim
/// vector (renormalized to unit norm), runs ksvd_learn on the stacked data
/// so every pair shares a single sparse code, then splits each atom into
/// its focused and blurred halves and renormalizes the halves
/// independently. Halves with zero norm are left as zero atoms and counted
/// in the result's degenerate fields.
CoupledDictionary coupled_learn(const TrainingSet& ts, const LearnOptions& opts,
                                LearnDiagnostics* diag = nullptr);

/// Baseline mode: K-SVD on the focused and blurred sets independently; the
/// result carries no pairwise atom correspondence (paired = false).
CoupledDictionary learn_separate(const TrainingSet& ts, const LearnOptions& opts,
                                 LearnDiagnostics* focused_diag = nullptr,
                                 LearnDiagnostics* blurred_diag = nullptr);

}  // namespace mfusion
