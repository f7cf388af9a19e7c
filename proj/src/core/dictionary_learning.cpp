#include "core/dictionary_learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mfusion {

namespace {

constexpr double kZeroNorm = 1e-12;
constexpr double kDuplicateCoherence = 0.99;
constexpr double kPowerTolerance = 1e-10;
constexpr int kPowerMaxIters = 1000;

struct SingularPair {
  Eigen::VectorXd left;   // unit norm
  Eigen::VectorXd right;  // unit norm
  double sigma = 0.0;
};

// Dominant singular pair by power iteration on E·Eᵀ, warm-started from
// `seed_atom`. Sign is canonicalized so the largest-|entry| of the left
// vector is positive.
SingularPair dominant_singular_pair(const Eigen::MatrixXd& E, const Eigen::VectorXd& seed_atom) {
  SingularPair out;
  Eigen::VectorXd u = seed_atom;
  if (u.norm() < kZeroNorm) u = Eigen::VectorXd::Ones(E.rows()).normalized();

  for (int it = 0; it < kPowerMaxIters; ++it) {
    Eigen::VectorXd v = E.transpose() * u;
    const double vn = v.norm();
    if (vn < kZeroNorm) return out;  // sigma 0: residual matrix is numerically zero
    v /= vn;
    Eigen::VectorXd u_next = E * v;
    const double sigma = u_next.norm();
    if (sigma < kZeroNorm) return out;
    u_next /= sigma;
    const double delta = (u_next - u).cwiseAbs().maxCoeff();
    u = u_next;
    out.right = v;
    out.sigma = sigma;
    if (delta <= kPowerTolerance) break;
  }
  out.left = u;

  int peak = 0;
  u.cwiseAbs().maxCoeff(&peak);
  if (u[peak] < 0.0) {
    out.left = -out.left;
    out.right = -out.right;
  }
  return out;
}

// Residual of sample i under the current dictionary and code.
Eigen::VectorXd sample_residual(const Eigen::MatrixXd& samples, const Eigen::MatrixXd& D,
                                const std::vector<SparseCode>& codes, int i) {
  Eigen::VectorXd r = samples.col(i);
  const SparseCode& code = codes[i];
  for (std::size_t t = 0; t < code.support.size(); ++t) {
    r -= code.values[t] * D.col(code.support[t]);
  }
  return r;
}

class WorstSamplePicker {
 public:
  WorstSamplePicker(const Eigen::MatrixXd& samples, const std::vector<SparseCode>& codes)
      : samples_(samples), consumed_(samples.cols(), 0) {
    for (int i = 0; i < samples.cols(); ++i) {
      if (samples.col(i).norm() < kZeroNorm) consumed_[i] = 1;  // never pick degenerate data
    }
    residual_.resize(samples.cols());
    for (int i = 0; i < samples.cols(); ++i) residual_[i] = codes[i].residual_norm_sq;
  }

  // Index of the worst-approximated unconsumed sample (ties -> lowest).
  int take() {
    int best = -1;
    double worst = -1.0;
    for (int i = 0; i < samples_.cols(); ++i) {
      if (consumed_[i]) continue;
      if (residual_[i] > worst) {
        worst = residual_[i];
        best = i;
      }
    }
    require(best >= 0, Errc::numeric, "ksvd_learn: no usable sample left for atom replacement");
    consumed_[best] = 1;
    return best;
  }

 private:
  const Eigen::MatrixXd& samples_;
  std::vector<char> consumed_;
  std::vector<double> residual_;
};

}  // namespace

void TrainingSet::validate() const {
  require(focused.cols() == blurred.cols(), Errc::dimension,
          "training set: focused/blurred pair counts differ");
  require(focused.rows() == blurred.rows(), Errc::dimension,
          "training set: focused/blurred dims differ");
  require(focused.cols() > 0, Errc::invalid_argument, "training set: empty");
  require(focused.allFinite() && blurred.allFinite(), Errc::numeric,
          "training set: non-finite values");
}

Dictionary ksvd_learn(const Eigen::MatrixXd& samples, const LearnOptions& opts, DictLabel label,
                      LearnDiagnostics* diag) {
  const int dim = static_cast<int>(samples.rows());
  const int n = static_cast<int>(samples.cols());
  const int m = opts.atom_count;
  require(m >= 1, Errc::invalid_argument, "ksvd_learn: atom count must be positive");
  require(n >= m, Errc::invalid_argument, "ksvd_learn: need at least as many samples as atoms");
  require(opts.cycles >= 1, Errc::invalid_argument, "ksvd_learn: cycles must be >= 1");
  require(samples.allFinite(), Errc::numeric, "ksvd_learn: non-finite samples");

  std::vector<int> usable;
  for (int i = 0; i < n; ++i) {
    if (samples.col(i).norm() >= kZeroNorm) usable.push_back(i);
  }
  require(static_cast<int>(usable.size()) >= m, Errc::numeric,
          "ksvd_learn: not enough non-degenerate samples");

  // Initialize from m distinct samples chosen by the seeded PRNG.
  std::mt19937_64 rng(opts.seed);
  std::vector<int> init;
  std::sample(usable.begin(), usable.end(), std::back_inserter(init), m, rng);
  Eigen::MatrixXd D(dim, m);
  for (int j = 0; j < m; ++j) D.col(j) = samples.col(init[j]).normalized();

  std::vector<SparseCode> codes;
  for (int cycle = 0; cycle < opts.cycles; ++cycle) {
    codes = batch_encode(samples, Dictionary(D, label), opts.eps, opts.max_atoms);

    // usage[j] -> (sample index, position of j within that sample's support)
    std::vector<std::vector<std::pair<int, int>>> usage(m);
    for (int i = 0; i < n; ++i) {
      const SparseCode& code = codes[i];
      for (std::size_t t = 0; t < code.support.size(); ++t) {
        if (code.values[t] != 0.0) usage[code.support[t]].push_back({i, static_cast<int>(t)});
      }
    }

    WorstSamplePicker picker(samples, codes);

    for (int j = 0; j < m; ++j) {
      const auto& users = usage[j];
      if (users.empty()) {
        D.col(j) = samples.col(picker.take()).normalized();
        if (diag) ++diag->unused_replaced;
        continue;
      }

      // Residual matrix restricted to the users of atom j, with atom j's
      // own contribution added back.
      Eigen::MatrixXd E(dim, users.size());
      for (std::size_t t = 0; t < users.size(); ++t) {
        const auto [i, pos] = users[t];
        E.col(static_cast<int>(t)) =
            sample_residual(samples, D, codes, i) + codes[i].values[pos] * D.col(j);
      }

      const SingularPair svd = dominant_singular_pair(E, D.col(j));
      if (svd.sigma < kZeroNorm) {
        D.col(j) = samples.col(picker.take()).normalized();
        if (diag) ++diag->unused_replaced;
        continue;
      }
      D.col(j) = svd.left;
      for (std::size_t t = 0; t < users.size(); ++t) {
        const auto [i, pos] = users[t];
        codes[i].values[pos] = svd.sigma * svd.right[static_cast<int>(t)];
      }
    }

    // Objective after this cycle's coding and atom updates (the duplicate
    // cleanup below re-seeds atoms for the next cycle and would leave the
    // stored codes pointing at replaced columns).
    if (diag) {
      double objective = 0.0;
      for (int i = 0; i < n; ++i) objective += sample_residual(samples, D, codes, i).squaredNorm();
      diag->objective.push_back(objective);
    }

    // De-duplicate near-identical atoms.
    for (int j = 1; j < m; ++j) {
      for (int l = 0; l < j; ++l) {
        if (std::abs(D.col(l).dot(D.col(j))) > kDuplicateCoherence) {
          D.col(j) = samples.col(picker.take()).normalized();
          if (diag) ++diag->duplicate_replaced;
          break;
        }
      }
    }
  }

  return Dictionary(std::move(D), label);
}

CoupledDictionary coupled_learn(const TrainingSet& ts, const LearnOptions& opts,
                                LearnDiagnostics* diag) {
  ts.validate();
  const int dim = ts.dim();
  const int n = ts.pair_count();

  Eigen::MatrixXd stacked(2 * dim, n);
  stacked.topRows(dim) = ts.focused;
  stacked.bottomRows(dim) = ts.blurred;
  for (int i = 0; i < n; ++i) {
    const double norm = stacked.col(i).norm();
    if (norm >= kZeroNorm) stacked.col(i) /= norm;
  }

  const Dictionary joint = ksvd_learn(stacked, opts, DictLabel::single, diag);

  Eigen::MatrixXd focused = joint.atoms().topRows(dim);
  Eigen::MatrixXd blurred = joint.atoms().bottomRows(dim);
  CoupledDictionary out;
  out.paired = true;
  for (int j = 0; j < opts.atom_count; ++j) {
    const double nf = focused.col(j).norm();
    if (nf < kZeroNorm) {
      focused.col(j).setZero();
      ++out.degenerate_focused;
    } else {
      focused.col(j) /= nf;
    }
    const double nb = blurred.col(j).norm();
    if (nb < kZeroNorm) {
      blurred.col(j).setZero();
      ++out.degenerate_blurred;
    } else {
      blurred.col(j) /= nb;
    }
  }
  out.focused = Dictionary(std::move(focused), DictLabel::focused);
  out.blurred = Dictionary(std::move(blurred), DictLabel::blurred);
  return out;
}

CoupledDictionary learn_separate(const TrainingSet& ts, const LearnOptions& opts,
                                 LearnDiagnostics* focused_diag, LearnDiagnostics* blurred_diag) {
  ts.validate();
  LearnOptions blurred_opts = opts;
  blurred_opts.seed = opts.seed + 1;  // distinct but reproducible stream

  CoupledDictionary out;
  out.paired = false;
  out.focused = ksvd_learn(ts.focused, opts, DictLabel::focused, focused_diag);
  out.blurred = ksvd_learn(ts.blurred, blurred_opts, DictLabel::blurred, blurred_diag);
  return out;
}

}  // namespace mfusion
