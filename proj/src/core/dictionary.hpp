#pragma once

#include <Eigen/Core>

#include "core/error.hpp"

namespace mfusion {

enum class DictLabel { focused, blurred, coupled, single };

/// Column dictionary: dim × M, every column unit Frobenius norm. Exactly
/// zero columns are tolerated as inert placeholders (they can never win an
/// atom selection); anything between zero and unit norm is rejected.
class Dictionary {
 public:
  Dictionary() = default;
  Dictionary(Eigen::MatrixXd atoms, DictLabel label, double norm_tolerance = 1e-10);

  int dim() const { return static_cast<int>(atoms_.rows()); }
  int atom_count() const { return static_cast<int>(atoms_.cols()); }
  const Eigen::MatrixXd& atoms() const { return atoms_; }
  DictLabel label() const { return label_; }

 private:
  Eigen::MatrixXd atoms_;
  DictLabel label_ = DictLabel::single;
};

/// Pair of dictionaries over the focused and blurred feature spaces.
/// `paired` records whether atom i of each half was learned as one joint
/// feature (coupled mode) or the halves were trained independently.
struct CoupledDictionary {
  Dictionary focused;
  Dictionary blurred;
  bool paired = true;
  int degenerate_focused = 0;  // atom halves that collapsed to zero
  int degenerate_blurred = 0;

  int dim() const { return focused.dim(); }
  int atom_count() const { return focused.atom_count(); }

  void validate() const;

  /// Horizontal concatenation [D^F | D^B] used for sparse approximation;
  /// the first atom_count() columns are the focused half.
  Dictionary concat() const;
};

}  // namespace mfusion
