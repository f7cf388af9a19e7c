#include "core/dictionary.hpp"

#include <cmath>

namespace mfusion {

Dictionary::Dictionary(Eigen::MatrixXd atoms, DictLabel label, double norm_tolerance)
    : atoms_(std::move(atoms)), label_(label) {
  require(atoms_.rows() >= 1 && atoms_.cols() >= 1, Errc::invalid_argument,
          "dictionary must have at least one atom");
  require(atoms_.allFinite(), Errc::numeric, "dictionary contains non-finite values");
  if (label == DictLabel::coupled) {
    require(atoms_.cols() % 2 == 0, Errc::invalid_argument,
            "coupled dictionary needs an even atom count");
  }
  for (int j = 0; j < atoms_.cols(); ++j) {
    const double norm = atoms_.col(j).norm();
    require(norm < 1e-12 || std::abs(norm - 1.0) <= norm_tolerance, Errc::numeric,
            "dictionary column " + std::to_string(j) + " is not unit norm");
  }
}

void CoupledDictionary::validate() const {
  require(focused.dim() == blurred.dim(), Errc::dimension,
          "coupled dictionary halves differ in dimension");
  require(focused.atom_count() == blurred.atom_count(), Errc::dimension,
          "coupled dictionary halves differ in atom count");
  require(degenerate_focused == 0 && degenerate_blurred == 0, Errc::numeric,
          "coupled dictionary has degenerate atoms");
}

Dictionary CoupledDictionary::concat() const {
  validate();
  Eigen::MatrixXd joint(dim(), 2 * atom_count());
  joint.leftCols(atom_count()) = focused.atoms();
  joint.rightCols(atom_count()) = blurred.atoms();
  return Dictionary(std::move(joint), DictLabel::coupled);
}

}  // namespace mfusion
