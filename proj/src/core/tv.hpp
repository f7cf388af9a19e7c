#pragma once

#include <vector>

#include "core/image.hpp"

namespace mfusion {

struct TvParams {
  double eta = 1e-5;    // TV regularization weight
  double rho = 1.0;     // ADMM penalty
  double gamma = 1.0;   // dual update relaxation, 0 < gamma <= 2
  int max_iters = 200;
  double tol = 1e-6;    // relative primal/dual residual tolerance

  void validate() const;
};

/// Forward-difference gradient field with Neumann boundary (the last
/// row/column difference is zero). Row-major H×W storage.
struct GradientField {
  int rows = 0;
  int cols = 0;
  std::vector<double> h;  // horizontal differences
  std::vector<double> v;  // vertical differences
};

/// ∇: forward differences of a 1-plane image (H, W >= 2).
GradientField gradient(const Image& img);

/// ∇ᵀ: exact adjoint of gradient(), so <∇I, P> = <I, adjoint_gradient(P)>.
std::vector<double> adjoint_gradient(const GradientField& field);

/// Isotropic soft shrinkage: each pixel's (h,v) pair has its magnitude
/// reduced by t (to zero when the magnitude is below t).
GradientField shrink_iso(const GradientField& field, double threshold);

/// Isotropic total variation Σ √(gh² + gv²).
double tv_value(const Image& img);

struct TvResult {
  Image image;
  bool converged = true;
  int iterations = 0;
  std::vector<double> objective;  // ½‖I−I0‖² + η·TV(I) after each iteration
};

/// Solves min_I ½‖I − I0‖² + η·TV_iso(I) by ADMM with the split z = ∇I.
/// The I-update inverts (1 + ρ∇ᵀ∇) exactly in the DCT domain; the z-update
/// is shrink_iso(∇I + u, η/ρ); the dual update is u += γ(∇I − z). Stops when
/// max(relative primal, relative dual residual) < tol or at max_iters, in
/// which case the best-objective iterate is returned with converged=false.
/// η = 0 returns the input unchanged. The output is clipped to [0,1].
TvResult tv_admm(const Image& src, const TvParams& params);

}  // namespace mfusion
