#include "core/tv.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>

namespace mfusion {

namespace {

// FFTW plan creation/destruction is not thread-safe.
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}

// Solves (1 + rho·∇ᵀ∇) x = b exactly. ∇ᵀ∇ with Neumann forward differences
// is diagonalized by the DCT-II with per-axis eigenvalues 2 − 2cos(πk/n).
class NeumannPoissonSolver {
 public:
  NeumannPoissonSolver(int rows, int cols, double rho)
      : rows_(rows), cols_(cols), buf_(static_cast<std::size_t>(rows) * cols),
        spec_(buf_.size()), denom_(buf_.size()) {
    for (int i = 0; i < rows; ++i) {
      const double li = 2.0 - 2.0 * std::cos(std::numbers::pi * i / rows);
      for (int j = 0; j < cols; ++j) {
        const double lj = 2.0 - 2.0 * std::cos(std::numbers::pi * j / cols);
        denom_[static_cast<std::size_t>(i) * cols + j] = 1.0 + rho * (li + lj);
      }
    }
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fwd_ = fftw_plan_r2r_2d(rows, cols, buf_.data(), spec_.data(), FFTW_REDFT10, FFTW_REDFT10,
                            FFTW_ESTIMATE);
    inv_ = fftw_plan_r2r_2d(rows, cols, spec_.data(), buf_.data(), FFTW_REDFT01, FFTW_REDFT01,
                            FFTW_ESTIMATE);
    require(fwd_ != nullptr && inv_ != nullptr, Errc::numeric, "tv_admm: FFTW plan failed");
  }

  ~NeumannPoissonSolver() {
    std::lock_guard<std::mutex> lock(fftw_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  NeumannPoissonSolver(const NeumannPoissonSolver&) = delete;
  NeumannPoissonSolver& operator=(const NeumannPoissonSolver&) = delete;

  void solve(const std::vector<double>& rhs, std::vector<double>& out) {
    std::copy(rhs.begin(), rhs.end(), buf_.begin());
    fftw_execute(fwd_);
    const double scale = 1.0 / (4.0 * rows_ * cols_);
    for (std::size_t i = 0; i < spec_.size(); ++i) spec_[i] *= scale / denom_[i];
    fftw_execute(inv_);
    out = buf_;
  }

 private:
  int rows_, cols_;
  std::vector<double> buf_, spec_, denom_;
  fftw_plan fwd_ = nullptr;
  fftw_plan inv_ = nullptr;
};

double field_norm(const GradientField& f) {
  double s = 0.0;
  for (double x : f.h) s += x * x;
  for (double x : f.v) s += x * x;
  return std::sqrt(s);
}

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void gradient_of(const std::vector<double>& img, int rows, int cols, GradientField& out) {
  out.rows = rows;
  out.cols = cols;
  out.h.assign(img.size(), 0.0);
  out.v.assign(img.size(), 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (c + 1 < cols) out.h[i] = img[i + 1] - img[i];
      if (r + 1 < rows) out.v[i] = img[i + cols] - img[i];
    }
  }
}

}  // namespace

void TvParams::validate() const {
  require(eta >= 0.0, Errc::invalid_argument, "tv: eta must be >= 0");
  require(rho > 0.0, Errc::invalid_argument, "tv: rho must be positive");
  require(gamma > 0.0 && gamma <= 2.0, Errc::invalid_argument, "tv: gamma outside (0, 2]");
  require(max_iters >= 1, Errc::invalid_argument, "tv: max_iters must be >= 1");
  require(tol > 0.0, Errc::invalid_argument, "tv: tol must be positive");
}

GradientField gradient(const Image& img) {
  require(img.planes() == 1, Errc::invalid_argument, "gradient: 1-plane image required");
  require(img.height() >= 2 && img.width() >= 2, Errc::invalid_argument,
          "gradient: image must be at least 2x2");
  GradientField out;
  gradient_of(img.data(), img.height(), img.width(), out);
  return out;
}

std::vector<double> adjoint_gradient(const GradientField& field) {
  const int rows = field.rows, cols = field.cols;
  std::vector<double> out(static_cast<std::size_t>(rows) * cols, 0.0);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * cols + c;
      if (c + 1 < cols) {
        out[i] -= field.h[i];
        out[i + 1] += field.h[i];
      }
      if (r + 1 < rows) {
        out[i] -= field.v[i];
        out[i + cols] += field.v[i];
      }
    }
  }
  return out;
}

GradientField shrink_iso(const GradientField& field, double threshold) {
  require(threshold >= 0.0, Errc::invalid_argument, "shrink_iso: threshold must be >= 0");
  GradientField out = field;
  for (std::size_t i = 0; i < out.h.size(); ++i) {
    const double m = std::hypot(out.h[i], out.v[i]);
    const double scale = m > threshold ? (m - threshold) / m : 0.0;
    out.h[i] *= scale;
    out.v[i] *= scale;
  }
  return out;
}

double tv_value(const Image& img) {
  const GradientField g = gradient(img);
  double total = 0.0;
  for (std::size_t i = 0; i < g.h.size(); ++i) total += std::hypot(g.h[i], g.v[i]);
  return total;
}

TvResult tv_admm(const Image& src, const TvParams& params) {
  params.validate();
  require(src.planes() == 1, Errc::invalid_argument, "tv_admm: 1-plane image required");

  TvResult result;
  if (params.eta == 0.0) {  // data term only: the input is already the minimizer
    result.image = src;
    result.image.clip();
    return result;
  }
  require(src.height() >= 2 && src.width() >= 2, Errc::invalid_argument,
          "tv_admm: image must be at least 2x2");

  const int rows = src.height(), cols = src.width();
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  const std::vector<double>& observed = src.data();

  std::vector<double> current = observed;
  GradientField grad;
  gradient_of(current, rows, cols, grad);
  GradientField split = grad;                  // z
  GradientField dual{rows, cols, std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};  // u

  NeumannPoissonSolver solver(rows, cols, params.rho);
  std::vector<double> rhs(n), best = current;
  double best_objective = std::numeric_limits<double>::infinity();
  bool converged = false;

  GradientField shifted{rows, cols, std::vector<double>(n), std::vector<double>(n)};
  for (int iter = 1; iter <= params.max_iters; ++iter) {
    // I-update: (1 + ρ∇ᵀ∇) I = I0 + ρ∇ᵀ(z − u)
    for (std::size_t i = 0; i < n; ++i) {
      shifted.h[i] = split.h[i] - dual.h[i];
      shifted.v[i] = split.v[i] - dual.v[i];
    }
    const std::vector<double> zt = adjoint_gradient(shifted);
    for (std::size_t i = 0; i < n; ++i) rhs[i] = observed[i] + params.rho * zt[i];
    solver.solve(rhs, current);
    gradient_of(current, rows, cols, grad);

    // z-update and relaxed dual update
    const GradientField prev_split = split;
    for (std::size_t i = 0; i < n; ++i) {
      shifted.h[i] = grad.h[i] + dual.h[i];
      shifted.v[i] = grad.v[i] + dual.v[i];
    }
    split = shrink_iso(shifted, params.eta / params.rho);
    for (std::size_t i = 0; i < n; ++i) {
      dual.h[i] += params.gamma * (grad.h[i] - split.h[i]);
      dual.v[i] += params.gamma * (grad.v[i] - split.v[i]);
    }

    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = current[i] - observed[i];
      objective += 0.5 * d * d;
    }
    for (std::size_t i = 0; i < n; ++i) objective += params.eta * std::hypot(grad.h[i], grad.v[i]);
    result.objective.push_back(objective);
    if (objective < best_objective) {
      best_objective = objective;
      best = current;
    }
    result.iterations = iter;

    // Relative primal/dual residuals.
    GradientField primal{rows, cols, std::vector<double>(n), std::vector<double>(n)};
    GradientField dual_diff{rows, cols, std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
      primal.h[i] = grad.h[i] - split.h[i];
      primal.v[i] = grad.v[i] - split.v[i];
      dual_diff.h[i] = split.h[i] - prev_split.h[i];
      dual_diff.v[i] = split.v[i] - prev_split.v[i];
    }
    const double primal_scale = std::max({field_norm(grad), field_norm(split), 1e-12});
    const double r_rel = field_norm(primal) / primal_scale;
    GradientField scaled_dual = dual;
    for (std::size_t i = 0; i < n; ++i) {
      scaled_dual.h[i] *= params.rho;
      scaled_dual.v[i] *= params.rho;
    }
    const double dual_scale = std::max(vec_norm(adjoint_gradient(scaled_dual)), 1e-12);
    const double s_rel = params.rho * vec_norm(adjoint_gradient(dual_diff)) / dual_scale;
    if (std::max(r_rel, s_rel) < params.tol) {
      converged = true;
      break;
    }
  }

  result.converged = converged;
  std::vector<double>& chosen = converged ? current : best;
  for (double& v : chosen) v = std::clamp(v, 0.0, 1.0);
  result.image = Image::from_data(rows, cols, 1, std::move(chosen));
  return result;
}

}  // namespace mfusion
