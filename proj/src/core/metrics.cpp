#include "core/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace mfusion {

namespace {

void check_same_shape(const Image& a, const Image& b, const char* op) {
  require(a.same_shape(b), Errc::dimension, std::string(op) + ": shape mismatch");
}

void check_gray(const Image& img, const char* op) {
  require(img.planes() == 1, Errc::invalid_argument, std::string(op) + ": 1-plane image required");
}

// 256-level quantization consistent with 8-bit file output.
int bin_of(double v, int bins) {
  const int b = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * (bins - 1)));
  return std::clamp(b, 0, bins - 1);
}

double entropy(const std::vector<double>& p) {
  double h = 0.0;
  for (double q : p) {
    if (q > 0.0) h -= q * std::log2(q);
  }
  return h;
}

// Mutual information and marginal entropies from a joint histogram.
struct PairInfo {
  double mi;
  double hx;
  double hy;
};

PairInfo mutual_information(const Image& x, const Image& y, int bins) {
  std::vector<double> joint(static_cast<std::size_t>(bins) * bins, 0.0);
  const double* px = x.plane_data(0);
  const double* py = y.plane_data(0);
  const std::size_t n = x.pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(bin_of(px[i], bins)) * bins + bin_of(py[i], bins)] += 1.0;
  }
  for (double& v : joint) v /= static_cast<double>(n);

  std::vector<double> mx(bins, 0.0), my(bins, 0.0);
  for (int a = 0; a < bins; ++a) {
    for (int b = 0; b < bins; ++b) {
      mx[a] += joint[static_cast<std::size_t>(a) * bins + b];
      my[b] += joint[static_cast<std::size_t>(a) * bins + b];
    }
  }
  PairInfo out{};
  out.hx = entropy(mx);
  out.hy = entropy(my);
  out.mi = out.hx + out.hy - entropy(joint);
  return out;
}

struct SobelField {
  std::vector<double> magnitude;
  std::vector<double> orientation;  // atan(gy/gx) in (-pi/2, pi/2]
};

SobelField sobel(const Image& img) {
  const int h = img.height(), w = img.width();
  const double* src = img.plane_data(0);
  auto sample = [&](int r, int c) {
    r = std::clamp(r, 0, h - 1);
    c = std::clamp(c, 0, w - 1);
    return src[static_cast<std::size_t>(r) * w + c];
  };

  SobelField out;
  out.magnitude.resize(static_cast<std::size_t>(h) * w);
  out.orientation.resize(out.magnitude.size());
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double gx = sample(r - 1, c + 1) + 2.0 * sample(r, c + 1) + sample(r + 1, c + 1) -
                        sample(r - 1, c - 1) - 2.0 * sample(r, c - 1) - sample(r + 1, c - 1);
      const double gy = sample(r + 1, c - 1) + 2.0 * sample(r + 1, c) + sample(r + 1, c + 1) -
                        sample(r - 1, c - 1) - 2.0 * sample(r - 1, c) - sample(r - 1, c + 1);
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      out.magnitude[i] = std::hypot(gx, gy);
      if (gx == 0.0) {
        out.orientation[i] = gy == 0.0 ? 0.0 : std::numbers::pi / 2.0;
      } else {
        out.orientation[i] = std::atan(gy / gx);
      }
    }
  }
  return out;
}

// Edge-strength / orientation preservation sigmoids (Xydeas–Petrović
// constants), normalized so a perfectly preserved edge scores 1.
double preservation(double g_src, double g_fused, double th_src, double th_fused) {
  constexpr double kGammaG = 0.9994, kKappaG = -15.0, kSigmaG = 0.5;
  constexpr double kGammaA = 0.9879, kKappaA = -22.0, kSigmaA = 0.8;

  double strength_ratio;
  if (g_src == 0.0 && g_fused == 0.0) {
    strength_ratio = 1.0;
  } else {
    strength_ratio = std::min(g_src, g_fused) / std::max(g_src, g_fused);
  }
  const double angle = 1.0 - std::abs(th_src - th_fused) / (std::numbers::pi / 2.0);

  const double qg = kGammaG / (1.0 + std::exp(kKappaG * (strength_ratio - kSigmaG)));
  const double qa = kGammaA / (1.0 + std::exp(kKappaA * (angle - kSigmaA)));
  const double qg_perfect = kGammaG / (1.0 + std::exp(kKappaG * (1.0 - kSigmaG)));
  const double qa_perfect = kGammaA / (1.0 + std::exp(kKappaA * (1.0 - kSigmaA)));
  return std::clamp((qg / qg_perfect) * (qa / qa_perfect), 0.0, 1.0);
}

}  // namespace

double mse(const Image& ref, const Image& img) {
  check_same_shape(ref, img, "mse");
  const std::size_t n = ref.data().size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = 255.0 * (ref.data()[i] - img.data()[i]);
    total += d * d;
  }
  return total / static_cast<double>(n);
}

double ssim(const Image& ref, const Image& img, int window, double k1, double k2,
            double luminance_range) {
  check_same_shape(ref, img, "ssim");
  check_gray(ref, "ssim");
  check_gray(img, "ssim");
  require(window >= 1 && window <= std::min(ref.height(), ref.width()), Errc::invalid_argument,
          "ssim: window exceeds image size");

  const double c1 = (k1 * luminance_range) * (k1 * luminance_range);
  const double c2 = (k2 * luminance_range) * (k2 * luminance_range);
  const int h = ref.height(), w = ref.width();
  const double* x = ref.plane_data(0);
  const double* y = img.plane_data(0);

  // Integral images over x, y, x², y², xy (0–255 scale).
  const int iw = w + 1;
  std::vector<double> sx((h + 1) * iw, 0.0), sy(sx.size(), 0.0), sxx(sx.size(), 0.0),
      syy(sx.size(), 0.0), sxy(sx.size(), 0.0);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const std::size_t i = static_cast<std::size_t>(r) * w + c;
      const double xv = 255.0 * x[i], yv = 255.0 * y[i];
      const std::size_t t = static_cast<std::size_t>(r + 1) * iw + (c + 1);
      const std::size_t up = t - iw, left = t - 1, diag = up - 1;
      sx[t] = xv + sx[up] + sx[left] - sx[diag];
      sy[t] = yv + sy[up] + sy[left] - sy[diag];
      sxx[t] = xv * xv + sxx[up] + sxx[left] - sxx[diag];
      syy[t] = yv * yv + syy[up] + syy[left] - syy[diag];
      sxy[t] = xv * yv + sxy[up] + sxy[left] - sxy[diag];
    }
  }
  auto box = [&](const std::vector<double>& s, int r, int c) {
    const std::size_t t0 = static_cast<std::size_t>(r) * iw + c;
    const std::size_t t1 = static_cast<std::size_t>(r + window) * iw + (c + window);
    return s[t1] - s[static_cast<std::size_t>(r) * iw + (c + window)] -
           s[static_cast<std::size_t>(r + window) * iw + c] + s[t0];
  };

  const double inv_area = 1.0 / (static_cast<double>(window) * window);
  double total = 0.0;
  std::size_t count = 0;
  for (int r = 0; r + window <= h; ++r) {
    for (int c = 0; c + window <= w; ++c) {
      const double mx = box(sx, r, c) * inv_area;
      const double my = box(sy, r, c) * inv_area;
      const double vx = box(sxx, r, c) * inv_area - mx * mx;
      const double vy = box(syy, r, c) * inv_area - my * my;
      const double cov = box(sxy, r, c) * inv_area - mx * my;
      const double value = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                           ((mx * mx + my * my + c1) * (vx + vy + c2));
      total += value;
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

double nmi(const Image& src_a, const Image& src_b, const Image& fused, int bins) {
  check_same_shape(src_a, fused, "nmi");
  check_same_shape(src_b, fused, "nmi");
  check_gray(src_a, "nmi");
  check_gray(src_b, "nmi");
  check_gray(fused, "nmi");
  require(bins >= 2, Errc::invalid_argument, "nmi: bins must be >= 2");

  const PairInfo af = mutual_information(src_a, fused, bins);
  const PairInfo bf = mutual_information(src_b, fused, bins);
  const double term_a = af.hx + af.hy > 0.0 ? af.mi / (af.hx + af.hy) : 0.0;
  const double term_b = bf.hx + bf.hy > 0.0 ? bf.mi / (bf.hx + bf.hy) : 0.0;
  return 2.0 * (term_a + term_b);
}

double qabf(const Image& src_a, const Image& src_b, const Image& fused, bool* degenerate) {
  check_same_shape(src_a, fused, "qabf");
  check_same_shape(src_b, fused, "qabf");
  check_gray(src_a, "qabf");
  check_gray(src_b, "qabf");
  check_gray(fused, "qabf");

  const SobelField fa = sobel(src_a);
  const SobelField fb = sobel(src_b);
  const SobelField ff = sobel(fused);

  double weighted = 0.0, weight = 0.0;
  for (std::size_t i = 0; i < fa.magnitude.size(); ++i) {
    const double qaf = preservation(fa.magnitude[i], ff.magnitude[i], fa.orientation[i],
                                    ff.orientation[i]);
    const double qbf = preservation(fb.magnitude[i], ff.magnitude[i], fb.orientation[i],
                                    ff.orientation[i]);
    weighted += qaf * fa.magnitude[i] + qbf * fb.magnitude[i];
    weight += fa.magnitude[i] + fb.magnitude[i];
  }
  if (degenerate) *degenerate = weight == 0.0;
  if (weight == 0.0) return 0.0;
  return std::clamp(weighted / weight, 0.0, 1.0);
}

}  // namespace mfusion
