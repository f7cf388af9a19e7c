#include "core/synth.hpp"

#include <cmath>
#include <vector>

namespace mfusion {

namespace {

// Symmetric reflection: ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
int reflect(int i, int n) {
  while (i < 0 || i >= n) {
    if (i < 0) i = -i - 1;
    if (i >= n) i = 2 * n - i - 1;
  }
  return i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(2 * radius + 1);
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    total += k[i + radius];
  }
  for (double& v : k) v /= total;
  return k;
}

}  // namespace

Image gaussian_blur(const Image& img, double sigma) {
  require(!img.empty(), Errc::invalid_argument, "gaussian_blur: empty image");
  require(sigma > 0.0, Errc::invalid_argument, "gaussian_blur: sigma must be positive");

  const auto k = gaussian_kernel(sigma);
  const int radius = static_cast<int>(k.size() / 2);
  const int h = img.height(), w = img.width();

  Image out(h, w, img.planes());
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
  for (int p = 0; p < img.planes(); ++p) {
    const double* src = img.plane_data(p);
    // horizontal pass
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          acc += k[t + radius] * src[static_cast<std::size_t>(r) * w + reflect(c + t, w)];
        }
        tmp[static_cast<std::size_t>(r) * w + c] = acc;
      }
    }
    // vertical pass
    double* dst = out.plane_data(p);
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          acc += k[t + radius] * tmp[static_cast<std::size_t>(reflect(r + t, h)) * w + c];
        }
        dst[static_cast<std::size_t>(r) * w + c] = std::clamp(acc, 0.0, 1.0);
      }
    }
  }
  return out;
}

MultifocusPair generate_multifocus(const Image& sharp, double blur_sigma, const Image& region) {
  require(!sharp.empty(), Errc::invalid_argument, "generate_multifocus: empty image");
  require(blur_sigma > 0.0, Errc::invalid_argument, "generate_multifocus: sigma must be positive");
  require(region.planes() == 1, Errc::invalid_argument, "generate_multifocus: region must be 1-plane");
  require(region.height() == sharp.height() && region.width() == sharp.width(), Errc::dimension,
          "generate_multifocus: region shape mismatch");

  const Image blurred = gaussian_blur(sharp, blur_sigma);
  MultifocusPair out{Image(sharp.height(), sharp.width(), sharp.planes()),
                     Image(sharp.height(), sharp.width(), sharp.planes()), region};

  const double* mask = region.plane_data(0);
  const std::size_t n = static_cast<std::size_t>(sharp.height()) * sharp.width();
  for (int p = 0; p < sharp.planes(); ++p) {
    const double* s = sharp.plane_data(p);
    const double* bl = blurred.plane_data(p);
    double* a = out.a.plane_data(p);
    double* b = out.b.plane_data(p);
    for (std::size_t i = 0; i < n; ++i) {
      const bool inside = mask[i] >= 0.5;
      a[i] = inside ? s[i] : bl[i];
      b[i] = inside ? bl[i] : s[i];
    }
  }
  return out;
}

}  // namespace mfusion
