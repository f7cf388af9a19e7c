#include "core/image.hpp"

#include <algorithm>
#include <cmath>

namespace mfusion {

Image::Image(int height, int width, int planes) {
  require(height >= 1 && width >= 1, Errc::invalid_argument, "image dimensions must be positive");
  require(planes == 1 || planes == 3, Errc::invalid_argument, "image must have 1 or 3 planes");
  height_ = height;
  width_ = width;
  planes_ = planes;
  data_.assign(static_cast<std::size_t>(height) * width * planes, 0.0);
}

Image Image::from_data(int height, int width, int planes, std::vector<double> data) {
  Image img(height, width, planes);
  require(data.size() == img.data_.size(), Errc::dimension, "image data size mismatch");
  for (double v : data) {
    require(std::isfinite(v), Errc::numeric, "image sample is not finite");
    require(v >= 0.0 && v <= 1.0, Errc::invalid_argument, "image sample outside [0,1]");
  }
  img.data_ = std::move(data);
  return img;
}

void Image::clip() {
  for (double& v : data_) v = std::clamp(v, 0.0, 1.0);
}

Image to_grayscale(const Image& img) {
  require(!img.empty(), Errc::invalid_argument, "to_grayscale: empty image");
  if (img.planes() == 1) return img;

  Image gray(img.height(), img.width(), 1);
  const double* r = img.plane_data(0);
  const double* g = img.plane_data(1);
  const double* b = img.plane_data(2);
  double* out = gray.plane_data(0);
  const std::size_t n = static_cast<std::size_t>(img.height()) * img.width();
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::clamp(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i], 0.0, 1.0);
  }
  return gray;
}

}  // namespace mfusion
