#pragma once

#include <vector>

#include "core/error.hpp"

namespace mfusion {

/// Intensity image with values in [0,1]. Storage is plane-major with
/// row-major planes: data[p*H*W + r*W + c]. planes is 1 (gray) or 3 (RGB).
class Image {
 public:
  Image() = default;
  Image(int height, int width, int planes = 1);

  /// Wraps caller-supplied samples; rejects non-finite or out-of-range values.
  static Image from_data(int height, int width, int planes, std::vector<double> data);

  int height() const { return height_; }
  int width() const { return width_; }
  int planes() const { return planes_; }
  std::size_t pixel_count() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int plane, int row, int col) {
    return data_[static_cast<std::size_t>(plane) * height_ * width_ +
                 static_cast<std::size_t>(row) * width_ + col];
  }
  double at(int plane, int row, int col) const {
    return data_[static_cast<std::size_t>(plane) * height_ * width_ +
                 static_cast<std::size_t>(row) * width_ + col];
  }

  double* plane_data(int plane) {
    return data_.data() + static_cast<std::size_t>(plane) * height_ * width_;
  }
  const double* plane_data(int plane) const {
    return data_.data() + static_cast<std::size_t>(plane) * height_ * width_;
  }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& other) const {
    return height_ == other.height_ && width_ == other.width_ && planes_ == other.planes_;
  }

  /// Clamps every sample into [0,1].
  void clip();

 private:
  int height_ = 0;
  int width_ = 0;
  int planes_ = 0;
  std::vector<double> data_;
};

/// ITU-R BT.601 luma (0.299 R + 0.587 G + 0.114 B). 1-plane input is copied.
Image to_grayscale(const Image& img);

}  // namespace mfusion
