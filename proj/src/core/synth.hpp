#pragma once

#include "core/image.hpp"

namespace mfusion {

/// Separable Gaussian blur, kernel truncated at 3σ, symmetric reflection at
/// the borders. Works per plane.
Image gaussian_blur(const Image& img, double sigma);

struct MultifocusPair {
  Image a;      // sharp inside the region, blurred outside
  Image b;      // complementary
  Image truth;  // copy of the binary region mask
};

/// Builds a synthetic multi-focus pair from an all-in-focus image. `region`
/// is a 1-plane H×W mask (values >= 0.5 count as inside). Pixels of `a`
/// inside the region are copied bit-identically from `sharp`.
MultifocusPair generate_multifocus(const Image& sharp, double blur_sigma, const Image& region);

}  // namespace mfusion
