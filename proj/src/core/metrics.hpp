#pragma once

#include <optional>

#include "core/image.hpp"

namespace mfusion {

struct MetricReport {
  double nmi = 0.0;
  double qabf = 0.0;
  std::optional<double> ssim;  // present only when a reference was supplied
  std::optional<double> mse;
};

/// Mean squared error on the 0–255 intensity scale, averaged over all
/// pixels and planes.
double mse(const Image& ref, const Image& img);

/// Mean of local SSIM over sliding window×window patches (uniform window),
/// computed on the 0–255 scale. Inputs must be 1-plane and same shape.
double ssim(const Image& ref, const Image& img, int window = 8, double k1 = 0.01,
            double k2 = 0.03, double luminance_range = 255.0);

/// Fusion mutual information, normalized per source:
///   2·[ MI(A;F)/(H(A)+H(F)) + MI(B;F)/(H(B)+H(F)) ]
/// with Shannon entropies from `bins`-bin joint histograms. Equals 2 when
/// F = A = B (non-constant). Inputs must be 1-plane and same shape.
double nmi(const Image& src_a, const Image& src_b, const Image& fused, int bins = 256);

/// Edge-preservation score: Sobel gradient strength/orientation fidelity
/// mapped through sigmoids and weighted by source edge strength. Each
/// sigmoid is normalized so perfect preservation scores exactly 1. Ranges
/// over [0,1]; defined as 0 (with *degenerate set) when both sources have
/// no gradient anywhere.
double qabf(const Image& src_a, const Image& src_b, const Image& fused,
            bool* degenerate = nullptr);

}  // namespace mfusion
