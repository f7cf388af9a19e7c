#include "core/patches.hpp"

#include <cmath>

namespace mfusion {

namespace {

constexpr double kDegenerateNorm = 1e-12;

std::vector<int> axis_anchors(int extent, int patch_side, int stride) {
  std::vector<int> anchors;
  const int last = extent - patch_side;
  for (int a = 0; a <= last; a += stride) anchors.push_back(a);
  if (anchors.back() != last) anchors.push_back(last);  // clamp to the border
  return anchors;
}

}  // namespace

std::vector<std::pair<int, int>> PatchGrid::anchors() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(count());
  for (int r : anchor_rows) {
    for (int c : anchor_cols) out.emplace_back(r, c);
  }
  return out;
}

int anchor_count(int extent, int patch_side, int stride) {
  const int last = extent - patch_side;
  int n = last / stride + 1;
  if (last % stride != 0) ++n;
  return n;
}

PatchGrid extract_patches(const Image& img, int patch_side, int overlap) {
  require(img.planes() == 1, Errc::invalid_argument, "extract_patches: 1-plane image required");
  require(patch_side >= 1, Errc::invalid_argument, "extract_patches: patch side must be >= 1");
  require(patch_side <= std::min(img.height(), img.width()), Errc::invalid_argument,
          "extract_patches: patch side exceeds image size");
  require(overlap >= 0 && overlap < patch_side, Errc::invalid_argument,
          "extract_patches: overlap must satisfy 0 <= overlap < patch side");

  PatchGrid grid;
  grid.patch_side = patch_side;
  grid.stride = patch_side - overlap;
  grid.image_height = img.height();
  grid.image_width = img.width();
  grid.anchor_rows = axis_anchors(img.height(), patch_side, grid.stride);
  grid.anchor_cols = axis_anchors(img.width(), patch_side, grid.stride);

  const int d = patch_side;
  grid.vectors.resize(d * d, grid.count());
  const double* src = img.plane_data(0);
  int index = 0;
  for (int ar : grid.anchor_rows) {
    for (int ac : grid.anchor_cols) {
      double* dst = grid.vectors.col(index).data();
      for (int j = 0; j < d; ++j) {
        for (int i = 0; i < d; ++i) {
          dst[j * d + i] = src[static_cast<std::size_t>(ar + i) * img.width() + (ac + j)];
        }
      }
      ++index;
    }
  }
  return grid;
}

PatchGrid preprocess(PatchGrid grid) {
  require(grid.count() > 0, Errc::invalid_argument, "preprocess: empty grid");
  const int n = grid.count();
  grid.means.resize(n);
  grid.norms.resize(n);
  grid.degenerate.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    auto col = grid.vectors.col(i);
    const double mean = col.mean();
    col.array() -= mean;
    const double norm = col.norm();
    grid.means[i] = mean;
    grid.norms[i] = norm;
    if (norm < kDegenerateNorm) {
      col.setZero();
      grid.degenerate[i] = 1;
    } else {
      col /= norm;
    }
  }
  grid.preprocessed = true;
  return grid;
}

Image reconstruct_overlap_average(const std::vector<std::pair<int, int>>& anchors,
                                  const Eigen::MatrixXd& patches, int height, int width) {
  require(static_cast<int>(anchors.size()) == patches.cols(), Errc::dimension,
          "reconstruct: anchor/patch count mismatch");
  require(patches.cols() > 0, Errc::invalid_argument, "reconstruct: no patches");
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(patches.rows()))));
  require(d * d == patches.rows(), Errc::dimension, "reconstruct: patch length is not square");

  Image out(height, width, 1);
  std::vector<double> sum(static_cast<std::size_t>(height) * width, 0.0);
  std::vector<std::uint32_t> hits(sum.size(), 0);

  for (int p = 0; p < patches.cols(); ++p) {
    const auto [ar, ac] = anchors[p];
    require(ar >= 0 && ac >= 0 && ar + d <= height && ac + d <= width, Errc::invalid_argument,
            "reconstruct: patch exceeds canvas");
    const double* v = patches.col(p).data();
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) {
        const std::size_t idx = static_cast<std::size_t>(ar + i) * width + (ac + j);
        sum[idx] += v[j * d + i];
        ++hits[idx];
      }
    }
  }

  double* dst = out.plane_data(0);
  for (std::size_t idx = 0; idx < sum.size(); ++idx) {
    require(hits[idx] > 0, Errc::invalid_argument, "reconstruct: uncovered pixel");
    dst[idx] = std::clamp(sum[idx] / hits[idx], 0.0, 1.0);
  }
  return out;
}

double patch_variance(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double mean = v.mean();
  return (v.array() - mean).square().sum() / static_cast<double>(v.size());
}

}  // namespace mfusion
