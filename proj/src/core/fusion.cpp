#include "core/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "core/parallel.hpp"
#include "core/patches.hpp"

namespace mfusion {

namespace {

int argmax_lowest(const std::vector<double>& values) {
  int best = 0;
  for (int k = 1; k < static_cast<int>(values.size()); ++k) {
    if (values[k] > values[best]) best = k;
  }
  return best;
}

// Nearest lattice entry to pixel coordinate `x` given window centers at
// anchor + (d-1)/2; ties resolve to the lower index.
int nearest_anchor_index(const std::vector<int>& lattice, double center_offset, int x) {
  const double target = x - center_offset;
  auto it = std::lower_bound(lattice.begin(), lattice.end(), target);
  if (it == lattice.begin()) return 0;
  if (it == lattice.end()) return static_cast<int>(lattice.size()) - 1;
  const int hi = static_cast<int>(it - lattice.begin());
  const int lo = hi - 1;
  return (target - lattice[lo]) <= (lattice[hi] - target) ? lo : hi;
}

}  // namespace

void FusionConfig::validate() const {
  require(patch_side >= 1, Errc::invalid_argument, "fusion: patch side must be >= 1");
  require(overlap >= 0 && overlap < patch_side, Errc::invalid_argument,
          "fusion: overlap must satisfy 0 <= overlap < patch side");
  require(omega >= 0.5 && omega < 1.0, Errc::invalid_argument, "fusion: omega outside [0.5, 1)");
  require(eps > 0.0, Errc::invalid_argument, "fusion: eps must be positive");
  require(max_atoms >= 1, Errc::invalid_argument, "fusion: max_atoms must be >= 1");
  if (tv_enabled) tv.validate();
}

SelectionResult select(const std::vector<SparseCode>& codes, double omega) {
  require(codes.size() >= 2, Errc::invalid_argument, "select: need at least two codes");
  require(omega >= 0.5 && omega < 1.0, Errc::invalid_argument, "select: omega outside [0.5, 1)");
  const int length = codes[0].length;
  require(length > 0 && length % 2 == 0, Errc::invalid_argument,
          "select: codes must cover a coupled dictionary (even length)");
  for (const SparseCode& code : codes) {
    require(code.length == length, Errc::dimension, "select: mismatched code lengths");
  }

  const int half = length / 2;
  SelectionResult out;
  out.scores.resize(codes.size());
  for (std::size_t k = 0; k < codes.size(); ++k) {
    out.scores[k] =
        omega * codes[k].segment_l1(0, half) + (1.0 - omega) * codes[k].segment_l1(half, length);
  }
  out.winner = argmax_lowest(out.scores);
  return out;
}

Eigen::VectorXd apply_mask(int winner, const Eigen::MatrixXd& patches) {
  require(winner >= 0 && winner < patches.cols(), Errc::invalid_argument,
          "apply_mask: winner index out of range");
  return patches.col(winner);
}

FusionResult fuse_images(const std::vector<Image>& sources, const CoupledDictionary& dict,
                         const FusionConfig& cfg) {
  cfg.validate();
  dict.validate();
  const int K = static_cast<int>(sources.size());
  require(K >= 2, Errc::invalid_argument, "fuse_images: need at least two sources");
  for (const Image& img : sources) {
    require(img.same_shape(sources[0]), Errc::dimension, "fuse_images: source shape mismatch");
  }
  const int d = cfg.patch_side;
  require(dict.dim() == d * d, Errc::dimension,
          "fuse_images: dictionary dim does not match patch size");

  // Selection always runs on the grayscale versions.
  std::vector<PatchGrid> grids;
  grids.reserve(K);
  for (const Image& img : sources) {
    grids.push_back(preprocess(extract_patches(to_grayscale(img), d, cfg.overlap)));
  }

  const Dictionary joint = dict.concat();
  std::vector<std::vector<SparseCode>> codes(K);
  for (int k = 0; k < K; ++k) {
    codes[k] = batch_encode(grids[k], joint, cfg.eps, cfg.max_atoms);
  }

  const int positions = grids[0].count();
  DecisionMask mask;
  mask.grid_rows = grids[0].grid_rows();
  mask.grid_cols = grids[0].grid_cols();
  mask.source_count = K;
  mask.patch_side = d;
  mask.anchor_rows = grids[0].anchor_rows;
  mask.anchor_cols = grids[0].anchor_cols;
  mask.winner.assign(positions, 0);
  mask.scores.assign(static_cast<std::size_t>(positions) * K, 0.0);
  mask.degenerate.assign(positions, 0);

  parallel_for(0, positions, [&](std::ptrdiff_t p) {
    std::vector<SparseCode> at_position(K);
    bool all_zero = true;
    for (int k = 0; k < K; ++k) {
      at_position[k] = codes[k][p];
      all_zero = all_zero && at_position[k].empty();
    }
    std::vector<double> scores(K);
    int winner;
    if (all_zero) {
      // No sparse evidence anywhere: pick the source whose raw patch has
      // the largest variance (recoverable from the preprocess metadata).
      for (int k = 0; k < K; ++k) {
        const double norm = grids[k].norms[p];
        scores[k] = norm * norm / static_cast<double>(d * d);
      }
      winner = argmax_lowest(scores);
      mask.degenerate[p] = 1;
    } else {
      SelectionResult sel = select(at_position, cfg.omega);
      scores = std::move(sel.scores);
      winner = sel.winner;
    }
    mask.winner[p] = winner;
    for (int k = 0; k < K; ++k) mask.scores[static_cast<std::size_t>(p) * K + k] = scores[k];
  });

  // Copy the winning raw patches per plane and average the overlaps.
  const auto anchors = grids[0].anchors();
  const int height = sources[0].height();
  const int width = sources[0].width();
  const int planes = sources[0].planes();
  FusionResult result;
  result.fused = Image(height, width, planes);
  for (int plane = 0; plane < planes; ++plane) {
    Eigen::MatrixXd chosen(d * d, positions);
    for (int p = 0; p < positions; ++p) {
      const auto [ar, ac] = anchors[p];
      Eigen::MatrixXd candidates(d * d, K);
      for (int k = 0; k < K; ++k) {
        const double* src = sources[k].plane_data(plane);
        for (int j = 0; j < d; ++j) {
          for (int i = 0; i < d; ++i) {
            candidates(j * d + i, k) = src[static_cast<std::size_t>(ar + i) * width + (ac + j)];
          }
        }
      }
      chosen.col(p) = apply_mask(mask.winner[p], candidates);
    }
    const Image plane_img = reconstruct_overlap_average(anchors, chosen, height, width);
    std::copy(plane_img.plane_data(0), plane_img.plane_data(0) + plane_img.pixel_count(),
              result.fused.plane_data(plane));
  }

  if (cfg.tv_enabled) {
    Image refined(height, width, planes);
    bool converged = true;
    for (int plane = 0; plane < planes; ++plane) {
      Image single(height, width, 1);
      std::copy(result.fused.plane_data(plane),
                result.fused.plane_data(plane) + single.pixel_count(), single.plane_data(0));
      TvResult tv = tv_admm(single, cfg.tv);
      converged = converged && tv.converged;
      std::copy(tv.image.plane_data(0), tv.image.plane_data(0) + single.pixel_count(),
                refined.plane_data(plane));
    }
    result.fused = std::move(refined);
    result.tv_converged = converged;
  }

  result.mask = std::move(mask);
  return result;
}

Image render_mask(const DecisionMask& mask, int height, int width) {
  require(mask.count() > 0, Errc::invalid_argument, "render_mask: empty mask");
  require(mask.source_count >= 2, Errc::invalid_argument, "render_mask: need >= 2 sources");
  const double level = std::floor(255.0 / (mask.source_count - 1)) / 255.0;
  const double center_offset = (mask.patch_side - 1) / 2.0;

  Image out(height, width, 1);
  double* dst = out.plane_data(0);
  for (int r = 0; r < height; ++r) {
    const int gr = nearest_anchor_index(mask.anchor_rows, center_offset, r);
    for (int c = 0; c < width; ++c) {
      const int gc = nearest_anchor_index(mask.anchor_cols, center_offset, c);
      const int winner = mask.winner[static_cast<std::size_t>(gr) * mask.grid_cols + gc];
      dst[static_cast<std::size_t>(r) * width + c] = std::clamp(winner * level, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace mfusion
