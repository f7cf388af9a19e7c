// extern-C layer: opaque handles and status codes over the C++ core.
#include "mfusion/mfusion.h"

#include <algorithm>
#include <cstring>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "core/dictionary_io.hpp"
#include "core/dictionary_learning.hpp"
#include "core/fusion.hpp"
#include "core/image_io.hpp"
#include "core/metrics.hpp"
#include "core/patches.hpp"
#include "core/synth.hpp"

using mfusion::Errc;
using mfusion::Error;

struct mf_image {
  mfusion::Image img;
};

struct mf_dictionary {
  mfusion::DictionaryFile file;
};

struct mf_trainset {
  int patch_side = 0;
  std::vector<Eigen::VectorXd> focused;
  std::vector<Eigen::VectorXd> blurred;
};

namespace {

thread_local std::string g_last_error;

mf_status status_of(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return MF_ERR_INVALID_ARGUMENT;
    case Errc::io: return MF_ERR_IO;
    case Errc::format: return MF_ERR_FORMAT;
    case Errc::dimension: return MF_ERR_DIMENSION;
    case Errc::numeric: return MF_ERR_NUMERIC;
    case Errc::unsupported: return MF_ERR_UNSUPPORTED;
  }
  return MF_ERR_NUMERIC;
}

template <typename Fn>
mf_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return MF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return MF_ERR_NUMERIC;
  }
}

void check_handle(const void* p, const char* what) {
  mfusion::require(p != nullptr, Errc::invalid_argument, std::string(what) + " handle is null");
}

mf_image* wrap(mfusion::Image img) { return new mf_image{std::move(img)}; }

// Crops a rectangle of a grayscale view of `img`.
mfusion::Image crop_gray(const mfusion::Image& img, int row, int col, int height, int width) {
  mfusion::require(height >= 1 && width >= 1, Errc::invalid_argument, "empty crop rectangle");
  mfusion::require(row >= 0 && col >= 0 && row + height <= img.height() &&
                       col + width <= img.width(),
                   Errc::invalid_argument, "crop rectangle outside image");
  const mfusion::Image gray = mfusion::to_grayscale(img);
  mfusion::Image out(height, width, 1);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) out.at(0, r, c) = gray.at(0, row + r, col + c);
  }
  return out;
}

const mfusion::CoupledDictionary& pair_of(const mf_dictionary* dict) {
  mfusion::require(dict->file.pair.has_value(), Errc::unsupported,
                   "dictionary has no blurred half (single mode)");
  return *dict->file.pair;
}

}  // namespace

extern "C" {

const char* mf_status_name(mf_status status) {
  switch (status) {
    case MF_OK: return "ok";
    case MF_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MF_ERR_IO: return "i/o error";
    case MF_ERR_FORMAT: return "format error";
    case MF_ERR_DIMENSION: return "dimension mismatch";
    case MF_ERR_NUMERIC: return "numeric error";
    case MF_ERR_UNSUPPORTED: return "unsupported";
  }
  return "unknown";
}

const char* mf_last_error(void) { return g_last_error.c_str(); }

/* ---- images ------------------------------------------------------- */

mf_status mf_image_create(int32_t height, int32_t width, int32_t planes, const double* data,
                          mf_image** out) {
  return guarded([&] {
    check_handle(out, "out");
    if (data == nullptr) {
      *out = wrap(mfusion::Image(height, width, planes));
      return;
    }
    std::vector<double> copy(data, data + static_cast<std::size_t>(height) * width * planes);
    *out = wrap(mfusion::Image::from_data(height, width, planes, std::move(copy)));
  });
}

mf_status mf_image_clone(const mf_image* img, mf_image** out) {
  return guarded([&] {
    check_handle(img, "image");
    check_handle(out, "out");
    *out = wrap(img->img);
  });
}

void mf_image_free(mf_image* img) { delete img; }

int32_t mf_image_height(const mf_image* img) { return img ? img->img.height() : 0; }
int32_t mf_image_width(const mf_image* img) { return img ? img->img.width() : 0; }
int32_t mf_image_planes(const mf_image* img) { return img ? img->img.planes() : 0; }
const double* mf_image_data(const mf_image* img) { return img ? img->img.data().data() : nullptr; }

mf_status mf_image_load(const char* path, mf_image** out) {
  return guarded([&] {
    check_handle(path, "path");
    check_handle(out, "out");
    *out = wrap(mfusion::load_image(path));
  });
}

mf_status mf_image_save(const mf_image* img, const char* path) {
  return guarded([&] {
    check_handle(img, "image");
    check_handle(path, "path");
    mfusion::save_image(img->img, path);
  });
}

mf_status mf_image_to_grayscale(const mf_image* img, mf_image** out) {
  return guarded([&] {
    check_handle(img, "image");
    check_handle(out, "out");
    *out = wrap(mfusion::to_grayscale(img->img));
  });
}

mf_status mf_generate_multifocus(const mf_image* sharp, double blur_sigma, const mf_image* region,
                                 mf_image** out_a, mf_image** out_b, mf_image** out_truth) {
  return guarded([&] {
    check_handle(sharp, "sharp");
    check_handle(region, "region");
    mfusion::MultifocusPair made =
        mfusion::generate_multifocus(sharp->img, blur_sigma, region->img);
    if (out_a) *out_a = wrap(std::move(made.a));
    if (out_b) *out_b = wrap(std::move(made.b));
    if (out_truth) *out_truth = wrap(std::move(made.truth));
  });
}

/* ---- training set --------------------------------------------------- */

mf_status mf_trainset_create(int32_t patch_side, mf_trainset** out) {
  return guarded([&] {
    check_handle(out, "out");
    mfusion::require(patch_side >= 2, Errc::invalid_argument,
                     "training set: patch side must be >= 2");
    *out = new mf_trainset{patch_side, {}, {}};
  });
}

void mf_trainset_free(mf_trainset* ts) { delete ts; }

mf_status mf_trainset_add_region_pair(mf_trainset* ts, const mf_image* focused_img,
                                      int32_t focused_row, int32_t focused_col,
                                      const mf_image* blurred_img, int32_t blurred_row,
                                      int32_t blurred_col, int32_t height, int32_t width,
                                      int32_t stride) {
  return guarded([&] {
    check_handle(ts, "trainset");
    check_handle(focused_img, "focused image");
    check_handle(blurred_img, "blurred image");
    const int d = ts->patch_side;
    mfusion::require(stride >= 1 && stride <= d, Errc::invalid_argument,
                     "training set: stride must be in [1, patch side]");
    mfusion::require(height >= d && width >= d, Errc::invalid_argument,
                     "training set: rectangle smaller than patch");

    const mfusion::Image f = crop_gray(focused_img->img, focused_row, focused_col, height, width);
    const mfusion::Image b = crop_gray(blurred_img->img, blurred_row, blurred_col, height, width);
    const mfusion::PatchGrid fg = preprocess(extract_patches(f, d, d - stride));
    const mfusion::PatchGrid bg = preprocess(extract_patches(b, d, d - stride));
    for (int i = 0; i < fg.count(); ++i) {
      if (fg.degenerate[i] || bg.degenerate[i]) continue;
      ts->focused.push_back(fg.vectors.col(i));
      ts->blurred.push_back(bg.vectors.col(i));
    }
  });
}

int64_t mf_trainset_pair_count(const mf_trainset* ts) {
  return ts ? static_cast<int64_t>(ts->focused.size()) : 0;
}

mf_status mf_trainset_subsample(mf_trainset* ts, int64_t max_pairs, uint64_t seed) {
  return guarded([&] {
    check_handle(ts, "trainset");
    mfusion::require(max_pairs >= 1, Errc::invalid_argument, "subsample: max_pairs must be >= 1");
    const int64_t n = static_cast<int64_t>(ts->focused.size());
    if (n <= max_pairs) return;
    std::vector<int64_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(max_pairs);
    std::sort(order.begin(), order.end());  // keep the original pair ordering
    std::vector<Eigen::VectorXd> focused, blurred;
    focused.reserve(max_pairs);
    blurred.reserve(max_pairs);
    for (int64_t i : order) {
      focused.push_back(std::move(ts->focused[i]));
      blurred.push_back(std::move(ts->blurred[i]));
    }
    ts->focused = std::move(focused);
    ts->blurred = std::move(blurred);
  });
}

/* ---- dictionaries ---------------------------------------------------- */

mf_status mf_dict_learn(const mf_trainset* ts, int32_t atoms, int32_t cycles, double eps,
                        int32_t max_atoms, uint64_t seed, int32_t mode, mf_dictionary** out) {
  return guarded([&] {
    check_handle(ts, "trainset");
    check_handle(out, "out");
    mfusion::require(mode == MF_DICT_COUPLED || mode == MF_DICT_SEPARATE, Errc::invalid_argument,
                     "mf_dict_learn: mode must be coupled or separate");
    mfusion::require(!ts->focused.empty(), Errc::invalid_argument,
                     "mf_dict_learn: empty training set");

    const int dim = ts->patch_side * ts->patch_side;
    const int n = static_cast<int>(ts->focused.size());
    mfusion::TrainingSet set;
    set.focused.resize(dim, n);
    set.blurred.resize(dim, n);
    for (int i = 0; i < n; ++i) {
      set.focused.col(i) = ts->focused[i];
      set.blurred.col(i) = ts->blurred[i];
    }

    mfusion::LearnOptions opts;
    opts.atom_count = atoms;
    opts.cycles = cycles;
    opts.eps = eps;
    opts.max_atoms = max_atoms;
    opts.seed = seed;

    mfusion::CoupledDictionary learned = mode == MF_DICT_COUPLED
                                             ? mfusion::coupled_learn(set, opts)
                                             : mfusion::learn_separate(set, opts);
    learned.validate();
    mfusion::DictionaryFile file;
    file.mode = mode == MF_DICT_COUPLED ? mfusion::kDictModeCoupled : mfusion::kDictModeSeparate;
    file.pair = std::move(learned);
    *out = new mf_dictionary{std::move(file)};
  });
}

void mf_dict_free(mf_dictionary* dict) { delete dict; }

int32_t mf_dict_dim(const mf_dictionary* dict) {
  if (!dict) return 0;
  return dict->file.pair ? dict->file.pair->dim() : dict->file.single->dim();
}

int32_t mf_dict_atoms(const mf_dictionary* dict) {
  if (!dict) return 0;
  return dict->file.pair ? dict->file.pair->atom_count() : dict->file.single->atom_count();
}

int32_t mf_dict_mode(const mf_dictionary* dict) {
  return dict ? static_cast<int32_t>(dict->file.mode) : -1;
}

mf_status mf_dict_save(const mf_dictionary* dict, const char* path) {
  return guarded([&] {
    check_handle(dict, "dictionary");
    check_handle(path, "path");
    if (dict->file.pair) {
      mfusion::save_dictionary(path, *dict->file.pair);
    } else {
      mfusion::save_dictionary(path, *dict->file.single);
    }
  });
}

mf_status mf_dict_load(const char* path, mf_dictionary** out) {
  return guarded([&] {
    check_handle(path, "path");
    check_handle(out, "out");
    *out = new mf_dictionary{mfusion::load_dictionary(path)};
  });
}

/* ---- fusion ----------------------------------------------------------- */

void mf_fuse_params_init(mf_fuse_params* params) {
  if (!params) return;
  params->patch_side = 8;
  params->overlap = 7;
  params->omega = 0.54;
  params->eps = 0.1;
  params->max_atoms = 16;
  params->tv_enabled = 0;
  params->tv_eta = 1e-5;
  params->tv_rho = 1.0;
  params->tv_gamma = 1.0;
  params->tv_max_iters = 200;
  params->tv_tol = 1e-6;
}

mf_status mf_fuse(const mf_image* const* sources, int32_t count, const mf_dictionary* dict,
                  const mf_fuse_params* params, mf_image** out_fused, mf_image** out_mask,
                  int32_t* out_tv_converged) {
  return guarded([&] {
    check_handle(sources, "sources");
    check_handle(dict, "dictionary");
    check_handle(params, "params");
    check_handle(out_fused, "out_fused");
    mfusion::require(count >= 2, Errc::invalid_argument, "mf_fuse: need at least two sources");

    std::vector<mfusion::Image> imgs;
    imgs.reserve(count);
    for (int32_t k = 0; k < count; ++k) {
      check_handle(sources[k], "source");
      imgs.push_back(sources[k]->img);
    }

    mfusion::FusionConfig cfg;
    cfg.patch_side = params->patch_side;
    cfg.overlap = params->overlap;
    cfg.omega = params->omega;
    cfg.eps = params->eps;
    cfg.max_atoms = params->max_atoms;
    cfg.tv_enabled = params->tv_enabled != 0;
    cfg.tv.eta = params->tv_eta;
    cfg.tv.rho = params->tv_rho;
    cfg.tv.gamma = params->tv_gamma;
    cfg.tv.max_iters = params->tv_max_iters;
    cfg.tv.tol = params->tv_tol;

    mfusion::FusionResult result = mfusion::fuse_images(imgs, pair_of(dict), cfg);
    if (out_mask) {
      *out_mask = wrap(mfusion::render_mask(result.mask, imgs[0].height(), imgs[0].width()));
    }
    if (out_tv_converged) *out_tv_converged = result.tv_converged ? 1 : 0;
    *out_fused = wrap(std::move(result.fused));
  });
}

/* ---- metrics ----------------------------------------------------------- */

mf_status mf_metric_mse(const mf_image* ref, const mf_image* img, double* out) {
  return guarded([&] {
    check_handle(ref, "ref");
    check_handle(img, "image");
    check_handle(out, "out");
    *out = mfusion::mse(ref->img, img->img);
  });
}

mf_status mf_metric_ssim(const mf_image* ref, const mf_image* img, double* out) {
  return guarded([&] {
    check_handle(ref, "ref");
    check_handle(img, "image");
    check_handle(out, "out");
    *out = mfusion::ssim(ref->img, img->img);
  });
}

mf_status mf_metric_nmi(const mf_image* src_a, const mf_image* src_b, const mf_image* fused,
                        double* out) {
  return guarded([&] {
    check_handle(src_a, "src_a");
    check_handle(src_b, "src_b");
    check_handle(fused, "fused");
    check_handle(out, "out");
    *out = mfusion::nmi(src_a->img, src_b->img, fused->img);
  });
}

mf_status mf_metric_qabf(const mf_image* src_a, const mf_image* src_b, const mf_image* fused,
                         double* out) {
  return guarded([&] {
    check_handle(src_a, "src_a");
    check_handle(src_b, "src_b");
    check_handle(fused, "fused");
    check_handle(out, "out");
    *out = mfusion::qabf(src_a->img, src_b->img, fused->img);
  });
}

} /* extern "C" */
