/* mfusion — multi-focus image fusion via sparse coding over a coupled
 * focused/blurred dictionary.
 *
 * C API of the shared library. All objects are opaque handles created and
 * destroyed by the library; every fallible call returns an mf_status and
 * leaves a human-readable detail string in mf_last_error() (thread-local).
 * Out-parameters are written only on MF_OK.
 */
#ifndef MFUSION_H
#define MFUSION_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define MF_API __declspec(dllexport)
#elif defined(MF_BUILDING_LIBRARY)
#  define MF_API __attribute__((visibility("default")))
#else
#  define MF_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_INVALID_ARGUMENT = 1, /* value outside the documented domain */
  MF_ERR_IO = 2,               /* filesystem failure */
  MF_ERR_FORMAT = 3,           /* malformed or corrupt file (bad magic, CRC, ...) */
  MF_ERR_DIMENSION = 4,        /* operand shape mismatch */
  MF_ERR_NUMERIC = 5,          /* non-finite data or degenerate problem */
  MF_ERR_UNSUPPORTED = 6       /* deliberately unsupported request */
} mf_status;

MF_API const char* mf_status_name(mf_status status);

/* Detail message for the last failing call on this thread ("" if none). */
MF_API const char* mf_last_error(void);

/* ---- images ------------------------------------------------------- */

/* Intensities in [0,1], plane-major storage (all of plane 0 row-major,
 * then plane 1, ...). planes is 1 (gray) or 3 (RGB). */
typedef struct mf_image mf_image;

MF_API mf_status mf_image_create(int32_t height, int32_t width, int32_t planes,
                                 const double* data /* nullable: zeros */, mf_image** out);
MF_API mf_status mf_image_clone(const mf_image* img, mf_image** out);
MF_API void mf_image_free(mf_image* img);

MF_API int32_t mf_image_height(const mf_image* img);
MF_API int32_t mf_image_width(const mf_image* img);
MF_API int32_t mf_image_planes(const mf_image* img);
MF_API const double* mf_image_data(const mf_image* img);

/* 8-bit PGM (P5) or PNG (gray/RGB), chosen by extension. Loading divides
 * by 255; saving clips to [0,1] and rounds half up. Writes are atomic. */
MF_API mf_status mf_image_load(const char* path, mf_image** out);
MF_API mf_status mf_image_save(const mf_image* img, const char* path);

/* ITU-R BT.601 luma; 1-plane images pass through unchanged. */
MF_API mf_status mf_image_to_grayscale(const mf_image* img, mf_image** out);

/* Synthetic multi-focus pair: out_a is `sharp` inside `region` (1-plane
 * mask, >= 0.5 counts as inside) and Gaussian-blurred (sigma, truncated at
 * 3 sigma, reflective borders) outside; out_b is complementary; out_truth
 * is the region mask. Any out pointer may be NULL to skip that output. */
MF_API mf_status mf_generate_multifocus(const mf_image* sharp, double blur_sigma,
                                        const mf_image* region, mf_image** out_a,
                                        mf_image** out_b, mf_image** out_truth);

/* ---- training data and dictionary learning ------------------------ */

typedef struct mf_trainset mf_trainset;

MF_API mf_status mf_trainset_create(int32_t patch_side, mf_trainset** out);
MF_API void mf_trainset_free(mf_trainset* ts);

/* Extracts aligned patch grids from a focused rectangle of one image and a
 * blurred rectangle of another (same height/width; images are converted to
 * grayscale first) and appends the patch pairs. Pairs in which either
 * member is constant are skipped. Rectangles are (row, col, height, width)
 * in pixels; stride is the patch step inside the rectangle. */
MF_API mf_status mf_trainset_add_region_pair(mf_trainset* ts, const mf_image* focused_img,
                                             int32_t focused_row, int32_t focused_col,
                                             const mf_image* blurred_img, int32_t blurred_row,
                                             int32_t blurred_col, int32_t height, int32_t width,
                                             int32_t stride);

MF_API int64_t mf_trainset_pair_count(const mf_trainset* ts);

/* Keeps a uniform random subset of at most max_pairs pairs (seeded). */
MF_API mf_status mf_trainset_subsample(mf_trainset* ts, int64_t max_pairs, uint64_t seed);

/* ---- dictionaries -------------------------------------------------- */

typedef struct mf_dictionary mf_dictionary;

enum {
  MF_DICT_COUPLED = 0,  /* joint learning, pairwise atom correspondence */
  MF_DICT_SEPARATE = 1, /* independently learned halves */
  MF_DICT_SINGLE = 2    /* one dictionary only */
};

/* Learns a focused/blurred dictionary pair from the training set.
 * mode MF_DICT_COUPLED stacks each pair and learns with shared sparse
 * codes; MF_DICT_SEPARATE runs K-SVD per class. eps bounds the squared
 * coding residual; atoms is the per-half atom count. */
MF_API mf_status mf_dict_learn(const mf_trainset* ts, int32_t atoms, int32_t cycles, double eps,
                               int32_t max_atoms, uint64_t seed, int32_t mode,
                               mf_dictionary** out);

MF_API void mf_dict_free(mf_dictionary* dict);
MF_API int32_t mf_dict_dim(const mf_dictionary* dict);
MF_API int32_t mf_dict_atoms(const mf_dictionary* dict); /* per sub-dictionary */
MF_API int32_t mf_dict_mode(const mf_dictionary* dict);

/* CDL1 container (see README). Loading verifies the CRC and unit atom
 * norms; writing is atomic. */
MF_API mf_status mf_dict_save(const mf_dictionary* dict, const char* path);
MF_API mf_status mf_dict_load(const char* path, mf_dictionary** out);

/* ---- fusion --------------------------------------------------------- */

typedef struct mf_fuse_params {
  int32_t patch_side; /* d, window side in pixels */
  int32_t overlap;    /* pixels shared by neighboring windows, < d */
  double omega;       /* focused-subspace weight, 0.5 <= omega < 1 */
  double eps;         /* sparse-coding squared-residual tolerance */
  int32_t max_atoms;  /* cap on atoms per code */
  int32_t tv_enabled; /* nonzero: run TV refinement on the result */
  double tv_eta;
  double tv_rho;
  double tv_gamma;
  int32_t tv_max_iters;
  double tv_tol;
} mf_fuse_params;

/* Fills the documented defaults: d=8, overlap=7, omega=0.54, eps=0.1,
 * max_atoms=16, TV off with eta=1e-5, rho=1, gamma=1, 200 iters, tol=1e-6. */
MF_API void mf_fuse_params_init(mf_fuse_params* params);

/* Fuses count >= 2 same-shape sources into an all-in-focus image. The
 * dictionary must carry both halves (mode coupled or separate) with
 * dim == patch_side². out_mask (nullable) receives the decision map
 * rendered as a gray image (winner index scaled to 0..255). When TV
 * refinement is enabled, *out_tv_converged (nullable) reports whether the
 * solver met its tolerance; on a miss the best iterate is still returned. */
MF_API mf_status mf_fuse(const mf_image* const* sources, int32_t count,
                         const mf_dictionary* dict, const mf_fuse_params* params,
                         mf_image** out_fused, mf_image** out_mask,
                         int32_t* out_tv_converged);

/* ---- fusion quality metrics ---------------------------------------- */

/* Mean squared error on the 0–255 scale (any plane count, same shape). */
MF_API mf_status mf_metric_mse(const mf_image* ref, const mf_image* img, double* out);
/* Mean local SSIM, 8×8 sliding windows, L=255 (1-plane inputs). */
MF_API mf_status mf_metric_ssim(const mf_image* ref, const mf_image* img, double* out);
/* Normalized fusion mutual information (1-plane inputs); 2.0 when
 * fused == both sources. */
MF_API mf_status mf_metric_nmi(const mf_image* src_a, const mf_image* src_b,
                               const mf_image* fused, double* out);
/* Gradient-preservation score in [0,1] (1-plane inputs). */
MF_API mf_status mf_metric_qabf(const mf_image* src_a, const mf_image* src_b,
                                const mf_image* fused, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* MFUSION_H */
