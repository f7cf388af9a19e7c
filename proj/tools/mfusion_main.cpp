// mfusion command-line tool: learn / fuse / eval / sweep / synth.
// Talks to the library exclusively through the C API.
#include <CLI11.hpp>
#include <mfusion/mfusion.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

// Exit codes: 0 ok, 1 usage error, 2 data error, 3 numerical failure.
int exit_code_of(mf_status status) {
  switch (status) {
    case MF_OK: return 0;
    case MF_ERR_INVALID_ARGUMENT: return 1;
    case MF_ERR_NUMERIC: return 3;
    default: return 2;
  }
}

[[noreturn]] void die(mf_status status, const std::string& context) {
  std::cerr << "mfusion: " << context << ": " << mf_status_name(status);
  const char* detail = mf_last_error();
  if (detail && *detail) std::cerr << " (" << detail << ")";
  std::cerr << "\n";
  std::exit(exit_code_of(status));
}

[[noreturn]] void die_usage(const std::string& message) {
  std::cerr << "mfusion: " << message << "\n";
  std::exit(1);
}

[[noreturn]] void die_data(const std::string& message) {
  std::cerr << "mfusion: " << message << "\n";
  std::exit(2);
}

void check(mf_status status, const std::string& context) {
  if (status != MF_OK) die(status, context);
}

struct ImageDeleter {
  void operator()(mf_image* p) const { mf_image_free(p); }
};
using ImagePtr = std::unique_ptr<mf_image, ImageDeleter>;

struct DictDeleter {
  void operator()(mf_dictionary* p) const { mf_dict_free(p); }
};
using DictPtr = std::unique_ptr<mf_dictionary, DictDeleter>;

struct TrainsetDeleter {
  void operator()(mf_trainset* p) const { mf_trainset_free(p); }
};
using TrainsetPtr = std::unique_ptr<mf_trainset, TrainsetDeleter>;

ImagePtr load_image_or_die(const std::string& path) {
  mf_image* raw = nullptr;
  check(mf_image_load(path.c_str(), &raw), "loading " + path);
  return ImagePtr(raw);
}

void save_image_or_die(const mf_image* img, const std::string& path) {
  check(mf_image_save(img, path.c_str()), "saving " + path);
}

ImagePtr grayscale(const mf_image* img) {
  mf_image* raw = nullptr;
  check(mf_image_to_grayscale(img, &raw), "grayscale conversion");
  return ImagePtr(raw);
}

// ---- CSV (RFC 4180: CRLF rows, quoting when needed) ----

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string quoted = "\"";
  for (char c : value) {
    quoted += c;
    if (c == '"') quoted += '"';
  }
  quoted += '"';
  return quoted;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string row;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) row += ',';
    row += csv_field(fields[i]);
  }
  row += "\r\n";
  return row;
}

void emit_csv(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
    return;
  }
  const std::string tmp = out_path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out.good()) die_data("cannot create " + tmp);
    out << content;
    if (!out.good()) die_data("write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, out_path, ec);
  if (ec) die_data("cannot replace " + out_path);
}

std::string format_metric(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// ---- region masks -------------------------------------------------------

ImagePtr make_mask(int height, int width, const std::function<double(int, int)>& fn) {
  std::vector<double> data(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) data[static_cast<std::size_t>(r) * width + c] = fn(r, c);
  }
  mf_image* raw = nullptr;
  check(mf_image_create(height, width, 1, data.data(), &raw), "building region mask");
  return ImagePtr(raw);
}

// Wedge k of K: angular sector around the image center.
bool in_wedge(int r, int c, int height, int width, int k, int wedges) {
  const double cy = (height - 1) / 2.0, cx = (width - 1) / 2.0;
  double angle = std::atan2(r - cy, c - cx);  // (-pi, pi]
  if (angle < 0) angle += 2.0 * M_PI;
  int sector = static_cast<int>(angle / (2.0 * M_PI / wedges));
  return std::min(sector, wedges - 1) == k;
}

// ---- learn ---------------------------------------------------------------

struct Annotation {
  std::string path;
  int x = 0, y = 0, w = 0, h = 0;
  std::string label;
};

std::vector<Annotation> parse_annotations(const std::string& list_path) {
  std::ifstream in(list_path);
  if (!in.good()) die_data("cannot open training list " + list_path);
  const fs::path base = fs::path(list_path).parent_path();

  std::vector<Annotation> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    Annotation a;
    if (!(ss >> a.path >> a.x >> a.y >> a.w >> a.h >> a.label)) {
      die_data("training list line " + std::to_string(line_no) +
               ": expected `path x y w h label`");
    }
    if (a.label != "focused" && a.label != "blurred") {
      die_data("training list line " + std::to_string(line_no) +
               ": label must be `focused` or `blurred`");
    }
    a.path = (base / a.path).string();
    out.push_back(std::move(a));
  }
  return out;
}

int run_learn(const std::string& train_list, const std::string& dict_path,
              const std::string& mode_name, int atoms, int cycles, double eps, int max_atoms,
              long long pair_limit, int patch, int train_stride, std::uint64_t seed) {
  const auto annotations = parse_annotations(train_list);
  std::vector<Annotation> focused, blurred;
  for (const Annotation& a : annotations) {
    (a.label == "focused" ? focused : blurred).push_back(a);
  }
  if (focused.empty() || focused.size() != blurred.size()) {
    die_data("unpaired annotations: " + std::to_string(focused.size()) + " focused vs " +
             std::to_string(blurred.size()) + " blurred rectangles");
  }

  mf_trainset* raw_ts = nullptr;
  check(mf_trainset_create(patch, &raw_ts), "creating training set");
  TrainsetPtr ts(raw_ts);

  std::map<std::string, ImagePtr> cache;
  auto image_of = [&](const std::string& path) -> mf_image* {
    auto it = cache.find(path);
    if (it == cache.end()) it = cache.emplace(path, load_image_or_die(path)).first;
    return it->second.get();
  };

  for (std::size_t i = 0; i < focused.size(); ++i) {
    const Annotation& f = focused[i];
    const Annotation& b = blurred[i];
    if (f.w != b.w || f.h != b.h) {
      die_data("unpaired annotations: focused/blurred rectangle " + std::to_string(i) +
               " differ in size");
    }
    check(mf_trainset_add_region_pair(ts.get(), image_of(f.path), f.y, f.x, image_of(b.path), b.y,
                                      b.x, f.h, f.w, train_stride),
          "extracting training pairs (rectangle " + std::to_string(i) + ")");
  }

  if (mf_trainset_pair_count(ts.get()) == 0) die_data("training rectangles yielded no usable pairs");
  check(mf_trainset_subsample(ts.get(), pair_limit, seed), "subsampling training pairs");
  std::cerr << "mfusion: learning from " << mf_trainset_pair_count(ts.get()) << " patch pairs\n";

  const int mode = mode_name == "coupled" ? MF_DICT_COUPLED : MF_DICT_SEPARATE;
  mf_dictionary* raw_dict = nullptr;
  check(mf_dict_learn(ts.get(), atoms, cycles, eps, max_atoms, seed, mode, &raw_dict),
        "dictionary learning");
  DictPtr dict(raw_dict);
  check(mf_dict_save(dict.get(), dict_path.c_str()), "saving " + dict_path);
  std::cerr << "mfusion: wrote " << dict_path << "\n";
  return 0;
}

// ---- fuse ------------------------------------------------------------------

struct FuseFlags {
  int patch = 8;
  int overlap = 7;
  double omega = 0.54;
  double eps = 0.1;
  int max_atoms = 16;
  bool tv = false;
  double tv_eta = 1e-5;
  double tv_rho = 1.0;
  double tv_gamma = 1.0;
  int tv_iters = 200;
  double tv_tol = 1e-6;
};

mf_fuse_params params_of(const FuseFlags& f) {
  mf_fuse_params p;
  mf_fuse_params_init(&p);
  p.patch_side = f.patch;
  p.overlap = f.overlap;
  p.omega = f.omega;
  p.eps = f.eps;
  p.max_atoms = f.max_atoms;
  p.tv_enabled = f.tv ? 1 : 0;
  p.tv_eta = f.tv_eta;
  p.tv_rho = f.tv_rho;
  p.tv_gamma = f.tv_gamma;
  p.tv_max_iters = f.tv_iters;
  p.tv_tol = f.tv_tol;
  return p;
}

ImagePtr fuse_set(const std::vector<ImagePtr>& images, const mf_dictionary* dict,
                  const mf_fuse_params& params, ImagePtr* mask_out) {
  std::vector<const mf_image*> raw;
  raw.reserve(images.size());
  for (const ImagePtr& img : images) raw.push_back(img.get());

  mf_image* fused = nullptr;
  mf_image* mask = nullptr;
  int32_t tv_ok = 1;
  check(mf_fuse(raw.data(), static_cast<int32_t>(raw.size()), dict, &params, &fused,
                mask_out ? &mask : nullptr, &tv_ok),
        "fusing");
  if (!tv_ok) std::cerr << "mfusion: warning: TV refinement stopped before tolerance\n";
  if (mask_out) mask_out->reset(mask);
  return ImagePtr(fused);
}

int run_fuse(const std::vector<std::string>& inputs, const std::string& dict_path,
             const std::string& out_path, const std::string& mask_path, const FuseFlags& flags) {
  std::vector<ImagePtr> images;
  for (const std::string& path : inputs) images.push_back(load_image_or_die(path));

  mf_dictionary* raw_dict = nullptr;
  check(mf_dict_load(dict_path.c_str(), &raw_dict), "loading " + dict_path);
  DictPtr dict(raw_dict);

  ImagePtr mask;
  ImagePtr fused = fuse_set(images, dict.get(), params_of(flags), mask_path.empty() ? nullptr : &mask);
  save_image_or_die(fused.get(), out_path);
  if (!mask_path.empty()) save_image_or_die(mask.get(), mask_path);
  return 0;
}

// ---- eval --------------------------------------------------------------------

bool metric_selected(const std::string& selection, const char* name) {
  std::stringstream ss(selection);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == name) return true;
  }
  return false;
}

int run_eval(const std::string& fused_path, const std::vector<std::string>& source_paths,
             const std::string& ref_path, const std::string& id, const std::string& metrics,
             const std::string& out_path) {
  ImagePtr fused = load_image_or_die(fused_path);
  ImagePtr src_a = load_image_or_die(source_paths[0]);
  ImagePtr src_b = load_image_or_die(source_paths[1]);

  ImagePtr fused_gray = grayscale(fused.get());
  ImagePtr a_gray = grayscale(src_a.get());
  ImagePtr b_gray = grayscale(src_b.get());

  std::string nmi_s, qabf_s, ssim_s, mse_s;
  double value = 0.0;
  if (metric_selected(metrics, "nmi")) {
    check(mf_metric_nmi(a_gray.get(), b_gray.get(), fused_gray.get(), &value), "nmi");
    nmi_s = format_metric(value);
  }
  if (metric_selected(metrics, "qabf")) {
    check(mf_metric_qabf(a_gray.get(), b_gray.get(), fused_gray.get(), &value), "qabf");
    qabf_s = format_metric(value);
  }
  if (!ref_path.empty()) {
    ImagePtr ref = load_image_or_die(ref_path);
    if (metric_selected(metrics, "ssim")) {
      ImagePtr ref_gray = grayscale(ref.get());
      check(mf_metric_ssim(ref_gray.get(), fused_gray.get(), &value), "ssim");
      ssim_s = format_metric(value);
    }
    if (metric_selected(metrics, "mse")) {
      check(mf_metric_mse(ref.get(), fused.get(), &value), "mse");
      mse_s = format_metric(value);
    }
  }

  std::string csv = csv_row({"id", "nmi", "qabf", "ssim", "mse"});
  csv += csv_row({id.empty() ? fused_path : id, nmi_s, qabf_s, ssim_s, mse_s});
  emit_csv(out_path, csv);
  return 0;
}

// ---- sweep -----------------------------------------------------------------

std::vector<double> parse_range(const std::string& spec) {
  double start = 0, stop = 0, step = 0;
  char colon1 = 0, colon2 = 0;
  std::istringstream ss(spec);
  if (!(ss >> start >> colon1 >> stop >> colon2 >> step) || colon1 != ':' || colon2 != ':' ||
      !ss.eof()) {
    die_usage("invalid range `" + spec + "`: expected start:stop:step");
  }
  if (step <= 0 || stop < start) die_usage("invalid range `" + spec + "`");
  std::vector<double> values;
  for (double v = start; v <= stop + 1e-9; v += step) values.push_back(v);
  return values;
}

std::vector<std::vector<std::string>> corpus_sets(const std::string& corpus_dir) {
  std::vector<std::vector<std::string>> sets;
  std::vector<fs::path> subdirs;
  if (!fs::is_directory(corpus_dir)) die_data("corpus directory not found: " + corpus_dir);
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_directory()) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const fs::path& dir : subdirs) {
    std::vector<std::string> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string ext = entry.path().extension().string();
      if (ext == ".png" || ext == ".pgm") images.push_back(entry.path().string());
    }
    std::sort(images.begin(), images.end());
    if (images.size() >= 2) sets.push_back(std::move(images));
  }
  if (sets.empty()) die_data("corpus has no subdirectories with at least two images");
  return sets;
}

std::string substitute_patch(const std::string& pattern, int d) {
  std::string out = pattern;
  const std::string token = "{d}";
  auto pos = out.find(token);
  while (pos != std::string::npos) {
    out.replace(pos, token.size(), std::to_string(d));
    pos = out.find(token, pos);
  }
  return out;
}

int run_sweep(const std::string& param, const std::string& range_spec,
              const std::string& corpus_dir, const std::string& dict_pattern,
              const std::string& out_path, FuseFlags flags) {
  if (param != "omega" && param != "eps" && param != "patch") {
    die_usage("sweep parameter must be one of omega, eps, patch");
  }
  const std::vector<double> values = parse_range(range_spec);
  if (param == "omega") {
    for (double v : values) {
      if (v < 0.5 || v >= 1.0) die_usage("omega sweep values must lie in [0.5, 1)");
    }
  }

  const auto sets = corpus_sets(corpus_dir);

  std::string csv = csv_row({"param", "value", "mean_nmi", "mean_qabf", "sets"});
  for (double value : values) {
    FuseFlags current = flags;
    std::string dict_path = dict_pattern;
    if (param == "omega") {
      current.omega = value;
    } else if (param == "eps") {
      current.eps = value;
    } else {
      const int d = static_cast<int>(std::lround(value));
      if (d < 2) die_usage("patch sweep values must be >= 2");
      current.patch = d;
      if (current.overlap >= d) current.overlap = d - 1;
      dict_path = substitute_patch(dict_pattern, d);
    }

    mf_dictionary* raw_dict = nullptr;
    check(mf_dict_load(dict_path.c_str(), &raw_dict), "loading " + dict_path);
    DictPtr dict(raw_dict);

    double nmi_total = 0.0, qabf_total = 0.0;
    for (const auto& set : sets) {
      std::vector<ImagePtr> images;
      for (const std::string& path : set) images.push_back(load_image_or_die(path));
      ImagePtr fused = fuse_set(images, dict.get(), params_of(current), nullptr);

      ImagePtr fused_gray = grayscale(fused.get());
      ImagePtr a_gray = grayscale(images[0].get());
      ImagePtr b_gray = grayscale(images[1].get());
      double v = 0.0;
      check(mf_metric_nmi(a_gray.get(), b_gray.get(), fused_gray.get(), &v), "nmi");
      nmi_total += v;
      check(mf_metric_qabf(a_gray.get(), b_gray.get(), fused_gray.get(), &v), "qabf");
      qabf_total += v;
    }
    const double n = static_cast<double>(sets.size());
    csv += csv_row({param, format_metric(value), format_metric(nmi_total / n),
                    format_metric(qabf_total / n), std::to_string(sets.size())});
  }
  emit_csv(out_path, csv);
  return 0;
}

// ---- synth -----------------------------------------------------------------

int run_synth(const std::string& input, double sigma, const std::string& region_spec,
              const std::string& out_dir, std::string stem, const std::string& format) {
  if (sigma <= 0.0) die_usage("synth: sigma must be positive");
  ImagePtr sharp = load_image_or_die(input);
  const int h = mf_image_height(sharp.get());
  const int w = mf_image_width(sharp.get());
  if (stem.empty()) stem = fs::path(input).stem().string();
  fs::create_directories(out_dir);
  auto out_file = [&](const std::string& suffix) {
    return (fs::path(out_dir) / (stem + "_" + suffix + "." + format)).string();
  };

  int wedges = 0;
  ImagePtr region;
  if (region_spec == "half") {
    region = make_mask(h, w, [&](int, int c) { return c < w / 2 ? 1.0 : 0.0; });
  } else if (region_spec == "vhalf") {
    region = make_mask(h, w, [&](int r, int) { return r < h / 2 ? 1.0 : 0.0; });
  } else if (region_spec == "circle") {
    const double cy = (h - 1) / 2.0, cx = (w - 1) / 2.0, radius = std::min(h, w) / 3.0;
    region = make_mask(h, w, [&](int r, int c) {
      return std::hypot(r - cy, c - cx) <= radius ? 1.0 : 0.0;
    });
  } else if (region_spec.rfind("wedges:", 0) == 0) {
    wedges = std::atoi(region_spec.c_str() + 7);
    if (wedges < 2) die_usage("synth: wedges:K needs K >= 2");
  } else if (region_spec.rfind("mask:", 0) == 0) {
    ImagePtr loaded = load_image_or_die(region_spec.substr(5));
    region = grayscale(loaded.get());
  } else {
    die_usage("synth: region must be half, vhalf, circle, wedges:K, or mask:PATH");
  }

  if (wedges == 0) {
    mf_image *a = nullptr, *b = nullptr, *truth = nullptr;
    check(mf_generate_multifocus(sharp.get(), sigma, region.get(), &a, &b, &truth),
          "generating multi-focus pair");
    ImagePtr pa(a), pb(b), pt(truth);
    save_image_or_die(pa.get(), out_file("source_0"));
    save_image_or_die(pb.get(), out_file("source_1"));
    // Truth map in decision-mask convention: the index of the sharp source.
    const double* mask_data = mf_image_data(pt.get());
    ImagePtr label = make_mask(h, w, [&](int r, int c) {
      return mask_data[static_cast<std::size_t>(r) * w + c] >= 0.5 ? 0.0 : 1.0;
    });
    save_image_or_die(label.get(), out_file("truth"));
  } else {
    const double level = std::floor(255.0 / (wedges - 1)) / 255.0;
    std::vector<double> label(static_cast<std::size_t>(h) * w, 0.0);
    for (int k = 0; k < wedges; ++k) {
      ImagePtr wedge_region =
          make_mask(h, w, [&](int r, int c) { return in_wedge(r, c, h, w, k, wedges) ? 1.0 : 0.0; });
      mf_image* variant = nullptr;
      check(mf_generate_multifocus(sharp.get(), sigma, wedge_region.get(), &variant, nullptr,
                                   nullptr),
            "generating wedge variant");
      ImagePtr pv(variant);
      save_image_or_die(pv.get(), out_file("source_" + std::to_string(k)));
      const double* m = mf_image_data(wedge_region.get());
      for (std::size_t i = 0; i < label.size(); ++i) {
        if (m[i] >= 0.5) label[i] = std::min(1.0, k * level);
      }
    }
    mf_image* raw = nullptr;
    check(mf_image_create(h, w, 1, label.data(), &raw), "building truth map");
    ImagePtr truth(raw);
    save_image_or_die(truth.get(), out_file("truth"));
  }
  save_image_or_die(sharp.get(), out_file("sharp"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-focus image fusion via coupled-dictionary sparse coding"};
  app.require_subcommand(1);

  // learn
  std::string train_list, dict_out, mode = "coupled";
  int atoms = 256, cycles = 10, max_atoms = 16, patch = 8, train_stride = 4;
  long long pair_limit = 30000;
  double eps = 0.1;
  std::uint64_t seed = 0;
  auto* learn = app.add_subcommand("learn", "Learn a focused/blurred dictionary pair");
  learn->add_option("--train", train_list, "Annotation list: `path x y w h label` per line")
      ->required();
  learn->add_option("--dict", dict_out, "Output dictionary path (CDL1)")->required();
  learn->add_option("--mode", mode, "coupled | separate")
      ->check(CLI::IsMember({"coupled", "separate"}));
  learn->add_option("--atoms", atoms, "Atoms per sub-dictionary");
  learn->add_option("--cycles", cycles, "Dictionary update cycles");
  learn->add_option("--eps", eps, "Sparse-coding squared-residual tolerance");
  learn->add_option("--max-atoms", max_atoms, "Cap on atoms per code");
  learn->add_option("--pairs", pair_limit, "Max training pairs kept");
  learn->add_option("--patch", patch, "Patch side d");
  learn->add_option("--train-stride", train_stride, "Patch step inside rectangles");
  learn->add_option("--seed", seed, "PRNG seed");

  // fuse
  std::vector<std::string> fuse_inputs;
  std::string fuse_dict, fuse_out, mask_out;
  FuseFlags fuse_flags;
  auto* fuse = app.add_subcommand("fuse", "Fuse aligned multi-focus images");
  fuse->add_option("inputs", fuse_inputs, "Source images (2 or more)")
      ->required()
      ->expected(2, -1);
  fuse->add_option("--dict", fuse_dict, "Dictionary path")->required();
  fuse->add_option("--out", fuse_out, "Fused output image")->required();
  fuse->add_option("--mask-out", mask_out, "Decision-mask image output");
  fuse->add_option("--patch", fuse_flags.patch, "Patch side d");
  fuse->add_option("--overlap", fuse_flags.overlap, "Patch overlap in pixels");
  fuse->add_option("--omega", fuse_flags.omega, "Focused-subspace weight in [0.5, 1)");
  fuse->add_option("--eps", fuse_flags.eps, "Sparse-coding squared-residual tolerance");
  fuse->add_option("--max-atoms", fuse_flags.max_atoms, "Cap on atoms per code");
  fuse->add_flag("--tv", fuse_flags.tv, "Apply TV global reconstruction");
  fuse->add_option("--tv-eta", fuse_flags.tv_eta, "TV regularization weight");
  fuse->add_option("--tv-rho", fuse_flags.tv_rho, "ADMM penalty");
  fuse->add_option("--tv-gamma", fuse_flags.tv_gamma, "Dual update relaxation");
  fuse->add_option("--tv-iters", fuse_flags.tv_iters, "Max ADMM iterations");
  fuse->add_option("--tv-tol", fuse_flags.tv_tol, "Relative residual tolerance");

  // eval
  std::string eval_fused, eval_ref, eval_id, eval_metrics = "nmi,qabf,ssim,mse", eval_out;
  std::vector<std::string> eval_sources;
  auto* eval = app.add_subcommand("eval", "Metric row (CSV) for a fused image");
  eval->add_option("--fused", eval_fused, "Fused image")->required();
  eval->add_option("--sources", eval_sources, "The two source images")
      ->required()
      ->expected(2);
  eval->add_option("--ref", eval_ref, "All-in-focus reference (enables ssim/mse)");
  eval->add_option("--id", eval_id, "Row identifier (default: fused path)");
  eval->add_option("--metrics", eval_metrics, "Comma list among nmi,qabf,ssim,mse");
  eval->add_option("--out", eval_out, "CSV output path (default: stdout)");

  // sweep
  std::string sweep_param, sweep_range, sweep_corpus, sweep_dict, sweep_out;
  FuseFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Average metrics over a corpus per parameter value");
  sweep->add_option("--param", sweep_param, "omega | eps | patch")->required();
  sweep->add_option("--range", sweep_range, "start:stop:step (inclusive)")->required();
  sweep->add_option("--corpus", sweep_corpus, "Directory of per-set subdirectories")->required();
  sweep->add_option("--dict", sweep_dict, "Dictionary path ({d} substituted on patch sweeps)")
      ->required();
  sweep->add_option("--out", sweep_out, "CSV output path (default: stdout)");
  sweep->add_option("--omega", sweep_flags.omega, "Fixed omega when not swept");
  sweep->add_option("--eps", sweep_flags.eps, "Fixed eps when not swept");
  sweep->add_option("--patch", sweep_flags.patch, "Fixed patch side when not swept");
  sweep->add_option("--overlap", sweep_flags.overlap, "Patch overlap in pixels");
  sweep->add_option("--max-atoms", sweep_flags.max_atoms, "Cap on atoms per code");

  // synth
  std::string synth_input, synth_region = "half", synth_out_dir, synth_stem,
              synth_format = "png";
  double synth_sigma = 2.0;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-focus set");
  synth->add_option("--input", synth_input, "All-in-focus source image")->required();
  synth->add_option("--sigma", synth_sigma, "Gaussian blur sigma (> 0)");
  synth->add_option("--region", synth_region, "half | vhalf | circle | wedges:K | mask:PATH");
  synth->add_option("--out", synth_out_dir, "Output directory")->required();
  synth->add_option("--stem", synth_stem, "Output name stem (default: input stem)");
  synth->add_option("--format", synth_format, "png | pgm")
      ->check(CLI::IsMember({"png", "pgm"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (learn->parsed()) {
    return run_learn(train_list, dict_out, mode, atoms, cycles, eps, max_atoms, pair_limit, patch,
                     train_stride, seed);
  }
  if (fuse->parsed()) {
    return run_fuse(fuse_inputs, fuse_dict, fuse_out, mask_out, fuse_flags);
  }
  if (eval->parsed()) {
    return run_eval(eval_fused, eval_sources, eval_ref, eval_id, eval_metrics, eval_out);
  }
  if (sweep->parsed()) {
    return run_sweep(sweep_param, sweep_range, sweep_corpus, sweep_dict, sweep_out, sweep_flags);
  }
  if (synth->parsed()) {
    return run_synth(synth_input, synth_sigma, synth_region, synth_out_dir, synth_stem,
                     synth_format);
  }
  return 1;
}
