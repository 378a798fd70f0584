#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "faceverify/config.hpp"
#include "faceverify/errors.hpp"
#include "faceverify/fusion.hpp"
#include "faceverify/gabor.hpp"
#include "faceverify/image.hpp"
#include "faceverify/knn.hpp"
#include "faceverify/linalg.hpp"
#include "faceverify/manifest.hpp"
#include "faceverify/metrics.hpp"
#include "faceverify/serialize.hpp"
#include "faceverify/subspace.hpp"
#include "faceverify/svm.hpp"

namespace faceverify {

struct SubjectTemplate {
  int subject = 0;
  Vec features;  // mean feature vector of the subject's training images
};

struct ModelBundle {
  PipelineConfig config;
  PcaModel pca;
  CcModel cc;          // fitted on PCA projections
  FusionStats fusion;
  SvmModel svm;        // active when config.classifier is an svm kind
  KnnModel knn;        // active when config.classifier is knn
  std::vector<SubjectTemplate> gallery;
};

struct VerifyResult {
  double score = 0.0;
  bool accept = false;
};

struct EvalResult {
  ScoreSet scores;
  RocCurve curve;
  double threshold = 0.0;
  double far = 0.0;
  double frr = 0.0;
  double eer = 0.0;
  double recognition = 0.0;
};

namespace detail {

template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const input_error& e) {
    throw input_error(std::string(name) + ": " + e.what());
  } catch (const compute_error& e) {
    throw compute_error(std::string(name) + ": " + e.what());
  }
}

inline int pipeline_threads(const PipelineConfig& cfg) {
  if (cfg.threads > 0) return cfg.threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? int(hw) : 1;
}

inline Vec abs_difference(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw input_error("trial feature: length mismatch");
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::abs(a[i] - b[i]);
  return out;
}

}  // namespace detail

inline BankOptions bank_options_for(const PipelineConfig& cfg) {
  BankOptions opt;
  opt.frequencies = cfg.gabor_frequencies;
  opt.orientations = cfg.gabor_orientations;
  opt.sigma_factor = cfg.gabor_sigma_factor;
  opt.support_factor = cfg.gabor_support_factor;
  opt.support_cap = std::max(1, std::min(cfg.image_width, cfg.image_height) / 2);
  opt.carrier = cfg.gabor_carrier;
  return opt;
}

inline GrayImage load_image_resized(const std::string& path, const PipelineConfig& cfg) {
  GrayImage img = load_pgm(path);
  if (img.width == cfg.image_width && img.height == cfg.image_height) return img;
  return resize_bilinear(img, cfg.image_width, cfg.image_height);
}

struct ExtractedSplit {
  std::vector<Vec> faces;     // one gabor feature vector per image
  std::vector<int> subjects;  // parallel labels
};

inline ExtractedSplit extract_split(const DatasetManifest& manifest, Split split,
                                    const PipelineConfig& cfg, const FilterBank& bank) {
  ExtractedSplit out;
  const int threads = detail::pipeline_threads(cfg);
  for (const ManifestEntry& e : manifest.entries) {
    if (e.split != split) continue;
    const GrayImage img = load_image_resized(e.path, cfg);
    out.faces.push_back(
        extract_gabor_face(img, bank, cfg.gabor_stride, threads).values);
    out.subjects.push_back(e.subject);
  }
  return out;
}

// Probe features in the configured feature space: PCA projection, CC
// projection of that, or the weighted-mean fusion of both.
inline Vec probe_features(const ModelBundle& bundle, const Vec& gabor_face) {
  const Vec p = pca_project(bundle.pca, gabor_face).values;
  if (bundle.config.features == FeatureMode::pca) return p;
  const Vec c = cc_project(bundle.cc, p).values;
  if (bundle.config.features == FeatureMode::cc) return c;
  return fuse(bundle.fusion, bundle.fusion.normalize_pca(p), bundle.fusion.normalize_cc(c))
      .values;
}

namespace detail {

inline std::vector<SubjectTemplate> build_gallery(const std::vector<Vec>& features,
                                                  const std::vector<int>& subjects) {
  std::map<int, std::pair<Vec, std::size_t>> acc;
  for (std::size_t i = 0; i < features.size(); ++i) {
    auto& slot = acc[subjects[i]];
    if (slot.first.empty()) slot.first.assign(features[i].size(), 0.0);
    for (std::size_t j = 0; j < features[i].size(); ++j) slot.first[j] += features[i][j];
    ++slot.second;
  }
  std::vector<SubjectTemplate> gallery;
  for (auto& [subject, slot] : acc) {
    for (double& v : slot.first) v /= double(slot.second);
    gallery.push_back({subject, std::move(slot.first)});
  }
  return gallery;
}

inline const SubjectTemplate& find_template(const ModelBundle& bundle, int subject) {
  for (const auto& t : bundle.gallery)
    if (t.subject == subject) return t;
  throw input_error("unknown subject " + std::to_string(subject));
}

// Genuine pair per training image plus impostor pairs against every
// other enrolled subject, the latter subsampled (seeded) to at most
// impostor_ratio times the genuine count.
inline void build_training_pairs(const std::vector<Vec>& features,
                                 const std::vector<int>& subjects,
                                 const std::vector<SubjectTemplate>& gallery,
                                 const PipelineConfig& cfg, std::vector<Vec>& samples,
                                 std::vector<int>& labels) {
  std::vector<Vec> impostors;
  for (std::size_t i = 0; i < features.size(); ++i) {
    for (const auto& t : gallery) {
      Vec x = abs_difference(features[i], t.features);
      if (t.subject == subjects[i]) {
        samples.push_back(std::move(x));
        labels.push_back(1);
      } else {
        impostors.push_back(std::move(x));
      }
    }
  }
  const std::size_t cap = samples.size() * std::size_t(cfg.impostor_ratio);
  std::vector<std::size_t> order(impostors.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (impostors.size() > cap) {
    std::mt19937 rng(cfg.seed + 1);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(cap);
    std::sort(order.begin(), order.end());
  }
  for (std::size_t idx : order) {
    samples.push_back(std::move(impostors[idx]));
    labels.push_back(-1);
  }
}

}  // namespace detail

// Wall-clock per fitting stage, filled when a FitTimings pointer is
// passed to fit (used by the bench command).
struct FitTimings {
  double gabor_ms = 0.0;
  double pca_ms = 0.0;
  double cc_ms = 0.0;
  double fusion_ms = 0.0;
  double classifier_ms = 0.0;
  std::size_t train_images = 0;
};

inline ModelBundle fit(const DatasetManifest& manifest, const PipelineConfig& cfg,
                       FitTimings* timings = nullptr) {
  validate(cfg);
  ModelBundle bundle;
  bundle.config = cfg;
  const FilterBank bank = build_bank(bank_options_for(cfg));
  using clock = std::chrono::steady_clock;
  auto timed = [&](double FitTimings::* slot, auto&& fn) -> decltype(fn()) {
    const auto start = clock::now();
    auto result = fn();
    if (timings)
      timings->*slot = std::chrono::duration<double, std::milli>(clock::now() - start).count();
    return result;
  };

  const ExtractedSplit train = detail::stage("fit[gabor]", [&] {
    return timed(&FitTimings::gabor_ms, [&] {
      auto s = extract_split(manifest, Split::train, cfg, bank);
      if (s.faces.empty()) throw input_error("training split is empty");
      return s;
    });
  });
  if (timings) timings->train_images = train.faces.size();

  bundle.pca = detail::stage("fit[pca]", [&] {
    return timed(&FitTimings::pca_ms, [&] {
      PcaOptions opt;
      opt.components = cfg.pca_components;
      opt.variance_fraction = cfg.pca_variance;
      return pca_fit(train.faces, opt);
    });
  });

  std::vector<Vec> pca_coords(train.faces.size());
  for (std::size_t i = 0; i < train.faces.size(); ++i)
    pca_coords[i] = pca_project(bundle.pca, train.faces[i]).values;

  bundle.cc = detail::stage("fit[cc]", [&] {
    return timed(&FitTimings::cc_ms, [&] {
      CcOptions opt;
      opt.components = cfg.cc_components;
      opt.ridge = cfg.cc_ridge;
      return cc_fit(pca_coords, train.subjects, opt);
    });
  });

  std::vector<Vec> cc_coords(pca_coords.size());
  for (std::size_t i = 0; i < pca_coords.size(); ++i)
    cc_coords[i] = cc_project(bundle.cc, pca_coords[i]).values;

  bundle.fusion = detail::stage("fit[fusion]", [&] {
    return timed(&FitTimings::fusion_ms, [&] { return fit_fusion(pca_coords, cc_coords); });
  });

  std::vector<Vec> features(train.faces.size());
  detail::stage("fit[templates]", [&] {
    for (std::size_t i = 0; i < train.faces.size(); ++i)
      features[i] = probe_features(bundle, train.faces[i]);
    bundle.gallery = detail::build_gallery(features, train.subjects);
    if (bundle.gallery.size() < 2)
      throw input_error("need at least 2 enrolled subjects");
    return 0;
  });

  detail::stage("fit[classifier]", [&] {
    return timed(&FitTimings::classifier_ms, [&] {
      std::vector<Vec> samples;
      std::vector<int> labels;
      detail::build_training_pairs(features, train.subjects, bundle.gallery, cfg, samples,
                                   labels);
      if (cfg.classifier == ClassifierKind::knn) {
        bundle.knn = knn_fit(samples, labels,
                             std::min<std::size_t>(std::size_t(cfg.knn_k), samples.size()));
        return 0;
      }
      KernelSpec kernel;
      if (cfg.classifier == ClassifierKind::svm_linear) {
        kernel.kind = KernelKind::linear;
      } else {
        kernel.kind = KernelKind::rbf;
        kernel.sigma = cfg.svm_sigma > 0.0 ? cfg.svm_sigma : median_pairwise_distance(samples);
        if (!(kernel.sigma > 0.0)) kernel.sigma = 1.0;
      }
      SvmOptions opt;
      opt.c = cfg.svm_c;
      opt.tol = cfg.svm_tol;
      opt.max_updates = cfg.svm_max_updates;
      bundle.svm = svm_train(samples, labels, kernel, opt);
      return 0;
    });
  });
  return bundle;
}

inline double trial_score(const ModelBundle& bundle, const Vec& probe_feature, int subject) {
  const Vec x = detail::abs_difference(probe_feature, detail::find_template(bundle, subject).features);
  if (bundle.config.classifier == ClassifierKind::knn) return knn_score(bundle.knn, x);
  return svm_score(bundle.svm, x);
}

inline VerifyResult verify(const ModelBundle& bundle, const GrayImage& probe,
                           int claimed_subject, double threshold) {
  const FilterBank bank = build_bank(bank_options_for(bundle.config));
  GrayImage img = probe;
  if (img.width != bundle.config.image_width || img.height != bundle.config.image_height)
    img = resize_bilinear(img, bundle.config.image_width, bundle.config.image_height);
  const Vec face = extract_gabor_face(img, bank, bundle.config.gabor_stride,
                                      detail::pipeline_threads(bundle.config))
                       .values;
  VerifyResult r;
  r.score = trial_score(bundle, probe_features(bundle, face), claimed_subject);
  r.accept = r.score >= threshold;
  return r;
}

// Every image of the split is scored against its true subject (genuine
// trial) and against each other enrolled subject (impostor trials).
inline ScoreSet score_split(const ModelBundle& bundle, const DatasetManifest& manifest,
                            Split split) {
  const FilterBank bank = build_bank(bank_options_for(bundle.config));
  const ExtractedSplit data = extract_split(manifest, split, bundle.config, bank);
  if (data.faces.empty())
    throw input_error(std::string("score_split: ") + split_name(split) + " split is empty");
  ScoreSet scores;
  for (std::size_t i = 0; i < data.faces.size(); ++i) {
    const Vec f = probe_features(bundle, data.faces[i]);
    detail::find_template(bundle, data.subjects[i]);  // unknown subject check
    for (const auto& t : bundle.gallery) {
      const double s = trial_score(bundle, f, t.subject);
      if (t.subject == data.subjects[i])
        scores.genuine.push_back(s);
      else
        scores.impostor.push_back(s);
    }
  }
  return scores;
}

inline EvalResult evaluate(const ModelBundle& bundle, const DatasetManifest& manifest,
                           Split split, double threshold) {
  EvalResult r;
  r.scores = score_split(bundle, manifest, split);
  r.curve = roc(r.scores);
  r.eer = r.curve.eer;
  r.threshold = threshold;
  std::size_t genuine_accepts = 0, impostor_rejects = 0;
  for (double s : r.scores.genuine)
    if (s >= threshold) ++genuine_accepts;
  for (double s : r.scores.impostor)
    if (s < threshold) ++impostor_rejects;
  const std::size_t ng = r.scores.genuine.size(), ni = r.scores.impostor.size();
  r.far = double(ni - impostor_rejects) / double(ni);
  r.frr = double(ng - genuine_accepts) / double(ng);
  r.recognition = recognition_rate(genuine_accepts, impostor_rejects, ng + ni);
  return r;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open " + path.string());
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw input_error("read failed on " + path.string());
  return content;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot create " + path.string());
  out << content;
  if (!out) throw input_error("write failed on " + path.string());
}

namespace detail {

inline std::string encode_gallery(const std::vector<SubjectTemplate>& gallery) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-gallery"));
  w.scalar("version", std::string("1"));
  w.scalar("count", gallery.size());
  for (const auto& t : gallery) {
    w.scalar("subject", t.subject);
    w.vec("template", t.features);
  }
  return w.str();
}

inline std::vector<SubjectTemplate> parse_gallery(const std::string& text) {
  TextReader r(text, "gallery");
  check_format(r, "faceverify-gallery");
  const std::size_t count = r.scalar_size("count");
  std::vector<SubjectTemplate> gallery(count);
  for (std::size_t i = 0; i < count; ++i) {
    gallery[i].subject = int(std::stol(r.scalar("subject")));
    gallery[i].features = r.vec("template");
  }
  r.expect_end();
  return gallery;
}

constexpr const char* bundle_files[] = {"config",   "pca_model", "cc_model",
                                        "fusion",   "classifier", "gallery"};

}  // namespace detail

inline void save_bundle(const ModelBundle& bundle, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::string> files;
  files["config"] = encode_config(bundle.config);
  files["pca_model"] = encode_pca(bundle.pca);
  files["cc_model"] = encode_cc(bundle.cc);
  files["fusion"] = encode_fusion(bundle.fusion);
  files["classifier"] = bundle.config.classifier == ClassifierKind::knn
                            ? encode_knn(bundle.knn)
                            : encode_svm(bundle.svm);
  files["gallery"] = detail::encode_gallery(bundle.gallery);
  std::string checks;
  for (const char* name : detail::bundle_files) {
    write_file(dir / name, files[name]);
    checks += to_hex16(fnv1a64(files[name]));
    checks += ' ';
    checks += name;
    checks += '\n';
  }
  write_file(dir / "checksum", checks);
}

inline ModelBundle load_bundle(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw input_error("bundle directory not found: " + dir.string());
  std::map<std::string, std::string> files;
  for (const char* name : detail::bundle_files) files[name] = read_file(dir / name);

  std::istringstream checks(read_file(dir / "checksum"));
  std::map<std::string, bool> verified;
  std::string hex, name;
  while (checks >> hex >> name) {
    auto it = files.find(name);
    if (it == files.end()) throw input_error("bundle: checksum names unknown file " + name);
    if (to_hex16(fnv1a64(it->second)) != hex)
      throw input_error("bundle: checksum mismatch for " + name);
    verified[name] = true;
  }
  for (const char* required : detail::bundle_files)
    if (!verified.count(required))
      throw input_error(std::string("bundle: checksum missing entry for ") + required);

  ModelBundle bundle;
  bundle.config = parse_config(files["config"]);
  bundle.pca = parse_pca(files["pca_model"]);
  bundle.cc = parse_cc(files["cc_model"]);
  bundle.fusion = parse_fusion(files["fusion"]);
  if (bundle.config.classifier == ClassifierKind::knn)
    bundle.knn = parse_knn(files["classifier"]);
  else
    bundle.svm = parse_svm(files["classifier"]);
  bundle.gallery = detail::parse_gallery(files["gallery"]);
  return bundle;
}

}  // namespace faceverify
