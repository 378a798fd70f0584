#pragma once

#include <cstdlib>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/gabor.hpp"
#include "faceverify/serialize.hpp"

namespace faceverify {

enum class FeatureMode { fused, pca, cc };
enum class ClassifierKind { svm_rbf, svm_linear, knn };

inline std::string feature_mode_name(FeatureMode m) {
  switch (m) {
    case FeatureMode::fused: return "fused";
    case FeatureMode::pca: return "pca";
    default: return "cc";
  }
}

inline std::string classifier_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::svm_rbf: return "svm-rbf";
    case ClassifierKind::svm_linear: return "svm-linear";
    default: return "knn";
  }
}

// Every knob of the end-to-end pipeline. A fixed config, manifest and
// seed make a run fully deterministic.
struct PipelineConfig {
  int image_width = 200;
  int image_height = 200;

  int gabor_frequencies = 5;    // f_i = pi / 2^i, i = 1..frequencies
  int gabor_orientations = 8;   // theta_k = k pi / orientations, k = 1..orientations
  double gabor_sigma_factor = std::numbers::pi;  // sigma = factor / f
  double gabor_support_factor = 3.0;             // support = ceil(factor * sigma)
  Carrier gabor_carrier = Carrier::radians;
  int gabor_stride = 4;

  int pca_components = 0;       // 0 -> smallest count reaching pca_variance
  double pca_variance = 0.95;
  int cc_components = 0;        // 0 -> class count - 1
  double cc_ridge = -1.0;       // < 0 -> 1e-6 * trace(Sigma) / dim

  FeatureMode features = FeatureMode::fused;
  ClassifierKind classifier = ClassifierKind::svm_rbf;

  double svm_c = 10.0;
  double svm_sigma = 0.0;       // <= 0 -> median pairwise distance heuristic
  double svm_tol = 1e-3;
  long svm_max_updates = 100000;
  int knn_k = 5;

  int impostor_ratio = 5;       // impostor training pairs per genuine pair cap
  unsigned long seed = 0;
  int threads = 0;              // 0 -> hardware concurrency
};

inline void validate(const PipelineConfig& c) {
  if (c.image_width < 1 || c.image_height < 1)
    throw input_error("config: image size must be >= 1");
  if (c.gabor_frequencies < 1 || c.gabor_orientations < 1)
    throw input_error("config: gabor grid must be >= 1 in both axes");
  if (!(c.gabor_sigma_factor > 0.0) || !(c.gabor_support_factor > 0.0))
    throw input_error("config: gabor factors must be > 0");
  if (c.gabor_stride < 1) throw input_error("config: gabor_stride must be >= 1");
  if (c.pca_components < 0 || c.cc_components < 0)
    throw input_error("config: component counts must be >= 0");
  if (!(c.pca_variance > 0.0) || c.pca_variance > 1.0)
    throw input_error("config: pca_variance must be in (0,1]");
  if (!(c.svm_c > 0.0)) throw input_error("config: svm_c must be > 0");
  if (!(c.svm_tol > 0.0)) throw input_error("config: svm_tol must be > 0");
  if (c.svm_max_updates < 1) throw input_error("config: svm_max_updates must be >= 1");
  if (c.knn_k < 1) throw input_error("config: knn_k must be >= 1");
  if (c.impostor_ratio < 1) throw input_error("config: impostor_ratio must be >= 1");
  if (c.threads < 0) throw input_error("config: threads must be >= 0");
}

inline std::string encode_config(const PipelineConfig& c) {
  std::ostringstream out;
  auto put = [&](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  put("image_width", std::to_string(c.image_width));
  put("image_height", std::to_string(c.image_height));
  put("gabor_frequencies", std::to_string(c.gabor_frequencies));
  put("gabor_orientations", std::to_string(c.gabor_orientations));
  put("gabor_sigma_factor", format_double(c.gabor_sigma_factor));
  put("gabor_support_factor", format_double(c.gabor_support_factor));
  put("gabor_carrier", c.gabor_carrier == Carrier::radians ? "radians" : "cycles");
  put("gabor_stride", std::to_string(c.gabor_stride));
  put("pca_components", std::to_string(c.pca_components));
  put("pca_variance", format_double(c.pca_variance));
  put("cc_components", std::to_string(c.cc_components));
  put("cc_ridge", format_double(c.cc_ridge));
  put("features", feature_mode_name(c.features));
  put("classifier", classifier_name(c.classifier));
  put("svm_c", format_double(c.svm_c));
  put("svm_sigma", format_double(c.svm_sigma));
  put("svm_tol", format_double(c.svm_tol));
  put("svm_max_updates", std::to_string(c.svm_max_updates));
  put("knn_k", std::to_string(c.knn_k));
  put("impostor_ratio", std::to_string(c.impostor_ratio));
  put("seed", std::to_string(c.seed));
  put("threads", std::to_string(c.threads));
  return out.str();
}

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

inline long long config_int(const std::string& value, const std::string& key, int line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const long long v = std::strtoll(begin, &end, 10);
  if (end == begin || *end != '\0')
    throw input_error("config: bad integer for " + key + " (line " + std::to_string(line) + ")");
  return v;
}

inline double config_real(const std::string& value, const std::string& key, int line) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw input_error("config: bad real for " + key + " (line " + std::to_string(line) + ")");
  return v;
}

}  // namespace detail

// Flat `key = value` format; '#' starts a comment, blank lines ignored.
// Unknown or repeated keys are errors with their line number.
inline PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  std::vector<std::string> seen;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw input_error("config: missing '=' (line " + std::to_string(line) + ")");
    const std::string key = detail::trim(s.substr(0, eq));
    const std::string value = detail::trim(s.substr(eq + 1));
    if (key.empty() || value.empty())
      throw input_error("config: empty key or value (line " + std::to_string(line) + ")");
    for (const auto& k : seen)
      if (k == key)
        throw input_error("config: duplicate key " + key + " (line " + std::to_string(line) + ")");
    seen.push_back(key);

    if (key == "image_width") c.image_width = int(detail::config_int(value, key, line));
    else if (key == "image_height") c.image_height = int(detail::config_int(value, key, line));
    else if (key == "gabor_frequencies") c.gabor_frequencies = int(detail::config_int(value, key, line));
    else if (key == "gabor_orientations") c.gabor_orientations = int(detail::config_int(value, key, line));
    else if (key == "gabor_sigma_factor") c.gabor_sigma_factor = detail::config_real(value, key, line);
    else if (key == "gabor_support_factor") c.gabor_support_factor = detail::config_real(value, key, line);
    else if (key == "gabor_carrier") {
      if (value == "radians") c.gabor_carrier = Carrier::radians;
      else if (value == "cycles") c.gabor_carrier = Carrier::cycles;
      else throw input_error("config: gabor_carrier must be radians or cycles (line " +
                             std::to_string(line) + ")");
    } else if (key == "gabor_stride") c.gabor_stride = int(detail::config_int(value, key, line));
    else if (key == "pca_components") c.pca_components = int(detail::config_int(value, key, line));
    else if (key == "pca_variance") c.pca_variance = detail::config_real(value, key, line);
    else if (key == "cc_components") c.cc_components = int(detail::config_int(value, key, line));
    else if (key == "cc_ridge") c.cc_ridge = detail::config_real(value, key, line);
    else if (key == "features") {
      if (value == "fused") c.features = FeatureMode::fused;
      else if (value == "pca") c.features = FeatureMode::pca;
      else if (value == "cc") c.features = FeatureMode::cc;
      else throw input_error("config: features must be fused, pca or cc (line " +
                             std::to_string(line) + ")");
    } else if (key == "classifier") {
      if (value == "svm-rbf") c.classifier = ClassifierKind::svm_rbf;
      else if (value == "svm-linear") c.classifier = ClassifierKind::svm_linear;
      else if (value == "knn") c.classifier = ClassifierKind::knn;
      else throw input_error("config: classifier must be svm-rbf, svm-linear or knn (line " +
                             std::to_string(line) + ")");
    } else if (key == "svm_c") c.svm_c = detail::config_real(value, key, line);
    else if (key == "svm_sigma") c.svm_sigma = detail::config_real(value, key, line);
    else if (key == "svm_tol") c.svm_tol = detail::config_real(value, key, line);
    else if (key == "svm_max_updates") c.svm_max_updates = detail::config_int(value, key, line);
    else if (key == "knn_k") c.knn_k = int(detail::config_int(value, key, line));
    else if (key == "impostor_ratio") c.impostor_ratio = int(detail::config_int(value, key, line));
    else if (key == "seed") {
      const long long v = detail::config_int(value, key, line);
      if (v < 0) throw input_error("config: seed must be >= 0 (line " + std::to_string(line) + ")");
      c.seed = (unsigned long)(v);
    } else if (key == "threads") c.threads = int(detail::config_int(value, key, line));
    else throw input_error("config: unknown key " + key + " (line " + std::to_string(line) + ")");
  }
  validate(c);
  return c;
}

}  // namespace faceverify
