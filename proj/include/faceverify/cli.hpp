#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "faceverify/errors.hpp"
#include "faceverify/metrics.hpp"
#include "faceverify/pipeline.hpp"
#include "faceverify/synthetic.hpp"

namespace faceverify::cli {

namespace detail {

inline ThresholdPolicy parse_policy(const std::string& text) {
  ThresholdPolicy p;
  if (text == "eer") return p;
  auto parse_target = [&](const std::string& value) {
    const char* begin = value.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !(v >= 0.0 && v <= 1.0))
      throw input_error("threshold policy target must be a rate in [0,1], got '" + value + "'");
    return v;
  };
  if (text.rfind("far:", 0) == 0) {
    p.kind = ThresholdPolicyKind::far_at;
    p.target = parse_target(text.substr(4));
    return p;
  }
  if (text.rfind("frr:", 0) == 0) {
    p.kind = ThresholdPolicyKind::frr_at;
    p.target = parse_target(text.substr(4));
    return p;
  }
  throw input_error("threshold policy must be eer, far:<x> or frr:<x>, got '" + text + "'");
}

inline double parse_threshold(const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    throw input_error("threshold must be a real number (inf and -inf allowed), got '" + text +
                      "'");
  return v;
}

inline std::vector<double> parse_ratios(const std::string& text) {
  std::vector<double> r;
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) {
    const char* begin = part.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || v < 0.0)
      throw input_error("ratios must be comma-separated non-negative reals, got '" + text + "'");
    r.push_back(v);
  }
  if (r.size() != 3)
    throw input_error("ratios must have exactly 3 values train,eval,test");
  const double sum = r[0] + r[1] + r[2];
  if (std::abs(sum - 1.0) > 1e-9)
    throw input_error("ratios must sum to 1, got " + format_double(sum));
  if (!(r[0] > 0.0)) throw input_error("train ratio must be > 0");
  return r;
}

inline std::string roc_csv(const RocCurve& curve) {
  std::string out = "threshold,far,frr\n";
  for (const auto& p : curve.points) {
    out += format_double(p.threshold);
    out += ',';
    out += format_double(p.far);
    out += ',';
    out += format_double(p.frr);
    out += '\n';
  }
  out += "# eer=";
  out += format_double(curve.eer);
  out += '\n';
  return out;
}

inline std::string summary_json(const EvalResult& r) {
  nlohmann::json j;
  j["far"] = r.far;
  j["frr"] = r.frr;
  j["eer"] = r.eer;
  j["recognition_rate"] = r.recognition;
  j["threshold"] = r.threshold;
  return j.dump(2) + "\n";
}

inline bool has_pgm_extension(const std::filesystem::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return char(std::tolower(c)); });
  return ext == ".pgm";
}

inline int cmd_split(const std::string& data_dir, const std::string& out_path,
                     const std::string& ratios_text, unsigned long seed, std::ostream& err) {
  const auto ratios = parse_ratios(ratios_text);
  const std::filesystem::path root(data_dir);
  if (!std::filesystem::is_directory(root))
    throw input_error("data directory not found: " + data_dir);

  std::vector<std::filesystem::path> subject_dirs;
  for (const auto& entry : std::filesystem::directory_iterator(root))
    if (entry.is_directory()) subject_dirs.push_back(entry.path());
  std::sort(subject_dirs.begin(), subject_dirs.end());
  if (subject_dirs.empty())
    throw input_error("no subject subdirectories under " + data_dir);

  std::mt19937 rng(seed);
  DatasetManifest manifest;
  for (std::size_t subject = 0; subject < subject_dirs.size(); ++subject) {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(subject_dirs[subject]))
      if (entry.is_regular_file() && has_pgm_extension(entry.path()))
        files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty())
      throw input_error("subject directory has no .pgm files: " +
                        subject_dirs[subject].string());
    std::shuffle(files.begin(), files.end(), rng);

    const std::size_t n = files.size();
    const std::size_t n_eval = std::size_t(double(n) * ratios[1]);
    const std::size_t n_test = std::size_t(double(n) * ratios[2]);
    if (n_eval + n_test >= n)
      throw input_error("subject " + subject_dirs[subject].string() +
                        " has too few images for the requested ratios");
    const std::size_t n_train = n - n_eval - n_test;
    for (std::size_t i = 0; i < n; ++i) {
      ManifestEntry e;
      e.path = std::filesystem::absolute(files[i]).string();
      e.subject = int(subject);
      e.split = i < n_train ? Split::train
                            : (i < n_train + n_eval ? Split::eval : Split::test);
      manifest.entries.push_back(e);
    }
  }
  write_file(out_path, encode_manifest(manifest));
  err << "wrote manifest for " << subject_dirs.size() << " subjects to " << out_path << "\n";
  return 0;
}

inline int cmd_fit(const std::string& config_path, const std::string& manifest_path,
                   const std::string& bundle_dir, std::optional<unsigned long> seed,
                   std::ostream& err) {
  PipelineConfig cfg;
  if (!config_path.empty()) cfg = parse_config(read_file(config_path));
  if (seed) cfg.seed = *seed;
  const DatasetManifest manifest = load_manifest(manifest_path);
  const ModelBundle bundle = fit(manifest, cfg);
  for (const auto& w : bundle.pca.warnings) err << "warning: pca: " << w << "\n";
  for (const auto& w : bundle.cc.warnings) err << "warning: cc: " << w << "\n";
  save_bundle(bundle, bundle_dir);
  err << "bundle written to " << bundle_dir << "\n";
  return 0;
}

inline int cmd_eval(const std::string& bundle_dir, const std::string& manifest_path,
                    const std::string& out_dir, const std::string& policy_text,
                    std::ostream& out, std::ostream& err) {
  const ThresholdPolicy policy = parse_policy(policy_text);
  const ModelBundle bundle = load_bundle(bundle_dir);
  const DatasetManifest manifest = load_manifest(manifest_path);

  const ScoreSet eval_scores = score_split(bundle, manifest, Split::eval);
  const RocCurve eval_curve = roc(eval_scores);
  const double threshold = select_threshold(eval_curve, policy);
  err << "threshold " << format_double(threshold) << " selected on the eval split\n";

  const EvalResult result = evaluate(bundle, manifest, Split::test, threshold);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  write_file(dir / "roc.csv", roc_csv(result.curve));
  const std::string summary = summary_json(result);
  write_file(dir / "summary.json", summary);
  out << summary;
  return 0;
}

inline int cmd_verify(const std::string& bundle_dir, const std::string& image_path,
                      int subject, const std::string& threshold_text, std::ostream& out) {
  const double threshold = parse_threshold(threshold_text);
  if (subject < 0) throw input_error("subject id must be >= 0");
  const ModelBundle bundle = load_bundle(bundle_dir);
  const GrayImage probe = load_pgm(image_path);
  const VerifyResult r = verify(bundle, probe, subject, threshold);
  out << "score=" << format_double(r.score) << " accept=" << (r.accept ? "true" : "false")
      << "\n";
  return 0;
}

inline int cmd_bench(const std::string& out_path, const std::string& sizes_text,
                     unsigned long seed, std::ostream& out, std::ostream& err) {
  std::vector<int> sizes;
  {
    std::istringstream in(sizes_text);
    std::string part;
    while (std::getline(in, part, ',')) {
      const char* begin = part.c_str();
      char* end = nullptr;
      const long v = std::strtol(begin, &end, 10);
      if (end == begin || *end != '\0' || v < 8)
        throw input_error("sizes must be comma-separated integers >= 8, got '" + sizes_text +
                          "'");
      sizes.push_back(int(v));
    }
  }
  if (sizes.size() < 3)
    throw input_error("bench needs at least 3 image sizes");

  std::string csv = "stage,n,images,millis\n";
  auto row = [&](const std::string& stage, int n, std::size_t images, double millis) {
    csv += stage;
    csv += ',';
    csv += std::to_string(n);
    csv += ',';
    csv += std::to_string(images);
    csv += ',';
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", millis);
    csv += buf;
    csv += '\n';
  };

  for (int n : sizes) {
    const std::filesystem::path tmp =
        std::filesystem::temp_directory_path() /
        ("faceverify_bench_" + std::to_string(n) + "_" + std::to_string(seed));
    std::filesystem::remove_all(tmp);
    SyntheticOptions synth;
    synth.subjects = 4;
    synth.instances = 6;
    synth.side = n;
    synth.seed = seed;
    const DatasetManifest manifest = write_synthetic_dataset(tmp, synth);

    PipelineConfig cfg;
    cfg.image_width = n;
    cfg.image_height = n;
    cfg.seed = seed;
    FitTimings t;
    const ModelBundle bundle = fit(manifest, cfg, &t);
    row("gabor", n, t.train_images, t.gabor_ms);
    row("pca_fit", n, t.train_images, t.pca_ms);
    row("cc_fit", n, t.train_images, t.cc_ms);
    row("fusion_fit", n, t.train_images, t.fusion_ms);
    row("svm_train", n, t.train_images, t.classifier_ms);

    using clock = std::chrono::steady_clock;
    const auto start = clock::now();
    std::size_t probes = 0;
    for (const auto& e : manifest.entries) {
      if (e.split != Split::eval) continue;
      verify(bundle, load_pgm(e.path), e.subject, 0.0);
      ++probes;
    }
    row("verify", n, probes,
        std::chrono::duration<double, std::milli>(clock::now() - start).count());
    std::filesystem::remove_all(tmp);
    err << "bench size " << n << " done\n";
  }

  if (out_path.empty())
    out << csv;
  else
    write_file(out_path, csv);
  return 0;
}

}  // namespace detail

// Parses arguments (args[0] is the program name) and runs a subcommand.
// Exit codes: 0 success, 2 validation error, 3 runtime/compute error.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gabor face verification pipeline"};
  app.require_subcommand(1);

  std::string config_path, manifest_path, bundle_dir, out_path;
  std::string data_dir, image_path, threshold_text = "0";
  std::string policy_text = "eer", ratios_text = "0.6,0.2,0.2", sizes_text = "16,24,32";
  int subject = -1;
  unsigned long seed = 0;
  bool seed_given = false;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "random seed")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  CLI::App* split = app.add_subcommand("split", "scan a dataset tree and write a manifest");
  split->add_option("--data", data_dir, "directory of per-subject subdirectories")->required();
  split->add_option("--out", out_path, "manifest CSV to write")->required();
  split->add_option("--ratios", ratios_text, "train,eval,test ratios (default 0.6,0.2,0.2)");
  add_seed(split);

  CLI::App* fit_cmd = app.add_subcommand("fit", "train a model bundle on the train split");
  fit_cmd->add_option("--config", config_path, "pipeline config file (defaults when absent)");
  fit_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
  fit_cmd->add_option("--bundle", bundle_dir, "bundle directory to write")->required();
  add_seed(fit_cmd);

  CLI::App* eval_cmd =
      app.add_subcommand("eval", "select a threshold on eval, report metrics on test");
  eval_cmd->add_option("--bundle", bundle_dir, "fitted bundle directory")->required();
  eval_cmd->add_option("--manifest", manifest_path, "dataset manifest")->required();
  eval_cmd->add_option("--out", out_path, "output directory for roc.csv and summary.json")
      ->required();
  eval_cmd->add_option("--threshold-policy", policy_text, "eer, far:<x> or frr:<x>");

  CLI::App* verify_cmd = app.add_subcommand("verify", "score one probe against a claimed subject");
  verify_cmd->add_option("--bundle", bundle_dir, "fitted bundle directory")->required();
  verify_cmd->add_option("--image", image_path, "probe PGM image")->required();
  verify_cmd->add_option("--subject", subject, "claimed subject id")->required();
  verify_cmd->add_option("--threshold", threshold_text, "decision threshold (inf/-inf allowed)")
      ->required();

  CLI::App* bench_cmd = app.add_subcommand("bench", "per-stage wall-clock timings on synthetic data");
  bench_cmd->add_option("--out", out_path, "CSV output path (stdout when absent)");
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated image sides, at least 3");
  add_seed(bench_cmd);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(int(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (split->parsed()) return detail::cmd_split(data_dir, out_path, ratios_text, seed, err);
    if (fit_cmd->parsed())
      return detail::cmd_fit(config_path, manifest_path, bundle_dir,
                             seed_given ? std::optional<unsigned long>(seed) : std::nullopt,
                             err);
    if (eval_cmd->parsed())
      return detail::cmd_eval(bundle_dir, manifest_path, out_path, policy_text, out, err);
    if (verify_cmd->parsed())
      return detail::cmd_verify(bundle_dir, image_path, subject, threshold_text, out);
    if (bench_cmd->parsed())
      return detail::cmd_bench(out_path, sizes_text, seed, out, err);
    err << "error: no subcommand\n";
    return 2;
  } catch (const input_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const compute_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

inline int run(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace faceverify::cli
