#include <catch2/catch_amalgamated.hpp>

#include <unistd.h>

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "faceverify/cli.hpp"
#include "faceverify/synthetic.hpp"

using namespace faceverify;
namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "faceverify");
  std::ostringstream out, err;
  RunResult r;
  r.code = cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path cli_root() {
  static const fs::path root = [] {
    const fs::path dir =
        fs::temp_directory_path() / ("faceverify_cli_" + std::to_string(::getpid()));
    SyntheticOptions opt;
    opt.subjects = 4;
    opt.instances = 6;
    opt.side = 16;
    opt.noise_sigma = 0.05;
    opt.max_shift = 1;
    opt.seed = 7;
    write_synthetic_dataset(dir / "data", opt);

    PipelineConfig cfg;
    cfg.image_width = 16;
    cfg.image_height = 16;
    cfg.gabor_stride = 4;
    write_file(dir / "config.txt", encode_config(cfg));
    return dir;
  }();
  return root;
}

std::string path_of(const fs::path& p) { return p.string(); }

}  // namespace

TEST_CASE("config text round-trips and rejects malformed input", "[cli]") {
  PipelineConfig cfg;
  cfg.image_width = 64;
  cfg.image_height = 48;
  cfg.gabor_frequencies = 3;
  cfg.gabor_orientations = 4;
  cfg.gabor_carrier = Carrier::cycles;
  cfg.gabor_stride = 2;
  cfg.pca_components = 7;
  cfg.cc_components = 2;
  cfg.cc_ridge = 0.001;
  cfg.features = FeatureMode::cc;
  cfg.classifier = ClassifierKind::knn;
  cfg.svm_sigma = 1.5;
  cfg.knn_k = 3;
  cfg.impostor_ratio = 2;
  cfg.seed = 42;
  cfg.threads = 2;
  const std::string text = encode_config(cfg);
  const PipelineConfig back = parse_config(text);
  CHECK(encode_config(back) == text);

  const PipelineConfig sparse = parse_config("# comment\n\nimage_width = 32 # inline\n");
  CHECK(sparse.image_width == 32);
  CHECK(sparse.image_height == 200);  // untouched keys keep their defaults

  CHECK_THROWS_MATCHES(parse_config("image_width = 32\nimage_width = 64\n"), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("line 2")));
  CHECK_THROWS_MATCHES(parse_config("no_such_key = 1\n"), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("unknown key")));
  CHECK_THROWS_AS(parse_config("image_width 32\n"), input_error);
  CHECK_THROWS_AS(parse_config("image_width = abc\n"), input_error);
  CHECK_THROWS_AS(parse_config("classifier = forest\n"), input_error);
  CHECK_THROWS_AS(parse_config("seed = -1\n"), input_error);
  CHECK_THROWS_AS(parse_config("gabor_stride = 0\n"), input_error);
}

TEST_CASE("threshold policy and ratio parsing", "[cli]") {
  CHECK(cli::detail::parse_policy("eer").kind == ThresholdPolicyKind::eer);
  const ThresholdPolicy far = cli::detail::parse_policy("far:0.01");
  CHECK(far.kind == ThresholdPolicyKind::far_at);
  CHECK(far.target == 0.01);
  const ThresholdPolicy frr = cli::detail::parse_policy("frr:0.25");
  CHECK(frr.kind == ThresholdPolicyKind::frr_at);
  CHECK(frr.target == 0.25);
  CHECK_THROWS_AS(cli::detail::parse_policy("far:1.5"), input_error);
  CHECK_THROWS_AS(cli::detail::parse_policy("bogus"), input_error);

  CHECK(cli::detail::parse_threshold("0.25") == 0.25);
  CHECK(cli::detail::parse_threshold("-inf") == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(cli::detail::parse_threshold("abc"), input_error);

  CHECK(cli::detail::parse_ratios("0.6,0.2,0.2") == std::vector<double>{0.6, 0.2, 0.2});
  CHECK_THROWS_AS(cli::detail::parse_ratios("0.5,0.5"), input_error);
  CHECK_THROWS_AS(cli::detail::parse_ratios("0.5,0.4,0.2"), input_error);
  CHECK_THROWS_AS(cli::detail::parse_ratios("0,0.5,0.5"), input_error);
  CHECK_THROWS_AS(cli::detail::parse_ratios("-0.2,1.0,0.2"), input_error);
}

TEST_CASE("report files have the documented shape", "[cli]") {
  const RocCurve curve = roc({{0.9}, {0.1}});
  const std::string csv = cli::detail::roc_csv(curve);
  CHECK(csv.rfind("threshold,far,frr\n", 0) == 0);
  CHECK(csv.find("# eer=0\n") != std::string::npos);

  EvalResult r;
  r.far = 0.25;
  r.frr = 0.125;
  r.eer = 0.1875;
  r.recognition = 0.8125;
  r.threshold = 0.5;
  const auto j = nlohmann::json::parse(cli::detail::summary_json(r));
  CHECK(j.at("far").get<double>() == 0.25);
  CHECK(j.at("frr").get<double>() == 0.125);
  CHECK(j.at("eer").get<double>() == 0.1875);
  CHECK(j.at("recognition_rate").get<double>() == 0.8125);
  CHECK(j.at("threshold").get<double>() == 0.5);
}

TEST_CASE("help prints and argument errors exit with code 2", "[cli]") {
  const RunResult help = run_cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("split") != std::string::npos);
  CHECK(help.out.find("verify") != std::string::npos);

  CHECK(run_cli({}).code == 2);
  CHECK(run_cli({"frobnicate"}).code == 2);
  CHECK(run_cli({"fit", "--no-such-flag"}).code == 2);
  CHECK(run_cli({"fit", "--manifest", "m.csv"}).code == 2);  // --bundle missing
}

TEST_CASE("dataset splitting writes a loadable manifest", "[cli]") {
  const fs::path root = cli_root();
  const RunResult r = run_cli({"split", "--data", path_of(root / "data"), "--out",
                               path_of(root / "manifest.csv"), "--ratios", "0.6,0.2,0.2",
                               "--seed", "1"});
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  CHECK(r.err.find("4 subjects") != std::string::npos);

  const DatasetManifest manifest = load_manifest(path_of(root / "manifest.csv"));
  REQUIRE(manifest.entries.size() == 24);
  std::map<int, std::map<Split, int>> counts;
  for (const auto& e : manifest.entries) {
    CHECK(fs::path(e.path).is_absolute());
    CHECK(fs::exists(e.path));
    ++counts[e.subject][e.split];
  }
  REQUIRE(counts.size() == 4);
  for (const auto& [subject, per_split] : counts) {
    CHECK(per_split.at(Split::train) == 4);
    CHECK(per_split.at(Split::eval) == 1);
    CHECK(per_split.at(Split::test) == 1);
  }

  CHECK(run_cli({"split", "--data", path_of(root / "data"), "--out",
                 path_of(root / "m2.csv"), "--ratios", "0.5,0.5"})
            .code == 2);
  CHECK(run_cli({"split", "--data", path_of(root / "nowhere"), "--out",
                 path_of(root / "m3.csv")})
            .code == 2);
}

TEST_CASE("fit, eval and verify run end to end deterministically", "[cli]") {
  const fs::path root = cli_root();
  REQUIRE(run_cli({"split", "--data", path_of(root / "data"), "--out",
                   path_of(root / "manifest.csv"), "--seed", "1"})
              .code == 0);

  const RunResult fit_run =
      run_cli({"fit", "--config", path_of(root / "config.txt"), "--manifest",
               path_of(root / "manifest.csv"), "--bundle", path_of(root / "bundle")});
  CAPTURE(fit_run.err);
  REQUIRE(fit_run.code == 0);
  CHECK(fit_run.err.find("bundle written") != std::string::npos);
  for (const char* name :
       {"config", "pca_model", "cc_model", "fusion", "classifier", "gallery", "checksum"})
    CHECK(fs::exists(root / "bundle" / name));

  const RunResult eval_run =
      run_cli({"eval", "--bundle", path_of(root / "bundle"), "--manifest",
               path_of(root / "manifest.csv"), "--out", path_of(root / "report")});
  CAPTURE(eval_run.err);
  REQUIRE(eval_run.code == 0);
  const auto summary = nlohmann::json::parse(eval_run.out);
  for (const char* key : {"far", "frr", "eer", "recognition_rate", "threshold"})
    CHECK(summary.contains(key));
  CHECK(read_file(root / "report" / "summary.json") == eval_run.out);
  const std::string csv = read_file(root / "report" / "roc.csv");
  CHECK(csv.rfind("threshold,far,frr\n", 0) == 0);
  CHECK(csv.find("# eer=") != std::string::npos);

  // a rerun against the same bundle reproduces both reports byte for byte
  REQUIRE(run_cli({"eval", "--bundle", path_of(root / "bundle"), "--manifest",
                   path_of(root / "manifest.csv"), "--out", path_of(root / "report2")})
              .code == 0);
  CHECK(read_file(root / "report2" / "summary.json") ==
        read_file(root / "report" / "summary.json"));
  CHECK(read_file(root / "report2" / "roc.csv") == read_file(root / "report" / "roc.csv"));

  // refitting from scratch with the same config and manifest matches too
  REQUIRE(run_cli({"fit", "--config", path_of(root / "config.txt"), "--manifest",
                   path_of(root / "manifest.csv"), "--bundle", path_of(root / "bundle2")})
              .code == 0);
  REQUIRE(run_cli({"eval", "--bundle", path_of(root / "bundle2"), "--manifest",
                   path_of(root / "manifest.csv"), "--out", path_of(root / "report3")})
              .code == 0);
  CHECK(read_file(root / "report3" / "summary.json") ==
        read_file(root / "report" / "summary.json"));

  // verify one eval image against its own subject
  const DatasetManifest manifest = load_manifest(path_of(root / "manifest.csv"));
  const ManifestEntry* probe = nullptr;
  for (const auto& e : manifest.entries)
    if (e.split == Split::eval) {
      probe = &e;
      break;
    }
  REQUIRE(probe != nullptr);
  const RunResult accept =
      run_cli({"verify", "--bundle", path_of(root / "bundle"), "--image", probe->path,
               "--subject", std::to_string(probe->subject), "--threshold", "-inf"});
  REQUIRE(accept.code == 0);
  CHECK(accept.out.find("accept=true") != std::string::npos);
  const RunResult reject =
      run_cli({"verify", "--bundle", path_of(root / "bundle"), "--image", probe->path,
               "--subject", std::to_string(probe->subject), "--threshold", "inf"});
  REQUIRE(reject.code == 0);
  CHECK(reject.out.find("accept=false") != std::string::npos);

  CHECK(run_cli({"verify", "--bundle", path_of(root / "bundle"), "--image", probe->path,
                 "--subject", "99", "--threshold", "0"})
            .code == 2);
  CHECK(run_cli({"verify", "--bundle", path_of(root / "bundle"), "--image", probe->path,
                 "--subject", "-3", "--threshold", "0"})
            .code == 2);
  CHECK(run_cli({"verify", "--bundle", path_of(root / "bundle"), "--image", probe->path,
                 "--subject", "0", "--threshold", "abc"})
            .code == 2);
  CHECK(run_cli({"eval", "--bundle", path_of(root / "bundle"), "--manifest",
                 path_of(root / "manifest.csv"), "--out", path_of(root / "r4"),
                 "--threshold-policy", "far:1.5"})
            .code == 2);
}

TEST_CASE("an exhausted solver budget surfaces as a runtime failure", "[cli]") {
  const fs::path root = cli_root();
  REQUIRE(run_cli({"split", "--data", path_of(root / "data"), "--out",
                   path_of(root / "manifest_x.csv"), "--seed", "1"})
              .code == 0);
  PipelineConfig cfg;
  cfg.image_width = 16;
  cfg.image_height = 16;
  cfg.gabor_stride = 4;
  cfg.svm_tol = 1e-9;
  cfg.svm_max_updates = 1;
  write_file(root / "config_tiny_budget.txt", encode_config(cfg));
  const RunResult r =
      run_cli({"fit", "--config", path_of(root / "config_tiny_budget.txt"), "--manifest",
               path_of(root / "manifest_x.csv"), "--bundle", path_of(root / "bundle_x")});
  CHECK(r.code == 3);
  CHECK(r.err.find("no convergence") != std::string::npos);
}

TEST_CASE("benchmark command reports per-stage timings", "[cli]") {
  const fs::path root = cli_root();
  const RunResult r =
      run_cli({"bench", "--sizes", "8,10,12", "--out", path_of(root / "bench.csv")});
  CAPTURE(r.err);
  REQUIRE(r.code == 0);
  const std::string csv = read_file(root / "bench.csv");
  CHECK(csv.rfind("stage,n,images,millis\n", 0) == 0);
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + 3 * 6);  // header plus six stages per size

  CHECK(run_cli({"bench", "--sizes", "8,10"}).code == 2);
  CHECK(run_cli({"bench", "--sizes", "4,8,10"}).code == 2);
}
