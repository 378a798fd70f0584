#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include "faceverify/serialize.hpp"

using namespace faceverify;

namespace {

std::string replaced(std::string text, const std::string& from, const std::string& to) {
  const auto at = text.find(from);
  REQUIRE(at != std::string::npos);
  return text.replace(at, from.size(), to);
}

PcaModel sample_pca() {
  PcaModel m;
  m.mean = {1.5, -2.25};
  m.eigenvalues = {3.75};
  m.components = {{0.6, 0.8}};
  return m;
}

SvmModel sample_linear_svm() {
  SvmModel m;
  m.kernel = {KernelKind::linear, 1.0};
  m.c = 10.0;
  m.bias = -0.125;
  m.dim = 2;
  m.kkt_residual = 5e-4;
  m.alphas = {0.5, 0.25};
  m.labels = {1, -1};
  m.support_vectors = {{1.0, 0.0}, {-1.0, 0.5}};
  m.omega = {0.75, -0.125};
  return m;
}

}  // namespace

TEST_CASE("hash and hex formatting match known vectors", "[serialize]") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ull);
  CHECK(to_hex16(0) == "0000000000000000");
  CHECK(to_hex16(0xcbf29ce484222325ull) == "cbf29ce484222325");
}

TEST_CASE("seventeen digits round-trip doubles exactly", "[serialize][prop]") {
  const double cases[] = {0.0,      -0.0,   1.0 / 3.0, 3.141592653589793,
                          1e308,    5e-324, -2.5e-10,  0.1,
                          123456.75};
  for (double v : cases) {
    const std::string s = format_double(v);
    char* end = nullptr;
    const double back = std::strtod(s.c_str(), &end);
    CHECK(*end == '\0');
    CHECK(std::signbit(back) == std::signbit(v));
    CHECK(back == v);
  }
}

TEST_CASE("writer and reader agree on every record type", "[serialize]") {
  TextWriter w;
  w.scalar("name", std::string("demo"));
  w.scalar("ratio", 0.1);
  w.scalar("count", std::size_t(3));
  w.vec("values", {1.5, -2.5});
  w.ivec("flags", {1, -1, 1});
  w.mat("grid", {{1.0, 2.0}, {3.0, 4.0}}, 2);

  TextReader r(w.str(), "demo");
  CHECK(r.scalar("name") == "demo");
  CHECK(r.scalar_double("ratio") == 0.1);
  CHECK(r.scalar_size("count") == 3);
  CHECK(r.vec("values") == Vec{1.5, -2.5});
  CHECK(r.ivec("flags") == std::vector<int>{1, -1, 1});
  const auto grid = r.mat("grid");
  REQUIRE(grid.size() == 2);
  CHECK(grid[0] == Vec{1.0, 2.0});
  CHECK(grid[1] == Vec{3.0, 4.0});
  CHECK_NOTHROW(r.expect_end());
}

TEST_CASE("reader errors name the offending line", "[serialize]") {
  const std::string text =
      "kind faceverify-pca\nversion 1\ndim 2\ncount 1\nvec mean 2 0 bogus\n";
  CHECK_THROWS_MATCHES(parse_pca(text), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("line 5")));

  TextReader r("vec x 3 1 2\n", "demo");
  CHECK_THROWS_AS(r.vec("x"), input_error);
  TextReader missing("other 1\n", "demo");
  CHECK_THROWS_AS(missing.scalar("wanted"), input_error);
  TextReader trailing("a 1\nextra\n", "demo");
  CHECK(trailing.scalar("a") == "1");
  CHECK_THROWS_MATCHES(trailing.expect_end(), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("trailing")));
}

TEST_CASE("ragged matrices are rejected at write time", "[serialize]") {
  TextWriter w;
  CHECK_THROWS_AS(w.mat("grid", {{1.0, 2.0}, {3.0}}, 2), input_error);
}

TEST_CASE("eigenface models survive a text round trip", "[serialize]") {
  const PcaModel m = sample_pca();
  const std::string text = encode_pca(m);
  const PcaModel back = parse_pca(text);
  CHECK(back.mean == m.mean);
  CHECK(back.eigenvalues == m.eigenvalues);
  CHECK(back.components == m.components);
  CHECK(encode_pca(back) == text);

  CHECK_THROWS_MATCHES(parse_pca(replaced(text, "faceverify-pca", "faceverify-cc")),
                       input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("format tag")));
  CHECK_THROWS_MATCHES(parse_pca(replaced(text, "version 1", "version 7")), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("version")));
  CHECK_THROWS_AS(parse_pca(replaced(text, "dim 2", "dim 3")), input_error);
}

TEST_CASE("canonical models survive a text round trip", "[serialize]") {
  CcModel m;
  m.ridge = 1e-6;
  m.class_labels = {0, 3};
  m.grand_mean = {2.0, 1.0};
  m.class_means = {{0.0, 1.0}, {4.0, 1.0}};
  m.eigenvalues = {8.0};
  m.directions = {{1.0, 0.0}};
  const std::string text = encode_cc(m);
  const CcModel back = parse_cc(text);
  CHECK(back.ridge == m.ridge);
  CHECK(back.class_labels == m.class_labels);
  CHECK(back.grand_mean == m.grand_mean);
  CHECK(back.class_means == m.class_means);
  CHECK(back.eigenvalues == m.eigenvalues);
  CHECK(back.directions == m.directions);
  CHECK(encode_cc(back) == text);
  CHECK_THROWS_AS(parse_cc(replaced(text, "classes 2", "classes 3")), input_error);
}

TEST_CASE("fusion stats survive a text round trip", "[serialize]") {
  FusionStats st;
  st.q = 2;
  st.pca_bounds.lo = {0.0, -1.0};
  st.pca_bounds.hi = {1.0, 2.0};
  st.cc_bounds.lo = {-3.0, 0.0};
  st.cc_bounds.hi = {3.0, 0.5};
  st.mu_pca = {0.5, 0.25};
  st.sigma_pca = {0.3, 0.2};
  st.mu_cc = {0.1, 0.75};
  st.sigma_cc = {0.4, 0.1};
  st.separations = {0.8, 2.2360679774997898};
  st.weights = {0.75, 0.25};
  const std::string text = encode_fusion(st);
  const FusionStats back = parse_fusion(text);
  CHECK(back.q == st.q);
  CHECK(back.pca_bounds.lo == st.pca_bounds.lo);
  CHECK(back.pca_bounds.hi == st.pca_bounds.hi);
  CHECK(back.cc_bounds.lo == st.cc_bounds.lo);
  CHECK(back.cc_bounds.hi == st.cc_bounds.hi);
  CHECK(back.mu_pca == st.mu_pca);
  CHECK(back.sigma_pca == st.sigma_pca);
  CHECK(back.mu_cc == st.mu_cc);
  CHECK(back.sigma_cc == st.sigma_cc);
  CHECK(back.separations == st.separations);
  CHECK(back.weights == st.weights);
  CHECK(encode_fusion(back) == text);
  CHECK_THROWS_AS(parse_fusion(replaced(text, "q 2", "q 3")), input_error);
}

TEST_CASE("margin classifiers survive a text round trip", "[serialize]") {
  const SvmModel m = sample_linear_svm();
  const std::string text = encode_svm(m);
  const SvmModel back = parse_svm(text);
  CHECK(back.kernel.kind == KernelKind::linear);
  CHECK(back.kernel.sigma == m.kernel.sigma);
  CHECK(back.c == m.c);
  CHECK(back.bias == m.bias);
  CHECK(back.dim == m.dim);
  CHECK(back.kkt_residual == m.kkt_residual);
  CHECK(back.alphas == m.alphas);
  CHECK(back.labels == m.labels);
  CHECK(back.support_vectors == m.support_vectors);
  CHECK(back.omega == m.omega);
  CHECK(encode_svm(back) == text);

  // scoring is preserved bit for bit through the text form
  CHECK(svm_score(back, {0.5, -2.0}) == svm_score(m, {0.5, -2.0}));

  CHECK_THROWS_MATCHES(
      parse_svm(replaced(text, "vec omega 2 0.75 -0.125", "vec omega 1 0.75")),
      input_error,
      Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("omega")));
  CHECK_THROWS_MATCHES(parse_svm(replaced(text, "kernel linear", "kernel cubic")),
                       input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("kernel")));

  SvmModel rbf = m;
  rbf.kernel = {KernelKind::rbf, 2.5};
  rbf.omega.clear();
  const SvmModel rbf_back = parse_svm(encode_svm(rbf));
  CHECK(rbf_back.kernel.kind == KernelKind::rbf);
  CHECK(rbf_back.kernel.sigma == 2.5);
  CHECK(rbf_back.omega.empty());
}

TEST_CASE("neighbour models survive a text round trip", "[serialize]") {
  KnnModel m;
  m.k = 2;
  m.dim = 2;
  m.labels = {1, -1, 1};
  m.samples = {{0.0, 0.0}, {1.0, 0.5}, {-1.0, 2.0}};
  const std::string text = encode_knn(m);
  const KnnModel back = parse_knn(text);
  CHECK(back.k == m.k);
  CHECK(back.dim == m.dim);
  CHECK(back.labels == m.labels);
  CHECK(back.samples == m.samples);
  CHECK(encode_knn(back) == text);

  CHECK_THROWS_MATCHES(parse_knn(replaced(text, "k 2", "k 0")), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("k out of range")));
  CHECK_THROWS_MATCHES(parse_knn(replaced(text, "k 2", "k 9")), input_error,
                       Catch::Matchers::MessageMatches(
                           Catch::Matchers::ContainsSubstring("k out of range")));
}
