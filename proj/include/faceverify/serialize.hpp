#pragma once

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/fusion.hpp"
#include "faceverify/knn.hpp"
#include "faceverify/linalg.hpp"
#include "faceverify/subspace.hpp"
#include "faceverify/svm.hpp"

namespace faceverify {

// Shared plain-text model format. Layout per line:
//   <key> <value>                  scalar
//   vec <name> <n> v1 ... vn       real vector on one line
//   ivec <name> <n> v1 ... vn      integer vector on one line
//   mat <name> <rows> <cols>       followed by <rows> lines of <cols> reals
// Reals are printed with 17 significant digits, enough for an exact
// double round trip through decimal text.

inline std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string to_hex16(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

class TextWriter {
public:
  void scalar(const std::string& key, const std::string& value) {
    out_ += key;
    out_ += ' ';
    out_ += value;
    out_ += '\n';
  }
  void scalar(const std::string& key, double v) { scalar(key, format_double(v)); }
  void scalar(const std::string& key, std::size_t v) { scalar(key, std::to_string(v)); }
  void scalar(const std::string& key, int v) { scalar(key, std::to_string(v)); }
  void vec(const std::string& name, const Vec& v) {
    out_ += "vec ";
    out_ += name;
    out_ += ' ';
    out_ += std::to_string(v.size());
    for (double x : v) {
      out_ += ' ';
      out_ += format_double(x);
    }
    out_ += '\n';
  }
  void ivec(const std::string& name, const std::vector<int>& v) {
    out_ += "ivec ";
    out_ += name;
    out_ += ' ';
    out_ += std::to_string(v.size());
    for (int x : v) {
      out_ += ' ';
      out_ += std::to_string(x);
    }
    out_ += '\n';
  }
  void mat(const std::string& name, const std::vector<Vec>& rows, std::size_t cols) {
    out_ += "mat ";
    out_ += name;
    out_ += ' ';
    out_ += std::to_string(rows.size());
    out_ += ' ';
    out_ += std::to_string(cols);
    out_ += '\n';
    for (const Vec& r : rows) {
      if (r.size() != cols) throw input_error("serialize: ragged matrix rows");
      bool first = true;
      for (double x : r) {
        if (!first) out_ += ' ';
        first = false;
        out_ += format_double(x);
      }
      out_ += '\n';
    }
  }
  const std::string& str() const { return out_; }

private:
  std::string out_;
};

class TextReader {
public:
  explicit TextReader(const std::string& text, std::string context = "model")
      : context_(std::move(context)) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) lines_.push_back(line);
  }

  std::string scalar(const std::string& key) {
    auto tokens = next_tokens(2, key);
    if (tokens[0] != key)
      fail("expected key '" + key + "', got '" + tokens[0] + "'");
    return tokens[1];
  }
  double scalar_double(const std::string& key) { return parse_real(scalar(key)); }
  std::size_t scalar_size(const std::string& key) { return parse_count(scalar(key)); }

  Vec vec(const std::string& name) {
    auto tokens = split(take_line("vec " + name));
    if (tokens.size() < 3 || tokens[0] != "vec" || tokens[1] != name)
      fail("expected 'vec " + name + "'");
    const std::size_t n = parse_count(tokens[2]);
    if (tokens.size() != n + 3) fail("vec " + name + ": expected " + std::to_string(n) + " values");
    Vec v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = parse_real(tokens[i + 3]);
    return v;
  }

  std::vector<int> ivec(const std::string& name) {
    auto tokens = split(take_line("ivec " + name));
    if (tokens.size() < 3 || tokens[0] != "ivec" || tokens[1] != name)
      fail("expected 'ivec " + name + "'");
    const std::size_t n = parse_count(tokens[2]);
    if (tokens.size() != n + 3)
      fail("ivec " + name + ": expected " + std::to_string(n) + " values");
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = int(parse_int(tokens[i + 3]));
    return v;
  }

  std::vector<Vec> mat(const std::string& name) {
    auto header = split(take_line("mat " + name));
    if (header.size() != 4 || header[0] != "mat" || header[1] != name)
      fail("expected 'mat " + name + "'");
    const std::size_t rows = parse_count(header[2]);
    const std::size_t cols = parse_count(header[3]);
    std::vector<Vec> m(rows, Vec(cols));
    for (std::size_t r = 0; r < rows; ++r) {
      auto tokens = split(take_line("matrix row"));
      if (tokens.size() != cols) fail("mat " + name + ": row has wrong width");
      for (std::size_t c = 0; c < cols; ++c) m[r][c] = parse_real(tokens[c]);
    }
    return m;
  }

  void expect_end() {
    while (pos_ < lines_.size()) {
      if (!split(lines_[pos_]).empty()) fail("trailing content");
      ++pos_;
    }
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw input_error(context_ + ": " + what + " (line " + std::to_string(pos_) + ")");
  }

private:
  const std::string& take_line(const std::string& expectation) {
    while (pos_ < lines_.size() && split(lines_[pos_]).empty()) ++pos_;
    if (pos_ >= lines_.size()) fail("unexpected end of input, wanted " + expectation);
    return lines_[pos_++];
  }

  std::vector<std::string> next_tokens(std::size_t count, const std::string& expectation) {
    auto tokens = split(take_line(expectation));
    if (tokens.size() != count)
      fail("expected " + std::to_string(count) + " tokens for " + expectation);
    return tokens;
  }

  static std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream in(line);
    std::string t;
    while (in >> t) tokens.push_back(t);
    return tokens;
  }

  double parse_real(const std::string& token) const {
    const char* begin = token.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') fail("bad real value '" + token + "'");
    return v;
  }

  long long parse_int(const std::string& token) const {
    const char* begin = token.c_str();
    char* end = nullptr;
    const long long v = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0') fail("bad integer value '" + token + "'");
    return v;
  }

  std::size_t parse_count(const std::string& token) const {
    const long long v = parse_int(token);
    if (v < 0) fail("negative count '" + token + "'");
    return std::size_t(v);
  }

  std::string context_;
  std::vector<std::string> lines_;
  std::size_t pos_ = 0;
};

namespace detail {

inline void check_format(TextReader& r, const std::string& tag) {
  if (r.scalar("kind") != tag) r.fail("wrong format tag, wanted " + tag);
  if (r.scalar("version") != "1") r.fail("unsupported version");
}

}  // namespace detail

inline std::string encode_pca(const PcaModel& m) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-pca"));
  w.scalar("version", std::string("1"));
  w.scalar("dim", m.dim());
  w.scalar("count", m.count());
  w.vec("mean", m.mean);
  w.vec("eigenvalues", m.eigenvalues);
  w.mat("components", m.components, m.dim());
  return w.str();
}

inline PcaModel parse_pca(const std::string& text) {
  TextReader r(text, "pca model");
  detail::check_format(r, "faceverify-pca");
  const std::size_t dim = r.scalar_size("dim");
  const std::size_t count = r.scalar_size("count");
  PcaModel m;
  m.mean = r.vec("mean");
  m.eigenvalues = r.vec("eigenvalues");
  m.components = r.mat("components");
  r.expect_end();
  if (m.mean.size() != dim || m.components.size() != count ||
      m.eigenvalues.size() != count)
    r.fail("inconsistent dimensions");
  return m;
}

inline std::string encode_cc(const CcModel& m) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-cc"));
  w.scalar("version", std::string("1"));
  w.scalar("dim", m.dim());
  w.scalar("classes", m.class_labels.size());
  w.scalar("count", m.count());
  w.scalar("ridge", m.ridge);
  w.ivec("class_labels", m.class_labels);
  w.vec("grand_mean", m.grand_mean);
  w.mat("class_means", m.class_means, m.dim());
  w.vec("eigenvalues", m.eigenvalues);
  w.mat("directions", m.directions, m.dim());
  return w.str();
}

inline CcModel parse_cc(const std::string& text) {
  TextReader r(text, "cc model");
  detail::check_format(r, "faceverify-cc");
  const std::size_t dim = r.scalar_size("dim");
  const std::size_t classes = r.scalar_size("classes");
  const std::size_t count = r.scalar_size("count");
  CcModel m;
  m.ridge = r.scalar_double("ridge");
  m.class_labels = r.ivec("class_labels");
  m.grand_mean = r.vec("grand_mean");
  m.class_means = r.mat("class_means");
  m.eigenvalues = r.vec("eigenvalues");
  m.directions = r.mat("directions");
  r.expect_end();
  if (m.grand_mean.size() != dim || m.class_labels.size() != classes ||
      m.class_means.size() != classes || m.directions.size() != count ||
      m.eigenvalues.size() != count)
    r.fail("inconsistent dimensions");
  return m;
}

inline std::string encode_fusion(const FusionStats& st) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-fusion"));
  w.scalar("version", std::string("1"));
  w.scalar("q", st.q);
  w.vec("pca_lo", st.pca_bounds.lo);
  w.vec("pca_hi", st.pca_bounds.hi);
  w.vec("cc_lo", st.cc_bounds.lo);
  w.vec("cc_hi", st.cc_bounds.hi);
  w.vec("mu_pca", st.mu_pca);
  w.vec("sigma_pca", st.sigma_pca);
  w.vec("mu_cc", st.mu_cc);
  w.vec("sigma_cc", st.sigma_cc);
  w.vec("separations", st.separations);
  w.vec("weights", st.weights);
  return w.str();
}

inline FusionStats parse_fusion(const std::string& text) {
  TextReader r(text, "fusion stats");
  detail::check_format(r, "faceverify-fusion");
  FusionStats st;
  st.q = r.scalar_size("q");
  st.pca_bounds.lo = r.vec("pca_lo");
  st.pca_bounds.hi = r.vec("pca_hi");
  st.cc_bounds.lo = r.vec("cc_lo");
  st.cc_bounds.hi = r.vec("cc_hi");
  st.mu_pca = r.vec("mu_pca");
  st.sigma_pca = r.vec("sigma_pca");
  st.mu_cc = r.vec("mu_cc");
  st.sigma_cc = r.vec("sigma_cc");
  st.separations = r.vec("separations");
  st.weights = r.vec("weights");
  r.expect_end();
  if (st.pca_bounds.hi.size() != st.pca_bounds.lo.size() ||
      st.cc_bounds.hi.size() != st.cc_bounds.lo.size() ||
      st.mu_pca.size() != st.q || st.sigma_pca.size() != st.q ||
      st.mu_cc.size() != st.q || st.sigma_cc.size() != st.q ||
      st.separations.size() != st.q || st.weights.size() != st.q)
    r.fail("inconsistent dimensions");
  return st;
}

inline std::string encode_svm(const SvmModel& m) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-svm"));
  w.scalar("version", std::string("1"));
  w.scalar("kernel", std::string(m.kernel.kind == KernelKind::linear ? "linear" : "rbf"));
  w.scalar("sigma", m.kernel.sigma);
  w.scalar("c", m.c);
  w.scalar("bias", m.bias);
  w.scalar("dim", m.dim);
  w.scalar("count", m.count());
  w.scalar("kkt_residual", m.kkt_residual);
  w.vec("alphas", m.alphas);
  w.ivec("labels", m.labels);
  w.mat("support_vectors", m.support_vectors, m.dim);
  w.vec("omega", m.omega);
  return w.str();
}

inline SvmModel parse_svm(const std::string& text) {
  TextReader r(text, "svm model");
  detail::check_format(r, "faceverify-svm");
  SvmModel m;
  const std::string kind = r.scalar("kernel");
  if (kind == "linear")
    m.kernel.kind = KernelKind::linear;
  else if (kind == "rbf")
    m.kernel.kind = KernelKind::rbf;
  else
    r.fail("unknown kernel '" + kind + "'");
  m.kernel.sigma = r.scalar_double("sigma");
  m.c = r.scalar_double("c");
  m.bias = r.scalar_double("bias");
  m.dim = r.scalar_size("dim");
  const std::size_t count = r.scalar_size("count");
  m.kkt_residual = r.scalar_double("kkt_residual");
  m.alphas = r.vec("alphas");
  m.labels = r.ivec("labels");
  m.support_vectors = r.mat("support_vectors");
  m.omega = r.vec("omega");
  r.expect_end();
  if (m.alphas.size() != count || m.labels.size() != count ||
      m.support_vectors.size() != count)
    r.fail("inconsistent dimensions");
  if (m.kernel.kind == KernelKind::linear && m.omega.size() != m.dim)
    r.fail("omega length does not match dim");
  return m;
}

inline std::string encode_knn(const KnnModel& m) {
  TextWriter w;
  w.scalar("kind", std::string("faceverify-knn"));
  w.scalar("version", std::string("1"));
  w.scalar("k", m.k);
  w.scalar("dim", m.dim);
  w.scalar("count", m.samples.size());
  w.ivec("labels", m.labels);
  w.mat("samples", m.samples, m.dim);
  return w.str();
}

inline KnnModel parse_knn(const std::string& text) {
  TextReader r(text, "knn model");
  detail::check_format(r, "faceverify-knn");
  KnnModel m;
  m.k = r.scalar_size("k");
  m.dim = r.scalar_size("dim");
  const std::size_t count = r.scalar_size("count");
  m.labels = r.ivec("labels");
  m.samples = r.mat("samples");
  r.expect_end();
  if (m.labels.size() != count || m.samples.size() != count)
    r.fail("inconsistent dimensions");
  if (m.k == 0 || m.k > count) r.fail("k out of range");
  return m;
}

}  // namespace faceverify
