#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

// Per-dimension min/max fitted on training features.
struct MinMaxBounds {
  Vec lo;
  Vec hi;

  std::size_t dim() const { return lo.size(); }
};

inline MinMaxBounds fit_minmax(const std::vector<Vec>& gallery) {
  if (gallery.empty()) throw input_error("fit_minmax: empty gallery");
  const std::size_t d = gallery[0].size();
  MinMaxBounds b;
  b.lo.assign(d, 0.0);
  b.hi.assign(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) b.lo[j] = b.hi[j] = gallery[0][j];
  for (const auto& v : gallery) {
    if (v.size() != d) throw input_error("fit_minmax: inconsistent lengths");
    for (std::size_t j = 0; j < d; ++j) {
      b.lo[j] = std::min(b.lo[j], v[j]);
      b.hi[j] = std::max(b.hi[j], v[j]);
    }
  }
  return b;
}

// Min-max rescaling to [0,1] per dimension; out-of-range test values are
// clamped, a constant dimension maps to 0.5.
inline Vec minmax_normalize(const Vec& v, const MinMaxBounds& bounds) {
  if (v.size() != bounds.dim())
    throw input_error("minmax_normalize: dimension mismatch");
  Vec out(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double range = bounds.hi[j] - bounds.lo[j];
    if (range <= 0.0) {
      out[j] = 0.5;
    } else {
      out[j] = std::min(1.0, std::max(0.0, (v[j] - bounds.lo[j]) / range));
    }
  }
  return out;
}

// Gallery statistics behind the weighted-mean fusion rule. Weights follow
// the per-dimension separation d_i = |mu_pca - mu_cc| / sqrt(s_pca^2 + s_cc^2)
// computed over min-max-normalized training features, then w_i = d_i / sum d.
struct FusionStats {
  std::size_t q = 0;          // fused dimension, min(pca dim, cc dim)
  MinMaxBounds pca_bounds;    // full source dimension
  MinMaxBounds cc_bounds;
  Vec mu_pca, sigma_pca;      // first q dims, over normalized gallery
  Vec mu_cc, sigma_cc;
  Vec separations;            // d_i
  Vec weights;                // w_i, sum to 1

  Vec normalize_pca(const Vec& v) const { return minmax_normalize(v, pca_bounds); }
  Vec normalize_cc(const Vec& v) const { return minmax_normalize(v, cc_bounds); }
};

struct FusedVector {
  Vec values;
};

namespace detail {

inline void mean_stddev(const std::vector<Vec>& rows, std::size_t col, double& mu,
                        double& sigma) {
  mu = 0.0;
  for (const auto& r : rows) mu += r[col];
  mu /= double(rows.size());
  double var = 0.0;
  for (const auto& r : rows) {
    const double d = r[col] - mu;
    var += d * d;
  }
  sigma = std::sqrt(var / double(rows.size()));
}

}  // namespace detail

inline FusionStats fit_fusion(const std::vector<Vec>& pca_gallery,
                              const std::vector<Vec>& cc_gallery) {
  if (pca_gallery.empty() || cc_gallery.empty())
    throw input_error("fit_fusion: empty gallery");
  if (pca_gallery.size() != cc_gallery.size())
    throw input_error("fit_fusion: galleries must pair up one face per row");

  FusionStats st;
  st.pca_bounds = fit_minmax(pca_gallery);
  st.cc_bounds = fit_minmax(cc_gallery);
  st.q = std::min(st.pca_bounds.dim(), st.cc_bounds.dim());
  if (st.q == 0) throw input_error("fit_fusion: zero-dimensional features");

  std::vector<Vec> pca_norm, cc_norm;
  pca_norm.reserve(pca_gallery.size());
  cc_norm.reserve(cc_gallery.size());
  for (const auto& v : pca_gallery) pca_norm.push_back(st.normalize_pca(v));
  for (const auto& v : cc_gallery) cc_norm.push_back(st.normalize_cc(v));

  st.mu_pca.resize(st.q);
  st.sigma_pca.resize(st.q);
  st.mu_cc.resize(st.q);
  st.sigma_cc.resize(st.q);
  st.separations.resize(st.q);
  for (std::size_t i = 0; i < st.q; ++i) {
    detail::mean_stddev(pca_norm, i, st.mu_pca[i], st.sigma_pca[i]);
    detail::mean_stddev(cc_norm, i, st.mu_cc[i], st.sigma_cc[i]);
    const double denom = std::sqrt(st.sigma_pca[i] * st.sigma_pca[i] +
                                   st.sigma_cc[i] * st.sigma_cc[i]);
    // a dimension with no spread in either source carries no separation signal
    st.separations[i] =
        denom > 1e-12 ? std::fabs(st.mu_pca[i] - st.mu_cc[i]) / denom : 0.0;
  }

  double total = 0.0;
  for (double d : st.separations) total += d;
  st.weights.resize(st.q);
  if (total > 0.0) {
    for (std::size_t i = 0; i < st.q; ++i) st.weights[i] = st.separations[i] / total;
  } else {
    for (std::size_t i = 0; i < st.q; ++i) st.weights[i] = 1.0 / double(st.q);
  }
  return st;
}

// Weighted-mean fusion F_i = w_i * (p_i + c_i) / 2 over the first q
// dimensions. Inputs must already be min-max normalized with the fitted
// bounds.
inline FusedVector fuse(const FusionStats& st, const Vec& pca_norm, const Vec& cc_norm) {
  if (pca_norm.size() < st.q || cc_norm.size() < st.q)
    throw input_error("fuse: input shorter than fused dimension");
  FusedVector f;
  f.values.resize(st.q);
  for (std::size_t i = 0; i < st.q; ++i)
    f.values[i] = st.weights[i] * 0.5 * (pca_norm[i] + cc_norm[i]);
  return f;
}

}  // namespace faceverify
