#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

enum class FeatureSource { pca, cc };

struct FeatureVector {
  Vec values;
  FeatureSource source = FeatureSource::pca;
};

// Eigenface basis fitted on mean-centred feature vectors. Components are
// orthonormal, eigenvalues are those of the covariance (1/m) sum eta eta^T,
// sorted descending.
struct PcaModel {
  Vec mean;
  std::vector<Vec> components;
  Vec eigenvalues;
  std::vector<std::string> warnings;

  std::size_t dim() const { return mean.size(); }
  std::size_t count() const { return components.size(); }
};

struct PcaOptions {
  // components > 0 requests an explicit dimension (clipped to m-1);
  // otherwise the smallest dimension capturing variance_fraction is used.
  int components = 0;
  double variance_fraction = 0.95;
};

// Snapshot-method PCA: eigenpairs of the d x d covariance are recovered
// from the m x m Gram matrix of centred samples, so the d x d matrix is
// never formed. Eigenvectors of the Gram matrix map to covariance
// eigenvectors via c = E^T u / ||E^T u||.
inline PcaModel pca_fit(const std::vector<Vec>& faces, const PcaOptions& opt = {}) {
  const std::size_t m = faces.size();
  if (m < 2) throw input_error("pca_fit: need at least 2 faces");
  const std::size_t d = faces[0].size();
  for (const auto& f : faces)
    if (f.size() != d) throw input_error("pca_fit: inconsistent face lengths");
  if (d == 0) throw input_error("pca_fit: zero-dimensional faces");

  PcaModel model;
  model.mean.assign(d, 0.0);
  for (const auto& f : faces)
    for (std::size_t j = 0; j < d; ++j) model.mean[j] += f[j];
  for (double& v : model.mean) v /= double(m);

  std::vector<Vec> centred(m, Vec(d));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < d; ++j) centred[i][j] = faces[i][j] - model.mean[j];

  Matrix gram(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i; j < m; ++j)
      gram(i, j) = gram(j, i) = dot(centred[i], centred[j]);

  EigenDecomposition eig = sym_eigen(gram);
  for (double& v : eig.values)
    if (v < 0.0) v = 0.0;  // clamp roundoff negatives

  // Effective rank: centring always kills at least one direction.
  const double rank_tol = eig.values.empty() ? 0.0 : 1e-12 * std::max(eig.values[0], 1e-300);
  std::size_t rank = 0;
  while (rank < m && eig.values[rank] > rank_tol) ++rank;
  rank = std::min(rank, m - 1);

  std::size_t target;
  if (opt.components > 0) {
    target = std::size_t(opt.components);
    if (target > m - 1) {
      model.warnings.push_back("requested " + std::to_string(target) +
                               " components; clipped to m-1 = " + std::to_string(m - 1));
      target = m - 1;
    }
  } else {
    double total = 0.0;
    for (double v : eig.values) total += v;
    if (total <= 0.0) {
      model.warnings.push_back("all eigenvalues zero: no variance to capture");
      target = 0;
    } else {
      double cum = 0.0;
      target = m - 1;
      for (std::size_t k = 0; k < m; ++k) {
        cum += eig.values[k];
        if (cum >= opt.variance_fraction * total) {
          target = k + 1;
          break;
        }
      }
      target = std::min(target, m - 1);
    }
  }
  if (target > rank) {
    model.warnings.push_back("requested " + std::to_string(target) +
                             " components but data has rank " + std::to_string(rank) +
                             "; zero-variance directions dropped");
    target = rank;
  }

  model.components.reserve(target);
  model.eigenvalues.reserve(target);
  for (std::size_t k = 0; k < target; ++k) {
    Vec c(d, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
      const double u = eig.vectors(i, k);
      if (u == 0.0) continue;
      const Vec& row = centred[i];
      for (std::size_t j = 0; j < d; ++j) c[j] += u * row[j];
    }
    const double n = norm2(c);
    for (double& v : c) v /= n;
    fix_sign(c);
    model.components.push_back(std::move(c));
    model.eigenvalues.push_back(eig.values[k] / double(m));
  }
  return model;
}

inline FeatureVector pca_project(const PcaModel& model, const Vec& face) {
  if (face.size() != model.mean.size())
    throw input_error("pca_project: face length " + std::to_string(face.size()) +
                      " != model dimension " + std::to_string(model.mean.size()));
  Vec centred(face.size());
  for (std::size_t j = 0; j < face.size(); ++j) centred[j] = face[j] - model.mean[j];
  FeatureVector out;
  out.source = FeatureSource::pca;
  out.values.reserve(model.components.size());
  for (const auto& c : model.components) out.values.push_back(dot(c, centred));
  return out;
}

inline Vec pca_reconstruct(const PcaModel& model, const Vec& weights) {
  Vec out = model.mean;
  for (std::size_t k = 0; k < weights.size() && k < model.components.size(); ++k)
    for (std::size_t j = 0; j < out.size(); ++j)
      out[j] += weights[k] * model.components[k][j];
  return out;
}

// Canonical-covariate basis: directions are eigenvectors of
// (Sigma + ridge I)^{-1} beta where beta is the between-class scatter of
// class means (1/(C-1) normalization) and Sigma the pooled within-class
// scatter (1/(N-1)). Solved by Cholesky whitening of Sigma + ridge I.
struct CcModel {
  std::vector<int> class_labels;   // ascending
  std::vector<Vec> class_means;    // parallel to class_labels
  Vec grand_mean;                  // unweighted mean of class means
  std::vector<Vec> directions;     // unit norm, not mutually orthogonal
  Vec eigenvalues;                 // of the whitened problem, descending
  double ridge = 0.0;
  std::vector<std::string> warnings;

  std::size_t dim() const { return grand_mean.size(); }
  std::size_t count() const { return directions.size(); }
};

struct CcOptions {
  int components = 0;   // 0 -> C-1
  double ridge = -1.0;  // < 0 -> 1e-6 * trace(Sigma) / dim
};

inline CcModel cc_fit(const std::vector<Vec>& faces, const std::vector<int>& labels,
                      const CcOptions& opt = {}) {
  const std::size_t n = faces.size();
  if (n == 0 || labels.size() != n)
    throw input_error("cc_fit: need one label per face");
  const std::size_t d = faces[0].size();
  for (const auto& f : faces)
    if (f.size() != d) throw input_error("cc_fit: inconsistent face lengths");

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
  const std::size_t c = by_class.size();
  if (c < 2) throw input_error("cc_fit: need at least 2 classes");
  if (n < c + 1)
    throw input_error("cc_fit: need at least C+1 = " + std::to_string(c + 1) +
                      " samples, got " + std::to_string(n));

  CcModel model;
  model.grand_mean.assign(d, 0.0);
  for (const auto& [label, idx] : by_class) {
    Vec mu(d, 0.0);
    for (std::size_t i : idx)
      for (std::size_t j = 0; j < d; ++j) mu[j] += faces[i][j];
    for (double& v : mu) v /= double(idx.size());
    for (std::size_t j = 0; j < d; ++j) model.grand_mean[j] += mu[j];
    model.class_labels.push_back(label);
    model.class_means.push_back(std::move(mu));
  }
  for (double& v : model.grand_mean) v /= double(c);

  Matrix between(d, d);
  for (const auto& mu : model.class_means) {
    Vec diff(d);
    for (std::size_t j = 0; j < d; ++j) diff[j] = mu[j] - model.grand_mean[j];
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i; j < d; ++j) between(i, j) += diff[i] * diff[j];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j)
      between(j, i) = between(i, j) = between(i, j) / double(c - 1);

  Matrix within(d, d);
  {
    std::size_t ci = 0;
    for (const auto& [label, idx] : by_class) {
      const Vec& mu = model.class_means[ci++];
      for (std::size_t i : idx) {
        Vec diff(d);
        for (std::size_t j = 0; j < d; ++j) diff[j] = faces[i][j] - mu[j];
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t s = r; s < d; ++s) within(r, s) += diff[r] * diff[s];
      }
    }
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i; j < d; ++j)
      within(j, i) = within(i, j) = within(i, j) / double(n - 1);

  double trace = 0.0;
  for (std::size_t i = 0; i < d; ++i) trace += within(i, i);
  model.ridge = opt.ridge >= 0.0 ? opt.ridge : 1e-6 * trace / double(d);

  Matrix ridged = within;
  for (std::size_t i = 0; i < d; ++i) ridged(i, i) += model.ridge;

  Matrix chol;
  try {
    chol = cholesky(ridged);
  } catch (const compute_error&) {
    throw compute_error(
        "cc_fit: within-class scatter plus ridge is numerically singular; "
        "increase the ridge (current " + std::to_string(model.ridge) + ")");
  }

  // Whitened problem: W = L^{-1} beta L^{-T} is symmetric; its
  // eigenvectors map back through L^{-T}.
  Matrix half(d, d);
  for (std::size_t col = 0; col < d; ++col) {
    Vec b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = between(i, col);
    Vec x = solve_lower(chol, b);
    for (std::size_t i = 0; i < d; ++i) half(i, col) = x[i];
  }
  Matrix whitened(d, d);
  for (std::size_t row = 0; row < d; ++row) {
    Vec b(d);
    for (std::size_t i = 0; i < d; ++i) b[i] = half(row, i);
    Vec x = solve_lower(chol, b);
    for (std::size_t i = 0; i < d; ++i) whitened(row, i) = x[i];
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j) {
      const double avg = 0.5 * (whitened(i, j) + whitened(j, i));
      whitened(i, j) = whitened(j, i) = avg;
    }

  EigenDecomposition eig = sym_eigen(whitened);

  std::size_t target = c - 1;
  if (opt.components > 0) {
    target = std::size_t(opt.components);
    if (target > c - 1) {
      model.warnings.push_back("requested " + std::to_string(target) +
                               " directions; clipped to C-1 = " + std::to_string(c - 1));
      target = c - 1;
    }
  }
  target = std::min(target, d);

  double btrace = 0.0;
  for (std::size_t i = 0; i < d; ++i) btrace += between(i, i);
  if (!eig.values.empty() && eig.values[0] <= 1e-12 * std::max(1.0, btrace))
    model.warnings.push_back("no between-class variance: all eigenvalues ~ 0");

  for (std::size_t k = 0; k < target; ++k) {
    Vec u(d);
    for (std::size_t i = 0; i < d; ++i) u[i] = eig.vectors(i, k);
    Vec v = solve_lower_transposed(chol, u);
    const double nrm = norm2(v);
    if (nrm > 0.0)
      for (double& x : v) x /= nrm;
    fix_sign(v);
    model.directions.push_back(std::move(v));
    model.eigenvalues.push_back(eig.values[k]);
  }
  return model;
}

inline FeatureVector cc_project(const CcModel& model, const Vec& face) {
  if (face.size() != model.grand_mean.size())
    throw input_error("cc_project: face length " + std::to_string(face.size()) +
                      " != model dimension " + std::to_string(model.grand_mean.size()));
  Vec centred(face.size());
  for (std::size_t j = 0; j < face.size(); ++j)
    centred[j] = face[j] - model.grand_mean[j];
  FeatureVector out;
  out.source = FeatureSource::cc;
  out.values.reserve(model.directions.size());
  for (const auto& v : model.directions) out.values.push_back(dot(v, centred));
  return out;
}

}  // namespace faceverify
