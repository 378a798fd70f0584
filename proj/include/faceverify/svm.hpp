#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

enum class KernelKind { linear, rbf };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double sigma = 1.0;  // rbf width; K(x,y) = exp(-||x-y||^2 / (2 sigma^2))
};

inline double kernel_eval(const KernelSpec& spec, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw input_error("kernel_eval: length mismatch");
  if (spec.kind == KernelKind::linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
  }
  if (!(spec.sigma > 0.0)) throw input_error("kernel_eval: rbf sigma must be > 0");
  return std::exp(-squared_distance(x, y) / (2.0 * spec.sigma * spec.sigma));
}

// Maximum-margin binary classifier in dual form. Only support vectors
// (alpha > 0) are retained; for the linear kernel the collapsed weight
// vector omega = sum alpha_i y_i x_i is precomputed so scoring does not
// touch the support vectors.
struct SvmModel {
  std::vector<Vec> support_vectors;
  Vec alphas;                  // 0 < alpha_i <= C
  std::vector<int> labels;     // +1 / -1 per support vector
  double bias = 0.0;
  KernelSpec kernel;
  double c = 1.0;
  std::size_t dim = 0;
  Vec omega;                   // linear kernel only
  double kkt_residual = 0.0;   // final max KKT violation on the training set
  long iterations = 0;
  std::vector<std::size_t> sv_indices;  // positions in the training set

  std::size_t count() const { return support_vectors.size(); }
};

struct SvmOptions {
  double c = 10.0;
  double tol = 1e-3;        // KKT tolerance
  long max_updates = 100000;
  std::size_t cache_mb = 256;
};

namespace detail {

// FIFO cache of kernel matrix rows. Rows i and j stay pinned while the
// solver updates a pair.
class KernelRowCache {
public:
  template <typename KernelFn>
  KernelRowCache(std::size_t n, std::size_t capacity_rows, KernelFn)
      : n_(n), slot_of_row_(n, -1) {
    capacity_ = std::max<std::size_t>(3, std::min(capacity_rows, n));
    data_.assign(capacity_, Vec(n_));
    row_of_slot_.assign(capacity_, -1);
  }

  template <typename KernelFn>
  const double* get(std::size_t row, long pin_a, long pin_b, KernelFn&& kernel_row) {
    if (slot_of_row_[row] >= 0) return data_[std::size_t(slot_of_row_[row])].data();
    std::size_t slot;
    if (used_ < capacity_) {
      slot = used_++;
    } else {
      // evict the oldest unpinned slot
      for (;;) {
        slot = fifo_.front();
        fifo_.pop_front();
        const long victim = row_of_slot_[slot];
        if (victim != pin_a && victim != pin_b) {
          slot_of_row_[std::size_t(victim)] = -1;
          break;
        }
        fifo_.push_back(slot);
      }
    }
    kernel_row(row, data_[slot].data());
    row_of_slot_[slot] = long(row);
    slot_of_row_[row] = long(slot);
    fifo_.push_back(slot);
    return data_[slot].data();
  }

private:
  std::size_t n_;
  std::size_t capacity_ = 0;
  std::size_t used_ = 0;
  std::vector<long> slot_of_row_;
  std::vector<long> row_of_slot_;
  std::vector<Vec> data_;
  std::deque<std::size_t> fifo_;
};

}  // namespace detail

// SMO dual solver with maximal-violating-pair working-set selection.
// Deterministic: ties in the selection go to the lowest index. Throws
// after max_updates pair updates without reaching the KKT tolerance.
inline SvmModel svm_train(const std::vector<Vec>& samples, const std::vector<int>& labels,
                          const KernelSpec& kernel, const SvmOptions& opt = {}) {
  const std::size_t n = samples.size();
  if (n < 2 || labels.size() != n)
    throw input_error("svm_train: need >= 2 labelled samples");
  if (!(opt.c > 0.0)) throw input_error("svm_train: C must be > 0");
  bool has_pos = false, has_neg = false;
  for (int y : labels) {
    if (y == 1) has_pos = true;
    else if (y == -1) has_neg = true;
    else throw input_error("svm_train: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw input_error("svm_train: both classes must be present");
  const std::size_t d = samples[0].size();
  for (const auto& s : samples)
    if (s.size() != d) throw input_error("svm_train: inconsistent sample lengths");

  const double c = opt.c;
  auto kernel_row = [&](std::size_t row, double* out) {
    for (std::size_t t = 0; t < n; ++t) out[t] = kernel_eval(kernel, samples[row], samples[t]);
  };
  const std::size_t cache_rows = (opt.cache_mb << 20) / std::max<std::size_t>(1, n * 8);
  detail::KernelRowCache cache(n, cache_rows, kernel_row);

  Vec alpha(n, 0.0);
  Vec diag(n);
  for (std::size_t t = 0; t < n; ++t) diag[t] = kernel_eval(kernel, samples[t], samples[t]);
  // gradient of 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij
  Vec grad(n, -1.0);

  auto in_up = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] < c) || (labels[t] == -1 && alpha[t] > 0.0);
  };
  auto in_low = [&](std::size_t t) {
    return (labels[t] == 1 && alpha[t] > 0.0) || (labels[t] == -1 && alpha[t] < c);
  };

  long updates = 0;
  double violation = 0.0;
  for (;;) {
    long i = -1, j = -1;
    double up_max = -std::numeric_limits<double>::infinity();
    double low_min = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double v = -labels[t] * grad[t];
      if (in_up(t) && v > up_max) {
        up_max = v;
        i = long(t);
      }
      if (in_low(t) && v < low_min) {
        low_min = v;
        j = long(t);
      }
    }
    violation = up_max - low_min;
    if (i < 0 || j < 0 || violation <= opt.tol) break;
    if (updates >= opt.max_updates)
      throw compute_error("svm_train: no convergence after " +
                          std::to_string(opt.max_updates) +
                          " updates (KKT residual " + std::to_string(violation) + ")");

    const std::size_t ii = std::size_t(i), jj = std::size_t(j);
    const double yi = labels[ii], yj = labels[jj];
    const double* ki = cache.get(ii, i, j, kernel_row);
    const double* kj = cache.get(jj, i, j, kernel_row);

    // errors E_t = u_t - y_t recovered from the gradient: u_t = y_t (grad_t + 1)
    const double ei = yi * (grad[ii] + 1.0) - yi;
    const double ej = yj * (grad[jj] + 1.0) - yj;
    const double s = yi * yj;
    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, alpha[jj] - alpha[ii]);
      hi = std::min(c, c + alpha[jj] - alpha[ii]);
    } else {
      lo = std::max(0.0, alpha[ii] + alpha[jj] - c);
      hi = std::min(c, alpha[ii] + alpha[jj]);
    }
    double eta = diag[ii] + diag[jj] - 2.0 * ki[jj];
    if (eta <= 1e-12) eta = 1e-12;  // degenerate pair: step lands on lo or hi
    double aj = alpha[jj] + yj * (ei - ej) / eta;
    aj = std::min(hi, std::max(lo, aj));
    double ai = alpha[ii] - s * (aj - alpha[jj]);
    ai = std::min(c, std::max(0.0, ai));
    // snap rounding dust onto the box, folding the correction into the
    // deltas; otherwise a spent variable can linger in the working sets
    // and pin the selection to a permanent zero-length step
    const double snap = 1e-12 * c;
    if (aj < snap) aj = 0.0;
    else if (aj > c - snap) aj = c;
    if (ai < snap) ai = 0.0;
    else if (ai > c - snap) ai = c;
    const double delta_j = aj - alpha[jj];
    const double delta_i = ai - alpha[ii];

    for (std::size_t t = 0; t < n; ++t)
      grad[t] += labels[t] * (yi * ki[t] * delta_i + yj * kj[t] * delta_j);
    alpha[ii] = ai;
    alpha[jj] = aj;
    ++updates;
  }

  SvmModel model;
  model.kernel = kernel;
  model.c = c;
  model.dim = d;
  model.kkt_residual = std::max(violation, 0.0);
  model.iterations = updates;

  // bias from free support vectors, else the violating-pair midpoint
  double free_sum = 0.0;
  std::size_t free_count = 0;
  double up_max = -std::numeric_limits<double>::infinity();
  double low_min = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    const double u = labels[t] * (grad[t] + 1.0);
    const double neg_e = labels[t] - u;
    if (alpha[t] > 1e-8 * c && alpha[t] < c * (1.0 - 1e-8)) {
      free_sum += neg_e;
      ++free_count;
    }
    if (in_up(t)) up_max = std::max(up_max, neg_e);
    if (in_low(t)) low_min = std::min(low_min, neg_e);
  }
  if (free_count > 0)
    model.bias = free_sum / double(free_count);
  else if (std::isfinite(up_max) && std::isfinite(low_min))
    model.bias = 0.5 * (up_max + low_min);

  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 1e-12 * c) continue;
    model.support_vectors.push_back(samples[t]);
    model.alphas.push_back(alpha[t]);
    model.labels.push_back(labels[t]);
    model.sv_indices.push_back(t);
  }
  if (model.kernel.kind == KernelKind::linear) {
    model.omega.assign(d, 0.0);
    for (std::size_t k = 0; k < model.count(); ++k)
      for (std::size_t jx = 0; jx < d; ++jx)
        model.omega[jx] += model.alphas[k] * model.labels[k] * model.support_vectors[k][jx];
  }
  return model;
}

// Decision score as the support-vector kernel sum plus bias.
inline double svm_score_kernel_sum(const SvmModel& model, const Vec& x) {
  if (x.size() != model.dim) throw input_error("svm_score: length mismatch");
  double s = model.bias;
  for (std::size_t k = 0; k < model.count(); ++k)
    s += model.alphas[k] * model.labels[k] *
         kernel_eval(model.kernel, model.support_vectors[k], x);
  return s;
}

// Fast path: for the linear kernel the dual collapses to omega . x + b.
inline double svm_score(const SvmModel& model, const Vec& x) {
  if (model.kernel.kind == KernelKind::linear) {
    if (x.size() != model.dim) throw input_error("svm_score: length mismatch");
    double s = model.bias;
    for (std::size_t jx = 0; jx < model.dim; ++jx) s += model.omega[jx] * x[jx];
    return s;
  }
  return svm_score_kernel_sum(model, x);
}

struct SvmDecision {
  double score = 0.0;
  int label = 1;  // score exactly 0 resolves to +1
};

inline SvmDecision svm_decide(const SvmModel& model, const Vec& x) {
  SvmDecision d;
  d.score = svm_score(model, x);
  d.label = d.score >= 0.0 ? 1 : -1;
  return d;
}

// Dual objective sum(alpha) - 1/2 sum alpha_i alpha_j y_i y_j K_ij for a
// full alpha vector over the training set.
inline double svm_dual_objective(const std::vector<Vec>& samples,
                                 const std::vector<int>& labels,
                                 const KernelSpec& kernel, const Vec& alpha) {
  double obj = 0.0;
  for (double a : alpha) obj += a;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (alpha[i] == 0.0) continue;
    for (std::size_t j = 0; j < samples.size(); ++j) {
      if (alpha[j] == 0.0) continue;
      obj -= 0.5 * alpha[i] * alpha[j] * labels[i] * labels[j] *
             kernel_eval(kernel, samples[i], samples[j]);
    }
  }
  return obj;
}

// Median of pairwise Euclidean distances, the default rbf width. For
// large sets a deterministic stride keeps the pair count near 100k.
inline double median_pairwise_distance(const std::vector<Vec>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) throw input_error("median_pairwise_distance: need >= 2 samples");
  const std::size_t total_pairs = n * (n - 1) / 2;
  const std::size_t stride = std::max<std::size_t>(1, total_pairs / 100000);
  Vec dists;
  dists.reserve(total_pairs / stride + 1);
  std::size_t counter = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (counter++ % stride == 0)
        dists.push_back(std::sqrt(squared_distance(samples[i], samples[j])));
  std::sort(dists.begin(), dists.end());
  return dists[dists.size() / 2];
}

}  // namespace faceverify
