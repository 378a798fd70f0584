#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "faceverify/errors.hpp"

namespace faceverify {

using Vec = std::vector<double>;

// Dense row-major matrix. Small by design: it only ever holds kernels,
// response maps, Gram matrices and scatter matrices, never the full
// Gabor-feature covariance.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vec a;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), a(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return a[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return a[r * cols + c]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    throw input_error("dot: length mismatch (" + std::to_string(x.size()) +
                      " vs " + std::to_string(y.size()) + ")");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

inline double squared_distance(const Vec& x, const Vec& y) {
  if (x.size() != y.size())
    throw input_error("squared_distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

inline double norm2(const Vec& x) { return std::sqrt(dot(x, x)); }

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.a) s += v * v;
  return std::sqrt(s);
}

struct EigenDecomposition {
  Vec values;      // descending
  Matrix vectors;  // column k is the eigenvector for values[k]
};

// Flip v so its largest-magnitude entry is positive. Ties go to the
// lowest index. Keeps eigenvector output deterministic.
inline void fix_sign(Vec& v) {
  std::size_t arg = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (std::fabs(v[i]) > best) {
      best = std::fabs(v[i]);
      arg = i;
    }
  }
  if (!v.empty() && v[arg] < 0.0)
    for (double& x : v) x = -x;
}

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
// Invariants on return: V orthonormal within 1e-9 and
// ||A - V diag(w) V^T||_F <= 1e-8 ||A||_F.
inline EigenDecomposition sym_eigen(const Matrix& m, int max_sweeps = 100) {
  const std::size_t n = m.rows;
  if (n == 0 || m.cols != n)
    throw input_error("sym_eigen: matrix must be square and non-empty");

  double max_abs = 0.0;
  for (double v : m.a) max_abs = std::max(max_abs, std::fabs(v));
  const double sym_tol = 1e-9 * std::max(1.0, max_abs);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::fabs(m(i, j) - m(j, i)) > sym_tol)
        throw input_error("sym_eigen: matrix is not symmetric at (" +
                          std::to_string(i) + "," + std::to_string(j) + ")");

  Matrix w = m;
  Matrix v = Matrix::identity(n);
  const double norm = frobenius_norm(m);
  const double off_target = 1e-13 * std::max(norm, 1e-300);

  auto off_diagonal = [&]() {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) s += 2.0 * w(i, j) * w(i, j);
    return std::sqrt(s);
  };

  bool converged = n == 1 || off_diagonal() <= off_target;
  for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = w(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double tau = (w(q, q) - w(p, p)) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double wkp = w(k, p), wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double wpk = w(p, k), wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal() <= off_target;
  }
  if (!converged)
    throw compute_error("sym_eigen: no convergence after " +
                        std::to_string(max_sweeps) + " sweeps (off-diagonal " +
                        std::to_string(off_diagonal()) + ")");

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return w(i, i) > w(j, j);
  });

  EigenDecomposition out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = w(order[k], order[k]);
    Vec col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = v(i, order[k]);
    fix_sign(col);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = col[i];
  }
  return out;
}

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
inline Matrix cholesky(const Matrix& m) {
  const std::size_t n = m.rows;
  if (n == 0 || m.cols != n)
    throw input_error("cholesky: matrix must be square and non-empty");
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (i == j) {
        if (s <= 0.0)
          throw compute_error(
              "cholesky: matrix not positive definite (pivot " +
              std::to_string(s) + " at " + std::to_string(i) + ")");
        l(i, i) = std::sqrt(s);
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

// Solve L x = b with L lower triangular.
inline Vec solve_lower(const Matrix& l, const Vec& b) {
  const std::size_t n = l.rows;
  Vec x(b);
  for (std::size_t i = 0; i < n; ++i) {
    double s = x[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

// Solve L^T x = b with L lower triangular.
inline Vec solve_lower_transposed(const Matrix& l, const Vec& b) {
  const std::size_t n = l.rows;
  Vec x(b);
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= l(k, i) * x[k];
    x[i] = s / l(i, i);
  }
  return x;
}

}  // namespace faceverify
