#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

struct KnnModel {
  std::vector<Vec> samples;
  std::vector<int> labels;  // +1 / -1
  std::size_t k = 5;
  std::size_t dim = 0;
};

inline KnnModel knn_fit(const std::vector<Vec>& samples, const std::vector<int>& labels,
                        std::size_t k) {
  if (samples.empty() || samples.size() != labels.size())
    throw input_error("knn_fit: need labelled samples");
  if (k == 0) throw input_error("knn_fit: k must be >= 1");
  if (k > samples.size())
    throw input_error("knn_fit: k exceeds the gallery size");
  const std::size_t d = samples[0].size();
  for (const auto& s : samples)
    if (s.size() != d) throw input_error("knn_fit: inconsistent sample lengths");
  for (int y : labels)
    if (y != 1 && y != -1) throw input_error("knn_fit: labels must be +1 or -1");
  KnnModel m;
  m.samples = samples;
  m.labels = labels;
  m.k = k;
  m.dim = d;
  return m;
}

namespace detail {

struct Neighbour {
  double dist2;
  std::size_t index;
};

inline std::vector<Neighbour> nearest(const KnnModel& model, const Vec& x) {
  if (x.size() != model.dim) throw input_error("knn: length mismatch");
  std::vector<Neighbour> all(model.samples.size());
  for (std::size_t i = 0; i < model.samples.size(); ++i)
    all[i] = {squared_distance(model.samples[i], x), i};
  const std::size_t k = std::min(model.k, all.size());
  std::partial_sort(all.begin(), all.begin() + long(k), all.end(),
                    [](const Neighbour& a, const Neighbour& b) {
                      if (a.dist2 != b.dist2) return a.dist2 < b.dist2;
                      return a.index < b.index;
                    });
  all.resize(k);
  return all;
}

}  // namespace detail

// Majority vote over the k nearest samples by Euclidean distance. A
// vote tie resolves to the class with the smaller summed distance among
// the tied neighbours, then to the lower label.
inline int knn_decide(const KnnModel& model, const Vec& x) {
  const auto nb = detail::nearest(model, x);
  int votes = 0;
  double dist_pos = 0.0, dist_neg = 0.0;
  for (const auto& n : nb) {
    const double d = std::sqrt(n.dist2);
    if (model.labels[n.index] == 1) {
      ++votes;
      dist_pos += d;
    } else {
      --votes;
      dist_neg += d;
    }
  }
  if (votes > 0) return 1;
  if (votes < 0) return -1;
  if (dist_pos != dist_neg) return dist_pos < dist_neg ? 1 : -1;
  return -1;
}

// Continuous score for threshold sweeps: distance-weighted vote
// sum(y_i w_i) / sum(w_i) with w_i = 1 / (1 + d_i), in [-1, 1].
inline double knn_score(const KnnModel& model, const Vec& x) {
  const auto nb = detail::nearest(model, x);
  double num = 0.0, den = 0.0;
  for (const auto& n : nb) {
    const double w = 1.0 / (1.0 + std::sqrt(n.dist2));
    num += model.labels[n.index] * w;
    den += w;
  }
  return den > 0.0 ? num / den : 0.0;
}

}  // namespace faceverify
