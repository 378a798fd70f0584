#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

struct ScoreSet {
  Vec genuine;   // same-subject trial scores
  Vec impostor;  // different-subject trial scores
};

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // fraction of impostor scores >= threshold
  double frr = 0.0;  // fraction of genuine scores < threshold
};

struct RocCurve {
  std::vector<RocPoint> points;  // ascending thresholds with -inf / +inf sentinels
  double eer = 0.0;
  std::size_t n_genuine = 0;
  std::size_t n_impostor = 0;
};

// Sweeps every distinct score (plus infinite sentinels) as a decision
// threshold. A score tie with the threshold counts as acceptance, so an
// impostor at the threshold is accepted and a genuine below it rejected.
// The EER interpolates linearly between the two sweep rows bracketing
// FAR = FRR, carried out on integer trial counts so that equality cases
// come out exact.
inline RocCurve roc(const ScoreSet& scores) {
  if (scores.genuine.empty() || scores.impostor.empty())
    throw input_error("roc: genuine and impostor score lists must be non-empty");
  const double ng = double(scores.genuine.size());
  const double ni = double(scores.impostor.size());

  Vec distinct;
  distinct.reserve(scores.genuine.size() + scores.impostor.size());
  distinct.insert(distinct.end(), scores.genuine.begin(), scores.genuine.end());
  distinct.insert(distinct.end(), scores.impostor.begin(), scores.impostor.end());
  for (double s : distinct)
    if (!std::isfinite(s)) throw input_error("roc: scores must be finite");
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Vec gen_sorted = scores.genuine;
  Vec imp_sorted = scores.impostor;
  std::sort(gen_sorted.begin(), gen_sorted.end());
  std::sort(imp_sorted.begin(), imp_sorted.end());

  const double inf = std::numeric_limits<double>::infinity();
  RocCurve curve;
  curve.n_genuine = scores.genuine.size();
  curve.n_impostor = scores.impostor.size();
  curve.points.reserve(distinct.size() + 2);

  std::vector<double> imp_ge, gen_lt;  // integer counts per sweep row
  auto push = [&](double t, double a, double g) {
    curve.points.push_back({t, a / ni, g / ng});
    imp_ge.push_back(a);
    gen_lt.push_back(g);
  };
  push(-inf, ni, 0.0);
  for (double t : distinct) {
    const auto ge = imp_sorted.end() - std::lower_bound(imp_sorted.begin(), imp_sorted.end(), t);
    const auto lt = std::lower_bound(gen_sorted.begin(), gen_sorted.end(), t) - gen_sorted.begin();
    push(t, double(ge), double(lt));
  }
  push(inf, 0.0, ng);

  std::size_t b = 1;
  while (b < curve.points.size() && curve.points[b].far > curve.points[b].frr) ++b;
  if (b == curve.points.size()) b = curve.points.size() - 1;  // unreachable: +inf row has far 0, frr 1
  const double a1 = imp_ge[b - 1], g1 = gen_lt[b - 1];
  const double a2 = imp_ge[b], g2 = gen_lt[b];
  const double u = a1 * ng - g1 * ni;  // (far1 - frr1) * ni * ng, > 0 by scan
  const double v = g2 * ni - a2 * ng;  // (frr2 - far2) * ni * ng, >= 0
  curve.eer = (u + v > 0.0) ? (a1 * v + a2 * u) / (ni * (u + v)) : curve.points[b - 1].far;

  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    if (curve.points[k].far > curve.points[k - 1].far ||
        curve.points[k].frr < curve.points[k - 1].frr)
      throw compute_error("roc: monotonicity violated");
  }
  return curve;
}

enum class ThresholdPolicyKind { eer, far_at, frr_at };

struct ThresholdPolicy {
  ThresholdPolicyKind kind = ThresholdPolicyKind::eer;
  double target = 0.0;  // far_at / frr_at only
};

namespace detail {

// A sweep row k covers every threshold in (t_{k-1}, t_k]; the midpoint
// of that interval realizes the row's rates and stays robust to small
// score perturbations. Row 1 has no finite lower edge, so its own
// threshold is returned.
inline double region_threshold(const RocCurve& curve, std::size_t k) {
  const double tk = curve.points[k].threshold;
  const double prev = curve.points[k - 1].threshold;
  if (!std::isfinite(prev)) return tk;
  return 0.5 * (prev + tk);
}

inline std::string fmt_rate(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace detail

// Picks an operating threshold from a curve. The infinite sentinel rows
// are never selectable: rejecting everything does not count as meeting
// a FAR target.
inline double select_threshold(const RocCurve& curve, const ThresholdPolicy& policy) {
  if (curve.points.size() < 3)
    throw input_error("select_threshold: curve has no finite sweep rows");
  const std::size_t first = 1, last = curve.points.size() - 2;

  if (policy.kind == ThresholdPolicyKind::eer) {
    if (curve.eer == 0.0) {
      // widest region with zero error on both axes
      double best_width = -1.0, best_t = 0.0;
      for (std::size_t k = first; k <= last; ++k) {
        if (curve.points[k].far != 0.0 || curve.points[k].frr != 0.0) continue;
        const double lo = curve.points[k - 1].threshold;
        const double width = std::isfinite(lo) ? curve.points[k].threshold - lo
                                               : std::numeric_limits<double>::infinity();
        if (width > best_width) {
          best_width = width;
          best_t = detail::region_threshold(curve, k);
        }
      }
      if (best_width >= 0.0) return best_t;
      throw compute_error("select_threshold: eer is 0 but no zero-error region exists");
    }
    std::size_t b = 1;
    while (b < curve.points.size() && curve.points[b].far > curve.points[b].frr) ++b;
    if (b >= curve.points.size()) b = curve.points.size() - 1;
    const auto& p1 = curve.points[b - 1];
    const auto& p2 = curve.points[b];
    if (!std::isfinite(p1.threshold)) return p2.threshold;
    if (!std::isfinite(p2.threshold)) return p1.threshold;
    const double u = p1.far - p1.frr;
    const double w = u + (p2.frr - p2.far);
    const double s = w > 0.0 ? u / w : 0.0;
    return p1.threshold + s * (p2.threshold - p1.threshold);
  }

  if (policy.kind == ThresholdPolicyKind::far_at) {
    if (!(policy.target >= 0.0 && policy.target <= 1.0))
      throw input_error("select_threshold: far target must be in [0,1]");
    double best = 1.0;
    for (std::size_t k = first; k <= last; ++k) {
      best = std::min(best, curve.points[k].far);
      if (curve.points[k].far <= policy.target) return detail::region_threshold(curve, k);
    }
    throw compute_error("select_threshold: far target " + detail::fmt_rate(policy.target) +
                        " unreachable; best achievable far is " + detail::fmt_rate(best));
  }

  if (!(policy.target >= 0.0 && policy.target <= 1.0))
    throw input_error("select_threshold: frr target must be in [0,1]");
  double best = 1.0;
  for (std::size_t k = last + 1; k-- > first;) {
    best = std::min(best, curve.points[k].frr);
    if (curve.points[k].frr <= policy.target) return detail::region_threshold(curve, k);
  }
  throw compute_error("select_threshold: frr target " + detail::fmt_rate(policy.target) +
                      " unreachable; best achievable frr is " + detail::fmt_rate(best));
}

inline double recognition_rate(std::size_t genuine_accepts, std::size_t impostor_rejects,
                               std::size_t total_trials) {
  if (total_trials == 0) throw input_error("recognition_rate: zero trials");
  if (genuine_accepts + impostor_rejects > total_trials)
    throw input_error("recognition_rate: correct decisions exceed trial count");
  return double(genuine_accepts + impostor_rejects) / double(total_trials);
}

}  // namespace faceverify
