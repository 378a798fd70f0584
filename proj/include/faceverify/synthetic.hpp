#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>
#include <random>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/image.hpp"
#include "faceverify/manifest.hpp"

namespace faceverify {

struct SyntheticOptions {
  int subjects = 10;
  int instances = 12;     // per subject
  int side = 32;
  double noise_sigma = 0.05;
  int max_shift = 2;      // pixels, uniform integer shift per instance
  double eval_ratio = 0.2;
  double test_ratio = 0.2;
  unsigned long seed = 0;
};

// Smooth random field: a handful of low-frequency cosines with random
// phases, rescaled into [0.15, 0.85] so shift and noise stay in gamut.
inline GrayImage synthetic_base(int side, std::mt19937& rng) {
  if (side < 4) throw input_error("synthetic_base: side must be >= 4");
  std::uniform_int_distribution<int> freq(0, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  struct Wave {
    double u, v, amp, phi;
  };
  std::vector<Wave> waves;
  while (waves.size() < 6) {
    const int u = freq(rng), v = freq(rng);
    const double phi = phase(rng);
    if (u == 0 && v == 0) continue;
    waves.push_back({double(u), double(v), 1.0 / (1.0 + u + v), phi});
  }
  GrayImage img;
  img.width = side;
  img.height = side;
  img.pixels.assign(std::size_t(side) * side, 0.0);
  double lo = 1e300, hi = -1e300;
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) {
      double v = 0.0;
      for (const Wave& w : waves)
        v += w.amp * std::cos(2.0 * std::numbers::pi * (w.u * c + w.v * r) / side + w.phi);
      img.pixels[std::size_t(r) * side + c] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  const double span = hi > lo ? hi - lo : 1.0;
  for (double& p : img.pixels) p = 0.15 + 0.7 * (p - lo) / span;
  return img;
}

// Integer shift with edge clamping plus additive Gaussian noise, clamped
// back into [0,1].
inline GrayImage synthetic_instance(const GrayImage& base, int dx, int dy,
                                    double noise_sigma, std::mt19937& rng) {
  GrayImage out;
  out.width = base.width;
  out.height = base.height;
  out.pixels.resize(base.pixels.size());
  std::normal_distribution<double> noise(0.0, noise_sigma);
  for (int r = 0; r < base.height; ++r)
    for (int c = 0; c < base.width; ++c) {
      const int sr = std::clamp(r - dy, 0, base.height - 1);
      const int sc = std::clamp(c - dx, 0, base.width - 1);
      double v = base.at(sr, sc);
      if (noise_sigma > 0.0) v += noise(rng);
      out.pixels[std::size_t(r) * base.width + c] = std::clamp(v, 0.0, 1.0);
    }
  return out;
}

// Writes subject_<s>/img_<i>.pgm under dir and returns a manifest with a
// per-subject train/eval/test split: the first instances train, then
// floor(n * eval_ratio) eval, then floor(n * test_ratio) test.
inline DatasetManifest write_synthetic_dataset(const std::filesystem::path& dir,
                                               const SyntheticOptions& opt) {
  if (opt.subjects < 2) throw input_error("synthetic dataset: need >= 2 subjects");
  if (opt.instances < 3) throw input_error("synthetic dataset: need >= 3 instances");
  if (opt.eval_ratio < 0.0 || opt.test_ratio < 0.0 || opt.eval_ratio + opt.test_ratio >= 1.0)
    throw input_error("synthetic dataset: ratios must be >= 0 and sum below 1");
  const int n_eval = int(std::floor(opt.instances * opt.eval_ratio));
  const int n_test = int(std::floor(opt.instances * opt.test_ratio));
  const int n_train = opt.instances - n_eval - n_test;
  if (n_train < 1 || n_eval < 1 || n_test < 1)
    throw input_error("synthetic dataset: every split must get at least one instance");

  std::filesystem::create_directories(dir);
  std::mt19937 rng(opt.seed);
  std::uniform_int_distribution<int> shift(-opt.max_shift, opt.max_shift);
  DatasetManifest manifest;
  char name[64];
  for (int s = 0; s < opt.subjects; ++s) {
    const GrayImage base = synthetic_base(opt.side, rng);
    std::snprintf(name, sizeof(name), "subject_%02d", s);
    const std::filesystem::path subject_dir = dir / name;
    std::filesystem::create_directories(subject_dir);
    for (int i = 0; i < opt.instances; ++i) {
      const int dx = opt.max_shift > 0 ? shift(rng) : 0;
      const int dy = opt.max_shift > 0 ? shift(rng) : 0;
      const GrayImage img = synthetic_instance(base, dx, dy, opt.noise_sigma, rng);
      std::snprintf(name, sizeof(name), "img_%02d.pgm", i);
      const std::filesystem::path path = subject_dir / name;
      save_pgm(img, path.string());
      ManifestEntry e;
      e.path = path.string();
      e.subject = s;
      e.split = i < n_train ? Split::train : (i < n_train + n_eval ? Split::eval : Split::test);
      manifest.entries.push_back(e);
    }
  }
  return manifest;
}

}  // namespace faceverify
