#pragma once

#include <cmath>
#include <numbers>
#include <thread>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/image.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

// Carrier convention for the cosine term. The filter frequency f is given
// in radians/pixel, so the default carrier is cos(f*P). The alternative
// treats f as cycles/pixel and uses cos(2*pi*f*P).
enum class Carrier { radians, cycles };

struct GaborParams {
  double frequency = 0.0;  // radians/pixel along theta
  double theta = 0.0;      // orientation; the kernel is pi-periodic in theta
  double sigma_x = 1.0;    // envelope std dev along the rotated x axis
  double sigma_y = 1.0;
  int support = 1;         // kernel half-width; side length is 2*support+1
};

inline void validate(const GaborParams& p) {
  if (!(p.frequency > 0.0)) throw input_error("gabor: frequency must be > 0");
  if (!(p.sigma_x > 0.0) || !(p.sigma_y > 0.0))
    throw input_error("gabor: sigma must be > 0");
  if (p.support < 1) throw input_error("gabor: support must be >= 1");
  if (!std::isfinite(p.theta)) throw input_error("gabor: theta must be finite");
}

// Sample the Gabor filter at integer offsets x, y in [-support, support]:
//   g(x,y) = exp(-1/2 (P^2/sx^2 + Q^2/sy^2)) * cos(carrier * P)
//   P = x sin(theta) + y cos(theta),  Q = x cos(theta) - y sin(theta)
// Row r of the result is y = r - support, column c is x = c - support.
// Even symmetry g(x,y) = g(-x,-y) holds exactly. Theta is reduced into
// [0, pi) with fmod (exact in IEEE arithmetic) before the trig calls, so
// the filter is bit-for-bit pi-periodic in theta.
inline Matrix make_kernel(const GaborParams& p, Carrier carrier = Carrier::radians) {
  validate(p);
  const int side = 2 * p.support + 1;
  const double omega =
      carrier == Carrier::radians ? p.frequency : 2.0 * std::numbers::pi * p.frequency;
  double theta = std::fmod(p.theta, std::numbers::pi);
  if (theta < 0.0) theta += std::numbers::pi;
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  Matrix k(side, side);
  for (int r = 0; r < side; ++r) {
    const double y = r - p.support;
    for (int c = 0; c < side; ++c) {
      const double x = c - p.support;
      const double pr = x * st + y * ct;
      const double qr = x * ct - y * st;
      const double envelope = std::exp(
          -0.5 * (pr * pr / (p.sigma_x * p.sigma_x) + qr * qr / (p.sigma_y * p.sigma_y)));
      k(r, c) = envelope * std::cos(omega * pr);
    }
  }
  return k;
}

struct BankKernel {
  GaborParams params;
  Matrix kernel;
};

// Frequency-major bank: index = (i-1)*orientations + (k-1) for frequency
// step i and orientation step k.
struct FilterBank {
  std::vector<BankKernel> kernels;
};

struct BankOptions {
  int frequencies = 5;          // f_i = pi / 2^i, i = 1..frequencies
  int orientations = 8;         // theta_k = k*pi/orientations, k = 1..orientations
  double sigma_factor = std::numbers::pi;  // sigma_x = sigma_y = sigma_factor / f
  double support_factor = 3.0;  // support = ceil(support_factor * max sigma)
  int support_cap = 100;        // half the working image side
  Carrier carrier = Carrier::radians;
};

inline FilterBank build_bank(const BankOptions& opt = {}) {
  if (opt.frequencies < 1 || opt.orientations < 1)
    throw input_error("gabor: bank needs at least one frequency and orientation");
  if (!(opt.sigma_factor > 0.0) || !(opt.support_factor > 0.0) || opt.support_cap < 1)
    throw input_error("gabor: invalid bank options");
  FilterBank bank;
  bank.kernels.reserve(std::size_t(opt.frequencies) * opt.orientations);
  for (int i = 1; i <= opt.frequencies; ++i) {
    const double f = std::numbers::pi / std::pow(2.0, i);
    const double sigma = opt.sigma_factor / f;
    const int support = std::min(
        opt.support_cap,
        std::max(1, static_cast<int>(std::ceil(opt.support_factor * sigma))));
    for (int k = 1; k <= opt.orientations; ++k) {
      GaborParams p;
      p.frequency = f;
      p.theta = k * std::numbers::pi / opt.orientations;
      p.sigma_x = sigma;
      p.sigma_y = sigma;
      p.support = support;
      bank.kernels.push_back({p, make_kernel(p, opt.carrier)});
    }
  }
  return bank;
}

// "Same" convolution with zero padding; the kernel is applied unflipped,
// which coincides with true convolution for the even-symmetric kernels
// used here. Output has the image's dimensions.
inline Matrix convolve(const GrayImage& img, const Matrix& kernel) {
  if (kernel.rows == 0 || kernel.rows != kernel.cols || kernel.rows % 2 == 0)
    throw input_error("convolve: kernel must be square with odd side");
  const int support = static_cast<int>(kernel.rows / 2);
  Matrix out(std::size_t(img.height), std::size_t(img.width));
  for (int r = 0; r < img.height; ++r) {
    const int u0 = std::max(-support, -r);
    const int u1 = std::min(support, img.height - 1 - r);
    for (int c = 0; c < img.width; ++c) {
      const int v0 = std::max(-support, -c);
      const int v1 = std::min(support, img.width - 1 - c);
      double acc = 0.0;
      for (int u = u0; u <= u1; ++u) {
        const double* krow = &kernel.a[std::size_t(u + support) * kernel.cols];
        const double* irow = &img.pixels[std::size_t(r + u) * img.width + c];
        for (int v = v0; v <= v1; ++v) acc += krow[v + support] * irow[v];
      }
      out(std::size_t(r), std::size_t(c)) = acc;
    }
  }
  return out;
}

// Convolution evaluated only at the stride grid (r*stride, c*stride).
// Equal to sampling convolve() at those points; extraction uses this to
// skip the responses the downsampler would discard anyway.
inline Matrix convolve_sampled(const GrayImage& img, const Matrix& kernel, int stride) {
  if (stride < 1) throw input_error("convolve_sampled: stride must be >= 1");
  if (kernel.rows == 0 || kernel.rows != kernel.cols || kernel.rows % 2 == 0)
    throw input_error("convolve_sampled: kernel must be square with odd side");
  const int support = static_cast<int>(kernel.rows / 2);
  const int out_rows = (img.height + stride - 1) / stride;
  const int out_cols = (img.width + stride - 1) / stride;
  Matrix out{std::size_t(out_rows), std::size_t(out_cols)};
  for (int br = 0; br < out_rows; ++br) {
    const int r = br * stride;
    const int u0 = std::max(-support, -r);
    const int u1 = std::min(support, img.height - 1 - r);
    for (int bc = 0; bc < out_cols; ++bc) {
      const int c = bc * stride;
      const int v0 = std::max(-support, -c);
      const int v1 = std::min(support, img.width - 1 - c);
      double acc = 0.0;
      for (int u = u0; u <= u1; ++u) {
        const double* krow = &kernel.a[std::size_t(u + support) * kernel.cols];
        const double* irow = &img.pixels[std::size_t(r + u) * img.width + c];
        for (int v = v0; v <= v1; ++v) acc += krow[v + support] * irow[v];
      }
      out(std::size_t(br), std::size_t(bc)) = acc;
    }
  }
  return out;
}

// Flat Gabor feature vector: per filter, stride-sampled responses
// normalized to zero mean and unit (population) variance, concatenated in
// bank order. A block with variance below 1e-12 is emitted as zeros.
struct GaborFace {
  Vec values;
};

inline std::size_t gabor_face_length(int width, int height, int stride,
                                     std::size_t bank_size) {
  const std::size_t br = std::size_t((height + stride - 1) / stride);
  const std::size_t bc = std::size_t((width + stride - 1) / stride);
  return bank_size * br * bc;
}

namespace detail {

inline void normalize_block(double* block, std::size_t n) {
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += block[i];
  mean /= double(n);
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = block[i] - mean;
    var += d * d;
  }
  var /= double(n);
  if (var < 1e-12) {
    for (std::size_t i = 0; i < n; ++i) block[i] = 0.0;
    return;
  }
  const double inv = 1.0 / std::sqrt(var);
  for (std::size_t i = 0; i < n; ++i) block[i] = (block[i] - mean) * inv;
}

}  // namespace detail

inline GaborFace extract_gabor_face(const GrayImage& img, const FilterBank& bank,
                                    int stride, int threads = 1) {
  if (stride < 1) throw input_error("extract_gabor_face: stride must be >= 1");
  if (img.width < 1 || img.height < 1)
    throw input_error("extract_gabor_face: empty image");
  const std::size_t block =
      gabor_face_length(img.width, img.height, stride, 1);
  GaborFace face;
  face.values.resize(block * bank.kernels.size());

  auto run = [&](std::size_t k0, std::size_t k1) {
    for (std::size_t k = k0; k < k1; ++k) {
      const Matrix resp = convolve_sampled(img, bank.kernels[k].kernel, stride);
      double* dst = &face.values[k * block];
      std::copy(resp.a.begin(), resp.a.end(), dst);
      detail::normalize_block(dst, block);
    }
  };

  if (threads <= 1 || bank.kernels.size() < 2) {
    run(0, bank.kernels.size());
  } else {
    const std::size_t n = bank.kernels.size();
    const std::size_t nt = std::min<std::size_t>(threads, n);
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t k0 = n * t / nt;
      const std::size_t k1 = n * (t + 1) / nt;
      pool.emplace_back(run, k0, k1);
    }
    for (auto& th : pool) th.join();
  }
  return face;
}

}  // namespace faceverify
