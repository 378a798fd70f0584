#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "faceverify/errors.hpp"
#include "faceverify/linalg.hpp"

namespace faceverify {

// 8-bit grayscale source image, held as row-major intensities in [0,1].
struct GrayImage {
  int width = 0;
  int height = 0;
  Vec pixels;  // size width*height, row-major

  double at(int row, int col) const { return pixels[std::size_t(row) * width + col]; }
  double& at(int row, int col) { return pixels[std::size_t(row) * width + col]; }
};

namespace detail {

class PgmReader {
public:
  explicit PgmReader(std::string bytes) : bytes_(std::move(bytes)) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw input_error("pgm: " + what + " at byte " + std::to_string(pos_));
  }

  bool eof() const { return pos_ >= bytes_.size(); }
  char peek() const { return bytes_[pos_]; }
  char take() { return bytes_[pos_++]; }
  std::size_t pos() const { return pos_; }

  // Header tokens are separated by whitespace; '#' starts a comment
  // running to end of line.
  void skip_separators() {
    while (!eof()) {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        take();
      } else if (peek() == '#') {
        while (!eof() && take() != '\n') {
        }
      } else {
        break;
      }
    }
  }

  int header_int(const char* name) {
    skip_separators();
    if (eof()) fail(std::string("missing ") + name);
    if (!std::isdigit(static_cast<unsigned char>(peek())))
      fail(std::string("malformed ") + name);
    long v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (take() - '0');
      if (v > 1'000'000'000L) fail(std::string(name) + " out of range");
    }
    return static_cast<int>(v);
  }

  const std::string& bytes() const { return bytes_; }

private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

// Parse PGM from an in-memory buffer (P5 binary or P2 ASCII, maxval <= 255).
// Intensities come out as raw value / maxval.
inline GrayImage parse_pgm(std::string bytes) {
  detail::PgmReader r(std::move(bytes));
  if (r.eof() || r.take() != 'P') r.fail("bad magic, expected P5 or P2");
  if (r.eof()) r.fail("bad magic, expected P5 or P2");
  const char kind = r.take();
  if (kind != '5' && kind != '2') r.fail("unsupported PGM variant");

  const int width = r.header_int("width");
  const int height = r.header_int("height");
  const int maxval = r.header_int("maxval");
  if (width <= 0 || height <= 0) r.fail("non-positive image dimensions");
  if (maxval <= 0 || maxval > 255)
    r.fail("unsupported maxval " + std::to_string(maxval));

  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(std::size_t(width) * height);
  const double scale = 1.0 / maxval;

  if (kind == '5') {
    // exactly one whitespace byte between maxval and the payload
    if (r.eof() || !std::isspace(static_cast<unsigned char>(r.take())))
      r.fail("missing separator before pixel data");
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      if (r.eof()) r.fail("truncated pixel data");
      const auto v = static_cast<unsigned char>(r.take());
      if (v > maxval) r.fail("pixel value exceeds maxval");
      img.pixels[i] = v * scale;
    }
  } else {
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
      const int v = r.header_int("pixel");
      if (v > maxval) r.fail("pixel value exceeds maxval");
      img.pixels[i] = v * scale;
    }
  }
  return img;
}

inline GrayImage load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("pgm: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_pgm(buf.str());
  } catch (const input_error& e) {
    throw input_error(std::string(e.what()) + " in '" + path + "'");
  }
}

// Canonical P5 output with maxval 255. Loading a maxval-255 P5 file and
// re-encoding it reproduces the original pixel bytes.
inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " +
                    std::to_string(img.height) + "\n255\n";
  out.reserve(out.size() + img.pixels.size());
  for (double v : img.pixels) {
    const double clamped = std::min(1.0, std::max(0.0, v));
    out.push_back(static_cast<char>(
        static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  return out;
}

inline void save_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("pgm: cannot write '" + path + "'");
  const std::string bytes = encode_pgm(img);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw input_error("pgm: write failed for '" + path + "'");
}

// Bilinear resampling with centre-aligned grids and edge clamping.
// Resizing to the source dimensions is exact.
inline GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1)
    throw input_error("resize_bilinear: target dimensions must be >= 1");
  GrayImage out;
  out.width = width;
  out.height = height;
  out.pixels.resize(std::size_t(width) * height);

  const double sx = double(img.width) / width;
  const double sy = double(img.height) / height;
  for (int r = 0; r < height; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::min(std::max(fy, 0.0), double(img.height - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, img.height - 1);
    const double wy = fy - y0;
    for (int c = 0; c < width; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      fx = std::min(std::max(fx, 0.0), double(img.width - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, img.width - 1);
      const double wx = fx - x0;
      const double top = img.at(y0, x0) * (1.0 - wx) + img.at(y0, x1) * wx;
      const double bot = img.at(y1, x0) * (1.0 - wx) + img.at(y1, x1) * wx;
      out.at(r, c) = top * (1.0 - wy) + bot * wy;
    }
  }
  return out;
}

}  // namespace faceverify
