#include "ilradmm/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

#include "ilradmm/error.hpp"

namespace ilradmm {

ImageBuffer::ImageBuffer(long w, long h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ParameterError("ImageBuffer: dimensions must be positive");
  pixels = Vector::Zero(w * h);
}

ImageBuffer::ImageBuffer(long w, long h, Vector px) : width(w), height(h), pixels(std::move(px)) {
  if (w <= 0 || h <= 0) throw ParameterError("ImageBuffer: dimensions must be positive");
  require_dim("ImageBuffer: pixel count", w * h, pixels.size());
}

namespace {

class HeaderReader {
 public:
  HeaderReader(const std::string& bytes, size_t start) : b_(bytes), pos_(start) {}

  size_t pos() const { return pos_; }

  void skip_space_and_comments() {
    while (pos_ < b_.size()) {
      const unsigned char ch = static_cast<unsigned char>(b_[pos_]);
      if (ch == '#') {
        while (pos_ < b_.size() && b_[pos_] != '\n' && b_[pos_] != '\r') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long read_uint(const std::string& what) {
    skip_space_and_comments();
    const size_t start = pos_;
    long value = 0;
    while (pos_ < b_.size() && std::isdigit(static_cast<unsigned char>(b_[pos_]))) {
      value = value * 10 + (b_[pos_] - '0');
      if (value > std::numeric_limits<int>::max())
        throw ParseError("PGM: " + what + " is too large", static_cast<long>(start));
      ++pos_;
    }
    if (pos_ == start) {
      if (pos_ >= b_.size())
        throw ParseError("PGM: truncated before " + what, static_cast<long>(pos_));
      throw ParseError("PGM: expected " + what, static_cast<long>(pos_));
    }
    return value;
  }

  void single_whitespace() {
    if (pos_ >= b_.size() || !std::isspace(static_cast<unsigned char>(b_[pos_])))
      throw ParseError("PGM: expected whitespace after maxval", static_cast<long>(pos_));
    ++pos_;
  }

 private:
  const std::string& b_;
  size_t pos_;
};

}  // namespace

ImageBuffer parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2) throw ParseError("PGM: truncated magic number", 0);
  if (bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
    throw ParseError("PGM: unsupported magic '" + bytes.substr(0, 2) + "' (expected P2 or P5)", 0);
  const bool binary = bytes[1] == '5';
  HeaderReader rd(bytes, 2);
  const size_t after_magic = rd.pos();
  if (after_magic >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[after_magic])))
    throw ParseError("PGM: expected whitespace after magic", static_cast<long>(after_magic));
  const long width = rd.read_uint("width");
  const long height = rd.read_uint("height");
  const size_t maxval_at = rd.pos();
  const long maxval = rd.read_uint("maxval");
  if (width <= 0 || height <= 0) throw ParseError("PGM: zero image dimension", static_cast<long>(maxval_at));
  if (maxval <= 0 || maxval > 65535)
    throw ParseError("PGM: maxval must be in [1, 65535]", static_cast<long>(maxval_at));

  ImageBuffer img(width, height);
  const long n = width * height;
  const double scale = 1.0 / static_cast<double>(maxval);
  if (binary) {
    rd.single_whitespace();
    const size_t start = rd.pos();
    const size_t bpp = maxval < 256 ? 1 : 2;
    const size_t need = static_cast<size_t>(n) * bpp;
    if (bytes.size() - start < need)
      throw ParseError("PGM: truncated pixel data (need " + std::to_string(need) + " bytes, have " +
                           std::to_string(bytes.size() - start) + ")",
                       static_cast<long>(bytes.size()));
    for (long i = 0; i < n; ++i) {
      const size_t at = start + static_cast<size_t>(i) * bpp;
      long v = static_cast<unsigned char>(bytes[at]);
      if (bpp == 2) v = (v << 8) | static_cast<unsigned char>(bytes[at + 1]);
      if (v > maxval) throw ParseError("PGM: sample exceeds maxval", static_cast<long>(at));
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  } else {
    for (long i = 0; i < n; ++i) {
      rd.skip_space_and_comments();
      const size_t at = rd.pos();
      const long v = rd.read_uint("sample " + std::to_string(i));
      if (v > maxval) throw ParseError("PGM: sample exceeds maxval", static_cast<long>(at));
      img.pixels[i] = static_cast<double>(v) * scale;
    }
  }
  return img;
}

ImageBuffer load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

void save_pgm(const ImageBuffer& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::string data(static_cast<size_t>(img.size()), '\0');
  for (long i = 0; i < img.size(); ++i) {
    double v = std::round(img.pixels[i] * 255.0);
    if (!(v >= 0.0)) v = 0.0;  // also maps NaN to 0
    data[static_cast<size_t>(i)] = static_cast<char>(static_cast<unsigned char>(std::min(v, 255.0)));
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError("write to '" + path + "' failed");
}

ImageBuffer phantom_image(long width, long height, std::uint64_t seed) {
  if (width < 16 || height < 16) throw ParameterError("phantom_image: dimensions must be >= 16");
  ImageBuffer img(width, height);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const double w = static_cast<double>(width), h = static_cast<double>(height);

  // Background, then a ramp strip along the bottom.
  img.pixels.setConstant(0.1);
  const long ramp_top = static_cast<long>(0.82 * h);
  const long ramp_bottom = static_cast<long>(0.94 * h);
  for (long i = ramp_top; i < ramp_bottom; ++i)
    for (long j = 0; j < width; ++j) img.at(i, j) = 0.2 + 0.6 * static_cast<double>(j) / (w - 1);

  struct Rect { double r0, c0, r1, c1, level; };
  const Rect rects[] = {
      {0.10 + jitter(rng), 0.08 + jitter(rng), 0.45 + jitter(rng), 0.40 + jitter(rng), 0.45},
      {0.50 + jitter(rng), 0.55 + jitter(rng), 0.75 + jitter(rng), 0.92 + jitter(rng), 0.75},
  };
  for (const Rect& r : rects) {
    const long i0 = static_cast<long>(r.r0 * h), i1 = static_cast<long>(r.r1 * h);
    const long j0 = static_cast<long>(r.c0 * w), j1 = static_cast<long>(r.c1 * w);
    for (long i = std::max(0L, i0); i < std::min(height, i1); ++i)
      for (long j = std::max(0L, j0); j < std::min(width, j1); ++j) img.at(i, j) = r.level;
  }

  struct Disk { double ci, cj, radius, level; };
  const Disk disks[] = {
      {0.28 + jitter(rng), 0.70 + jitter(rng), 0.15, 0.95},
      {0.62 + jitter(rng), 0.25 + jitter(rng), 0.12, 0.6},
      {0.28 + jitter(rng), 0.24 + jitter(rng), 0.07, 0.0},
  };
  for (const Disk& d : disks) {
    const double ci = d.ci * h, cj = d.cj * w, rad = d.radius * std::min(w, h);
    for (long i = 0; i < height; ++i)
      for (long j = 0; j < width; ++j) {
        const double di = static_cast<double>(i) + 0.5 - ci, dj = static_cast<double>(j) + 0.5 - cj;
        if (di * di + dj * dj <= rad * rad) img.at(i, j) = d.level;
      }
  }
  return img;
}

ImageBuffer clamp_image(const ImageBuffer& img) {
  ImageBuffer out = img;
  out.pixels = img.pixels.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

ImageBuffer add_noise(const ImageBuffer& img, double std, std::uint64_t seed) {
  if (!(std >= 0)) throw ParameterError("add_noise: std must be non-negative");
  if (std == 0.0) return img;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, std);
  ImageBuffer out = img;
  for (long i = 0; i < out.size(); ++i) out.pixels[i] += noise(rng);
  return clamp_image(out);
}

double snr(const Vector& u, const Vector& u_star) {
  require_dim("snr", u.size(), u_star.size());
  const double err = (u - u_star).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  const double mean = u.mean();
  const double signal = (u.array() - mean).matrix().squaredNorm();
  return 10.0 * std::log10(signal / err);
}

double snr(const ImageBuffer& u, const ImageBuffer& u_star) {
  if (u.width != u_star.width || u.height != u_star.height)
    throw DimensionError("snr: image sizes differ", u.size(), u_star.size());
  return snr(u.pixels, u_star.pixels);
}

Matrix gaussian_kernel(long size, double width) {
  if (size < 1 || size % 2 == 0) throw ParameterError("gaussian_kernel: size must be odd and positive");
  if (!(width > 0)) throw ParameterError("gaussian_kernel: width must be positive");
  const long half = size / 2;
  Matrix k(size, size);
  for (long i = 0; i < size; ++i)
    for (long j = 0; j < size; ++j) {
      const double di = static_cast<double>(i - half), dj = static_cast<double>(j - half);
      k(i, j) = std::exp(-(di * di + dj * dj) / (2.0 * width * width));
    }
  k /= k.sum();
  return k;
}

}  // namespace ilradmm
