#pragma once

#include <cstdint>
#include <string>

#include "ilradmm/operators.hpp"

namespace ilradmm {

// Gray image with pixels in [0, 1], row-major.
struct ImageBuffer {
  long width = 0;
  long height = 0;
  Vector pixels;

  ImageBuffer() = default;
  ImageBuffer(long width, long height);
  ImageBuffer(long width, long height, Vector pixels);

  long size() const { return width * height; }
  double& at(long row, long col) { return pixels[row * width + col]; }
  double at(long row, long col) const { return pixels[row * width + col]; }
};

// P2 or P5 graymap with maxval <= 65535 (16-bit P5 is big-endian).
ImageBuffer load_pgm(const std::string& path);
ImageBuffer parse_pgm(const std::string& bytes);
// P5, maxval 255, round(p * 255) clamped to [0, 255].
void save_pgm(const ImageBuffer& img, const std::string& path);

// Piecewise-constant test image: background ramp plus rectangles and disks
// whose placement depends on the seed.
ImageBuffer phantom_image(long width, long height, std::uint64_t seed = 0);

// Adds i.i.d. N(0, std^2) noise and clamps to [0, 1].
ImageBuffer add_noise(const ImageBuffer& img, double std, std::uint64_t seed);

ImageBuffer clamp_image(const ImageBuffer& img);

// 10 log10(||u - mean(u)||^2 / ||u - u_star||^2); +inf when u_star == u.
double snr(const ImageBuffer& u, const ImageBuffer& u_star);
double snr(const Vector& u, const Vector& u_star);

// Centered size x size Gaussian, normalized to sum 1.
Matrix gaussian_kernel(long size, double width);

}  // namespace ilradmm
