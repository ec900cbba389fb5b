#pragma once

#include <complex>
#include <vector>

namespace ilradmm::detail {

// Real 2-D DFT on a row-major rows x cols grid. The half spectrum has
// rows x (cols / 2 + 1) entries. Plans are created once; execution uses the
// new-array interface so a single instance can be shared across threads.
class Fft2d {
 public:
  Fft2d(long rows, long cols);
  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  long rows() const { return rows_; }
  long cols() const { return cols_; }
  long spectrum_size() const { return rows_ * (cols_ / 2 + 1); }

  std::vector<std::complex<double>> forward(const double* in) const;
  // Normalized inverse (forward followed by inverse is the identity).
  void inverse(std::vector<std::complex<double>> spectrum, double* out) const;

 private:
  long rows_;
  long cols_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace ilradmm::detail
