#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

#include "ilradmm/error.hpp"

namespace ilradmm::detail {
namespace {

// FFTW's planner is not thread-safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft2d::Fft2d(long rows, long cols) : rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw ParameterError("Fft2d: non-positive grid shape");
  std::lock_guard<std::mutex> lock(planner_mutex());
  double* real = fftw_alloc_real(static_cast<size_t>(rows * cols));
  fftw_complex* freq = fftw_alloc_complex(static_cast<size_t>(spectrum_size()));
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft_r2c_2d(static_cast<int>(rows), static_cast<int>(cols),
                                       real, freq, flags);
  inverse_plan_ = fftw_plan_dft_c2r_2d(static_cast<int>(rows), static_cast<int>(cols),
                                       freq, real, flags);
  fftw_free(real);
  fftw_free(freq);
  if (!forward_plan_ || !inverse_plan_) throw Error("Fft2d: FFTW planning failed");
}

Fft2d::~Fft2d() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

std::vector<std::complex<double>> Fft2d::forward(const double* in) const {
  std::vector<std::complex<double>> out(static_cast<size_t>(spectrum_size()));
  // r2c does not modify its input.
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

void Fft2d::inverse(std::vector<std::complex<double>> spectrum, double* out) const {
  // c2r destroys its input, hence the by-value spectrum.
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(spectrum.data()), out);
  const double scale = 1.0 / static_cast<double>(rows_ * cols_);
  for (long i = 0; i < rows_ * cols_; ++i) out[i] *= scale;
}

}  // namespace ilradmm::detail
