#include <algorithm>
#include <cmath>

#include "nol/kernels.hpp"

namespace nol::kernels {
namespace {

double l1_distance_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double abs_sum_scalar(const double* a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::abs(a[i]);
  return sum;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void bilerp_scalar(const double* p00, const double* p10, const double* p01, const double* p11, double w00, double w10,
                   double w01, double w11, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = ((w00 * p00[i] + w10 * p10[i]) + w01 * p01[i]) + w11 * p11[i];
  }
}

void sign_residual_scalar(const double* pred, const double* ref, double scale, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred[i] - ref[i];
    out[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
  }
}

void convolve_row_scalar(const double* src, double* dst, int width, const double* taps, int radius) {
  for (int x = 0; x < width; ++x) {
    double sum = 0.0;
    for (int k = 0; k <= 2 * radius; ++k) {
      const int sx = std::clamp(x + k - radius, 0, width - 1);
      sum += taps[k] * src[sx];
    }
    dst[x] = sum;
  }
}

}  // namespace

const Table& scalar() {
  static const Table table{"scalar",          l1_distance_scalar, dot_scalar,         abs_sum_scalar,
                           axpy_scalar,       bilerp_scalar,      sign_residual_scalar, convolve_row_scalar};
  return table;
}

}  // namespace nol::kernels
