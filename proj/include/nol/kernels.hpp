#pragma once

// Data-parallel inner loops used by the feature, fusion and loss code.
//
// Every kernel has a scalar reference and, on x86-64, an AVX2 variant chosen
// at runtime from CPUID. Elementwise kernels are bit-identical across
// variants; reductions (l1_distance, dot, abs_sum) differ only in summation
// order. Set NOL_FORCE_SCALAR=1 to pin the scalar table.

#include <cstddef>

namespace nol::kernels {

struct Table {
  const char* name;
  /// sum_i |a_i - b_i|
  double (*l1_distance)(const double* a, const double* b, std::size_t n);
  /// sum_i a_i * b_i
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// sum_i |a_i|
  double (*abs_sum)(const double* a, std::size_t n);
  /// y_i += alpha * x_i
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// out_i = w00*p00_i + w10*p10_i + w01*p01_i + w11*p11_i
  void (*bilerp)(const double* p00, const double* p10, const double* p01, const double* p11, double w00,
                 double w10, double w01, double w11, double* out, std::size_t n);
  /// out_i = scale * sign(pred_i - ref_i), sign(0) = 0
  void (*sign_residual)(const double* pred, const double* ref, double scale, double* out, std::size_t n);
  /// dst_x = sum_k taps_k * src_clamp(x + k - radius), replicate border
  void (*convolve_row)(const double* src, double* dst, int width, const double* taps, int radius);
};

const Table& scalar();
/// nullptr unless compiled for x86-64 and the CPU reports AVX2.
const Table* avx2();
/// Table selected at first use.
const Table& active();

inline double l1_distance(const double* a, const double* b, std::size_t n) { return active().l1_distance(a, b, n); }
inline double dot(const double* a, const double* b, std::size_t n) { return active().dot(a, b, n); }
inline double abs_sum(const double* a, std::size_t n) { return active().abs_sum(a, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { active().axpy(alpha, x, y, n); }
inline void bilerp(const double* p00, const double* p10, const double* p01, const double* p11, double w00, double w10,
                   double w01, double w11, double* out, std::size_t n) {
  active().bilerp(p00, p10, p01, p11, w00, w10, w01, w11, out, n);
}
inline void sign_residual(const double* pred, const double* ref, double scale, double* out, std::size_t n) {
  active().sign_residual(pred, ref, scale, out, n);
}
inline void convolve_row(const double* src, double* dst, int width, const double* taps, int radius) {
  active().convolve_row(src, dst, width, taps, radius);
}

}  // namespace nol::kernels
