#include <algorithm>
#include <cmath>

#include "nol/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NOL_HAVE_AVX2_KERNELS 1
#include <immintrin.h>
#else
#define NOL_HAVE_AVX2_KERNELS 0
#endif

namespace nol::kernels {

#if NOL_HAVE_AVX2_KERNELS
namespace {

#define NOL_AVX2 __attribute__((target("avx2")))

NOL_AVX2 inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

NOL_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

NOL_AVX2 double l1_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, abs_pd(_mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i))));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += std::abs(a[i] - b[i]);
  return sum;
}

NOL_AVX2 double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  double sum = hsum(acc);
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

NOL_AVX2 double abs_sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, abs_pd(_mm256_loadu_pd(a + i)));
  double sum = hsum(acc);
  for (; i < n; ++i) sum += std::abs(a[i]);
  return sum;
}

NOL_AVX2 void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vy = _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

NOL_AVX2 void bilerp_avx2(const double* p00, const double* p10, const double* p01, const double* p11, double w00,
                          double w10, double w01, double w11, double* out, std::size_t n) {
  const __m256d a = _mm256_set1_pd(w00);
  const __m256d b = _mm256_set1_pd(w10);
  const __m256d c = _mm256_set1_pd(w01);
  const __m256d d = _mm256_set1_pd(w11);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d s = _mm256_add_pd(_mm256_mul_pd(a, _mm256_loadu_pd(p00 + i)), _mm256_mul_pd(b, _mm256_loadu_pd(p10 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(c, _mm256_loadu_pd(p01 + i)));
    s = _mm256_add_pd(s, _mm256_mul_pd(d, _mm256_loadu_pd(p11 + i)));
    _mm256_storeu_pd(out + i, s);
  }
  for (; i < n; ++i) out[i] = ((w00 * p00[i] + w10 * p10[i]) + w01 * p01[i]) + w11 * p11[i];
}

NOL_AVX2 void sign_residual_avx2(const double* pred, const double* ref, double scale, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d pos = _mm256_set1_pd(scale);
  const __m256d neg = _mm256_set1_pd(-scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pred + i), _mm256_loadu_pd(ref + i));
    const __m256d gt = _mm256_cmp_pd(d, zero, _CMP_GT_OQ);
    const __m256d lt = _mm256_cmp_pd(d, zero, _CMP_LT_OQ);
    _mm256_storeu_pd(out + i, _mm256_or_pd(_mm256_and_pd(gt, pos), _mm256_and_pd(lt, neg)));
  }
  for (; i < n; ++i) {
    const double d = pred[i] - ref[i];
    out[i] = d > 0.0 ? scale : (d < 0.0 ? -scale : 0.0);
  }
}

NOL_AVX2 void convolve_row_avx2(const double* src, double* dst, int width, const double* taps, int radius) {
  const int span = 2 * radius;
  auto scalar_at = [&](int x) {
    double sum = 0.0;
    for (int k = 0; k <= span; ++k) sum += taps[k] * src[std::clamp(x + k - radius, 0, width - 1)];
    dst[x] = sum;
  };
  // Interior: every tap index in range, so four outputs share one load pattern.
  const int first = std::min(radius, width);
  const int last = std::max(first, width - radius);
  for (int x = 0; x < first; ++x) scalar_at(x);
  int x = first;
  for (; x + 4 <= last; x += 4) {
    __m256d sum = _mm256_setzero_pd();
    for (int k = 0; k <= span; ++k) {
      sum = _mm256_add_pd(sum, _mm256_mul_pd(_mm256_set1_pd(taps[k]), _mm256_loadu_pd(src + x + k - radius)));
    }
    _mm256_storeu_pd(dst + x, sum);
  }
  for (; x < width; ++x) scalar_at(x);
}

#undef NOL_AVX2

}  // namespace

const Table* avx2() {
  static const bool supported = __builtin_cpu_supports("avx2");
  static const Table table{"avx2",    l1_distance_avx2, dot_avx2,           abs_sum_avx2,
                           axpy_avx2, bilerp_avx2,      sign_residual_avx2, convolve_row_avx2};
  return supported ? &table : nullptr;
}

#else

const Table* avx2() { return nullptr; }

#endif

}  // namespace nol::kernels
