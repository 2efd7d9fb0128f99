#include "mabt/kernels.hpp"

#include <cstdlib>
#include <string>

#if defined(__x86_64__) || defined(_M_X64)
#define MABT_X86 1
#include <immintrin.h>
#else
#define MABT_X86 0
#endif

#if defined(__aarch64__)
#define MABT_NEON 1
#include <arm_neon.h>
#else
#define MABT_NEON 0
#endif

namespace mabt::kern {

namespace {

// ---------------------------------------------------------------- scalar ---

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sq_diff_sum_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

// ------------------------------------------------------------------ AVX2 ---

#if MABT_X86

__attribute__((target("avx2,fma"))) double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

__attribute__((target("avx2,fma"))) double dot_avx2(const double* a, const double* b,
                                                    std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  if (i + 4 <= n) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    i += 4;
  }
  double s = hsum4(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

__attribute__((target("avx2,fma"))) double sumsq_avx2(const double* a, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d v0 = _mm256_loadu_pd(a + i);
    const __m256d v1 = _mm256_loadu_pd(a + i + 4);
    acc0 = _mm256_fmadd_pd(v0, v0, acc0);
    acc1 = _mm256_fmadd_pd(v1, v1, acc1);
  }
  if (i + 4 <= n) {
    const __m256d v = _mm256_loadu_pd(a + i);
    acc0 = _mm256_fmadd_pd(v, v, acc0);
    i += 4;
  }
  double s = hsum4(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

__attribute__((target("avx2,fma"))) double sq_diff_sum_avx2(const double* a, const double* b,
                                                            std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum4(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

__attribute__((target("avx2,fma"))) void axpy_avx2(double alpha, const double* x, double* y,
                                                   std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  if (i + 4 <= n) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    i += 4;
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

#endif  // MABT_X86

// ------------------------------------------------------------------ NEON ---

#if MABT_NEON

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sumsq_neon(const double* a, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vld1q_f64(a + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i] * a[i];
  return s;
}

double sq_diff_sum_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

#endif  // MABT_NEON

const Backend kScalar{"scalar", dot_scalar, sumsq_scalar, sq_diff_sum_scalar, axpy_scalar};

#if MABT_X86
const Backend kAvx2{"avx2", dot_avx2, sumsq_avx2, sq_diff_sum_avx2, axpy_avx2};
#endif
#if MABT_NEON
const Backend kNeon{"neon", dot_neon, sumsq_neon, sq_diff_sum_neon, axpy_neon};
#endif

const Backend* detect_simd() {
#if MABT_X86
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return &kAvx2;
#endif
#if MABT_NEON
  return &kNeon;
#endif
  return nullptr;
}

const Backend* g_active = nullptr;

const Backend* initial_backend() {
  if (const char* env = std::getenv("MABT_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
#if MABT_X86
    if (want == "avx2" && detect_simd() == &kAvx2) return &kAvx2;
#endif
#if MABT_NEON
    if (want == "neon") return &kNeon;
#endif
  }
  if (const Backend* simd = detect_simd()) return simd;
  return &kScalar;
}

}  // namespace

const Backend& scalar_backend() { return kScalar; }

const Backend* simd_backend() { return detect_simd(); }

const Backend& active_backend() {
  if (!g_active) g_active = initial_backend();
  return *g_active;
}

bool set_backend(std::string_view name) {
  if (name == "scalar") {
    g_active = &kScalar;
    return true;
  }
  const Backend* simd = detect_simd();
  if (simd && name == simd->name) {
    g_active = simd;
    return true;
  }
  return false;
}

}  // namespace mabt::kern
