#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense double-precision inner loops behind the regression and criterion
// code. A scalar reference implementation always exists; on x86-64 an AVX2+FMA
// variant is compiled alongside and selected at runtime, on AArch64 a NEON
// variant. The active backend is process-wide and fixed after first use, so
// repeated runs of the same binary on the same machine are bit-reproducible.

namespace mabt::kern {

struct Backend {
  const char* name;
  double (*dot)(const double*, const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*sq_diff_sum)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
};

// Reference backend (always available, used by equivalence tests).
const Backend& scalar_backend();

// AVX2/NEON backend or nullptr when the CPU lacks support.
const Backend* simd_backend();

// Active backend: SIMD when available unless overridden by MABT_SIMD=scalar
// or a prior set_backend() call.
const Backend& active_backend();

// Force a backend by name ("scalar", "avx2", "neon"). Returns false when the
// requested backend is unavailable. Intended for tests.
bool set_backend(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active_backend().dot(a.data(), b.data(), a.size());
}

inline double sumsq(std::span<const double> a) {
  return active_backend().sumsq(a.data(), a.size());
}

// sum_i (a_i - b_i)^2
inline double sq_diff_sum(std::span<const double> a, std::span<const double> b) {
  return active_backend().sq_diff_sum(a.data(), b.data(), a.size());
}

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active_backend().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace mabt::kern
