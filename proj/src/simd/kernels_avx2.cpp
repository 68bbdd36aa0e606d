// Compiled with -mavx2 (and without FMA); only reached after a runtime check.

#include <immintrin.h>

#include "eventq/simd/kernels.hpp"

namespace eventq::simd::avx2 {

void scale(double* x, std::size_t n, double factor) {
  const __m256d f = _mm256_set1_pd(factor);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), f));
  for (; i < n; ++i) x[i] *= factor;
}

void relax(double* v, const double* target, std::size_t n, double decay) {
  const __m256d d = _mm256_set1_pd(decay);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d t = _mm256_loadu_pd(target + i);
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(v + i), t);
    _mm256_storeu_pd(v + i, _mm256_add_pd(t, _mm256_mul_pd(diff, d)));
  }
  for (; i < n; ++i) v[i] = target[i] + (v[i] - target[i]) * decay;
}

void drain(double* row, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_loadu_pd(row + i));
    _mm256_storeu_pd(row + i, zero);
  }
  for (; i < n; ++i) {
    out[i] = row[i];
    row[i] = 0.0;
  }
}

void shift_bits(std::uint32_t* words, std::uint32_t* out, std::size_t n) {
  const __m256i one = _mm256_set1_epi32(1);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    auto* w = reinterpret_cast<__m256i*>(words + i);
    const __m256i x = _mm256_loadu_si256(w);
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + i), _mm256_and_si256(x, one));
    _mm256_storeu_si256(w, _mm256_srli_epi32(x, 1));
  }
  for (; i < n; ++i) {
    out[i] = words[i] & 1u;
    words[i] >>= 1;
  }
}

double sum(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, acc);
  double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace eventq::simd::avx2
