#include "eventq/simd/kernels.hpp"

namespace eventq::simd::scalar {

void scale(double* x, std::size_t n, double factor) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= factor;
}

void relax(double* v, const double* target, std::size_t n, double decay) {
  for (std::size_t i = 0; i < n; ++i) v[i] = target[i] + (v[i] - target[i]) * decay;
}

void drain(double* row, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = row[i];
    row[i] = 0.0;
  }
}

void shift_bits(std::uint32_t* words, std::uint32_t* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = words[i] & 1u;
    words[i] >>= 1;
  }
}

double sum(const double* x, std::size_t n) {
  double acc[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc[0] += x[i];
    acc[1] += x[i + 1];
    acc[2] += x[i + 2];
    acc[3] += x[i + 3];
  }
  double s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace eventq::simd::scalar
