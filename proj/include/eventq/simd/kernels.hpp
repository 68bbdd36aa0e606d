#pragma once

// Data-parallel inner loops with a scalar reference and an AVX2 variant,
// selected at runtime. The variants are bit-identical: no fused multiply-add,
// and reductions use the same four-lane association everywhere.

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace eventq::simd {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);

/// Compiled in and supported by the running CPU.
bool isa_available(Isa isa);

struct Kernels {
  Isa isa;
  // x[i] *= factor
  void (*scale)(double* x, std::size_t n, double factor);
  // v[i] = target[i] + (v[i] - target[i]) * decay
  void (*relax)(double* v, const double* target, std::size_t n, double decay);
  // out[i] = row[i]; row[i] = 0
  void (*drain)(double* row, double* out, std::size_t n);
  // out[i] = words[i] & 1; words[i] >>= 1
  void (*shift_bits)(std::uint32_t* words, std::uint32_t* out, std::size_t n);
  // four interleaved partial sums, combined as (s0 + s1) + (s2 + s3), then the tail
  double (*sum)(const double* x, std::size_t n);
};

/// Kernels for the best available ISA, or the one named by the EVENTQ_ISA
/// environment variable ("scalar" or "avx2") when set and available.
const Kernels& kernels();

/// Throws std::invalid_argument when the ISA is unavailable.
const Kernels& kernels_for(Isa isa);

namespace scalar {
void scale(double* x, std::size_t n, double factor);
void relax(double* v, const double* target, std::size_t n, double decay);
void drain(double* row, double* out, std::size_t n);
void shift_bits(std::uint32_t* words, std::uint32_t* out, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace scalar

#if defined(EVENTQ_HAVE_AVX2)
namespace avx2 {
void scale(double* x, std::size_t n, double factor);
void relax(double* v, const double* target, std::size_t n, double decay);
void drain(double* row, double* out, std::size_t n);
void shift_bits(std::uint32_t* words, std::uint32_t* out, std::size_t n);
double sum(const double* x, std::size_t n);
}  // namespace avx2
#endif

}  // namespace eventq::simd
