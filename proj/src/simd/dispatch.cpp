#include <cstdlib>
#include <stdexcept>
#include <string>

#include "eventq/simd/kernels.hpp"

namespace eventq::simd {

namespace {

constexpr Kernels kScalar{Isa::Scalar, scalar::scale, scalar::relax, scalar::drain, scalar::shift_bits,
                          scalar::sum};
#if defined(EVENTQ_HAVE_AVX2)
constexpr Kernels kAvx2{Isa::Avx2, avx2::scale, avx2::relax, avx2::drain, avx2::shift_bits, avx2::sum};
#endif

const Kernels& select() {
  const char* forced = std::getenv("EVENTQ_ISA");
  if (forced != nullptr && std::string(forced) == "scalar") return kScalar;
#if defined(EVENTQ_HAVE_AVX2)
  if (isa_available(Isa::Avx2)) return kAvx2;
#endif
  return kScalar;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(EVENTQ_HAVE_AVX2)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

const Kernels& kernels() {
  static const Kernels& active = select();
  return active;
}

const Kernels& kernels_for(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("ISA not available: " + std::string(isa_name(isa)));
#if defined(EVENTQ_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

}  // namespace eventq::simd
