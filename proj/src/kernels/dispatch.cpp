#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"
#include "weaknas/kernels.hpp"

namespace weaknas::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar, detail::dot_scalar, detail::axpy_scalar,
                              detail::squared_distance_scalar, detail::relu_scalar};

#if defined(WEAKNAS_HAVE_AVX2)
constexpr KernelTable kAvx2{Isa::Avx2, detail::dot_avx2, detail::axpy_avx2,
                            detail::squared_distance_avx2, detail::relu_avx2};
#endif

#if defined(WEAKNAS_HAVE_NEON)
constexpr KernelTable kNeon{Isa::Neon, detail::dot_neon, detail::axpy_neon,
                            detail::squared_distance_neon, detail::relu_neon};
#endif

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(WEAKNAS_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(WEAKNAS_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select_table() {
  if (const char* forced = std::getenv("WEAKNAS_SIMD")) {
    if (std::string(forced) == "scalar") return kScalar;
  }
  const auto isas = available_isas();
  return table_for(isas.back());
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
    case Isa::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& scalar_table() { return kScalar; }

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (cpu_supports(isa)) out.push_back(isa);
  }
  return out;
}

const KernelTable& table_for(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument("kernel variant not available: " + std::string(isa_name(isa)));
  }
  switch (isa) {
#if defined(WEAKNAS_HAVE_AVX2)
    case Isa::Avx2:
      return kAvx2;
#endif
#if defined(WEAKNAS_HAVE_NEON)
    case Isa::Neon:
      return kNeon;
#endif
    default:
      return kScalar;
  }
}

const KernelTable& active() {
  static const KernelTable& table = select_table();
  return table;
}

}  // namespace weaknas::kernels
