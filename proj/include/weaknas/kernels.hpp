#pragma once
// Dense double-precision kernels used by the MLP trainer and the synthetic
// landscape generator. A scalar reference implementation is always built;
// AVX2+FMA (x86-64) and NEON (aarch64) variants are compiled when enabled
// and chosen once at runtime.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace weaknas::kernels {

enum class Isa { Scalar, Avx2, Neon };

std::string_view isa_name(Isa isa);

/// Function table for one instruction set. All pointers are non-null.
struct KernelTable {
  Isa isa;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y = max(x, 0), elementwise; x and y may alias.
  void (*relu)(const double* x, double* y, std::size_t n);
};

const KernelTable& scalar_table();

/// Variants this binary was built with AND the host CPU supports.
/// Scalar is always first.
std::vector<Isa> available_isas();

const KernelTable& table_for(Isa isa);

/// The table used by the library. Picks the widest supported variant on
/// first use; WEAKNAS_SIMD=scalar in the environment forces the reference.
const KernelTable& active();

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void relu(std::span<const double> x, std::span<double> y) {
  active().relu(x.data(), y.data(), x.size());
}

}  // namespace weaknas::kernels
