#pragma once

#include <cstddef>

namespace weaknas::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_scalar(const double* a, const double* b, std::size_t n);
void relu_scalar(const double* x, double* y, std::size_t n);

#if defined(WEAKNAS_HAVE_AVX2)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_avx2(const double* a, const double* b, std::size_t n);
void relu_avx2(const double* x, double* y, std::size_t n);
#endif

#if defined(WEAKNAS_HAVE_NEON)
double dot_neon(const double* a, const double* b, std::size_t n);
void axpy_neon(double alpha, const double* x, double* y, std::size_t n);
double squared_distance_neon(const double* a, const double* b, std::size_t n);
void relu_neon(const double* x, double* y, std::size_t n);
#endif

}  // namespace weaknas::kernels::detail
