#include <cmath>
#include <vector>

#include "doctest.h"
#include "weaknas/kernels.hpp"
#include "weaknas/rng.hpp"

using namespace weaknas;
using kernels::Isa;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-3.0, 3.0);
  return v;
}

}  // namespace

TEST_CASE("scalar table is always available and listed first") {
  const auto isas = kernels::available_isas();
  REQUIRE(!isas.empty());
  CHECK(isas.front() == Isa::Scalar);
  CHECK(kernels::table_for(Isa::Scalar).isa == Isa::Scalar);
  CHECK(kernels::scalar_table().dot != nullptr);
}

TEST_CASE("every available variant agrees with the scalar reference") {
  const kernels::KernelTable& ref = kernels::scalar_table();
  Rng rng(11);
  for (Isa isa : kernels::available_isas()) {
    CAPTURE(kernels::isa_name(isa));
    const kernels::KernelTable& t = kernels::table_for(isa);
    // Sizes straddle the vector widths and their tails.
    for (std::size_t n = 0; n <= 67; ++n) {
      CAPTURE(n);
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      double abs_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) abs_sum += std::abs(a[i] * b[i]);
      const double tol = 1e-14 * (abs_sum + 1.0);
      CHECK(std::abs(t.dot(a.data(), b.data(), n) - ref.dot(a.data(), b.data(), n)) <= tol);

      double dist_sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) dist_sum += (a[i] - b[i]) * (a[i] - b[i]);
      CHECK(std::abs(t.squared_distance(a.data(), b.data(), n) - ref.squared_distance(a.data(), b.data(), n)) <=
            1e-14 * (dist_sum + 1.0));

      auto y1 = b;
      auto y2 = b;
      t.axpy(0.75, a.data(), y1.data(), n);
      ref.axpy(0.75, a.data(), y2.data(), n);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(y1[i] - y2[i]) <= 1e-15 * (std::abs(y2[i]) + 1.0));

      std::vector<double> r1(n);
      std::vector<double> r2(n);
      t.relu(a.data(), r1.data(), n);
      ref.relu(a.data(), r2.data(), n);
      CHECK(r1 == r2);
    }
  }
}

TEST_CASE("relu may run in place") {
  for (Isa isa : kernels::available_isas()) {
    std::vector<double> x{-1.0, 2.0, -0.0, 3.5, -7.0, 0.25, -2.0, 9.0, -1e-300};
    kernels::table_for(isa).relu(x.data(), x.data(), x.size());
    for (double v : x) CHECK(v >= 0.0);
    CHECK(x[1] == 2.0);
    CHECK(x[7] == 9.0);
  }
}

TEST_CASE("scalar dot matches a plain loop exactly") {
  Rng rng(5);
  const auto a = random_vector(rng, 33);
  const auto b = random_vector(rng, 33);
  double expect = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) expect += a[i] * b[i];
  CHECK(kernels::scalar_table().dot(a.data(), b.data(), a.size()) == expect);
}
