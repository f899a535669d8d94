#include <algorithm>
#include <bit>
#include <set>

#include "doctest.h"
#include "weaknas/rng.hpp"
#include "weaknas/space.hpp"

using namespace weaknas;

namespace {

// Independent count of the VariableDag space: upper-triangular masks over
// n nodes with at most max_edges edges, times op choices per interior node.
std::uint64_t brute_force_variable_size(int max_nodes, int max_edges, int ops) {
  std::uint64_t total = 0;
  for (int n = 2; n <= max_nodes; ++n) {
    const int positions = n * (n - 1) / 2;
    std::uint64_t masks = 0;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << positions); ++m) {
      if (std::popcount(m) <= max_edges) ++masks;
    }
    std::uint64_t op_choices = 1;
    for (int i = 0; i < n - 2; ++i) op_choices *= static_cast<std::uint64_t>(ops);
    total += masks * op_choices;
  }
  return total;
}

Architecture random_variable_arch(const SpaceSpec& spec, Rng& rng) {
  return decode_index(spec, rng.uniform_index(spec.enumerated_size()));
}

}  // namespace

TEST_CASE("fixed space sizes") {
  CHECK(SpaceSpec::fixed_dag(6, 5).enumerated_size() == 15625);
  CHECK(enumerate_space(SpaceSpec::fixed_dag(6, 5)).size() == 15625);
  CHECK(SpaceSpec::fixed_dag(1, 1).enumerated_size() == 1);
  CHECK(SearchSpace::enumerate(SpaceSpec::fixed_dag(1, 1)).size() == 1);
}

TEST_CASE("fixed decoding is positional, most significant edge first") {
  const SpaceSpec spec = SpaceSpec::fixed_dag(2, 3);
  std::size_t count = 0;
  for (const Architecture& a : enumerate_space(spec)) {
    CHECK(a.index == count);
    CHECK(a.ops == std::vector<int>{static_cast<int>(count / 3), static_cast<int>(count % 3)});
    ++count;
  }
  CHECK(count == 9);
  CHECK(decode_index(spec, 4).ops == std::vector<int>{1, 1});
}

TEST_CASE("index round trip is exhaustive on the 15,625 space") {
  const SpaceSpec spec = SpaceSpec::fixed_dag(6, 5);
  for (const Architecture& a : enumerate_space(spec)) {
    REQUIRE(encode_index(spec, a) == a.index);
  }
}

TEST_CASE("variable space size matches an independent count") {
  for (auto [nodes, edges, ops] : {std::tuple{4, 3, 2}, std::tuple{5, 4, 3}, std::tuple{6, 9, 3}}) {
    const SpaceSpec spec = SpaceSpec::variable_dag(nodes, edges, ops);
    CHECK(spec.enumerated_size() == brute_force_variable_size(nodes, edges, ops));
  }
}

TEST_CASE("variable enumeration round-trips and yields valid distinct DAGs") {
  const SpaceSpec spec = SpaceSpec::variable_dag(5, 4, 3);
  std::set<std::pair<std::vector<int>, std::uint64_t>> seen;
  std::uint64_t i = 0;
  for (const Architecture& a : enumerate_space(spec)) {
    REQUIRE(a.index == i);
    REQUIRE(a.adjacency.has_value());
    CHECK_NOTHROW(validate_architecture(a, spec));
    CHECK(encode_index(spec, a) == i);
    CHECK(seen.insert({a.ops, a.adjacency->bits() | (std::uint64_t(a.adjacency->num_nodes()) << 60)}).second);
    ++i;
  }
  CHECK(i == spec.enumerated_size());
}

TEST_CASE("enumeration refuses spaces over the size guard") {
  const SpaceSpec big = SpaceSpec::variable_dag(8, 20, 10);
  CHECK(big.enumerated_size() > kMaxSpaceSize);
  CHECK_THROWS_AS(enumerate_space(big), std::invalid_argument);
}

TEST_CASE("fixed neighbors: 24 each, symmetric, irreflexive") {
  const SpaceSpec spec = SpaceSpec::fixed_dag(6, 5);
  const SearchSpace space = SearchSpace::enumerate(spec);
  for (ArchIndex a = 0; a < space.size(); ++a) {
    const auto nb = space.neighbors(a);
    REQUIRE(nb.size() == 24);
    CHECK(std::is_sorted(nb.begin(), nb.end()));
    CHECK(std::find(nb.begin(), nb.end(), a) == nb.end());
    if (a % 97 == 0) {
      for (ArchIndex b : nb) {
        const auto back = space.neighbors(b);
        CHECK(std::binary_search(back.begin(), back.end(), a));
      }
    }
  }
  CHECK(neighbors(decode_index(SpaceSpec::fixed_dag(1, 1), 0), SpaceSpec::fixed_dag(1, 1)).empty());
}

TEST_CASE("variable neighbors are symmetric, irreflexive and one edit away") {
  const SpaceSpec spec = SpaceSpec::variable_dag(7, 9, 3);
  Rng rng(4);
  for (int t = 0; t < 200; ++t) {
    const Architecture a = random_variable_arch(spec, rng);
    const auto nb = neighbors(a, spec);
    std::set<std::uint64_t> ids;
    for (const Architecture& b : nb) {
      CHECK(b.index != a.index);
      CHECK(ids.insert(b.index).second);
      CHECK(b.adjacency->edge_count() <= 9);
      const bool same_graph = b.adjacency == a.adjacency;
      if (same_graph) {
        int diff = 0;
        for (std::size_t i = 0; i < a.ops.size(); ++i) diff += a.ops[i] != b.ops[i];
        CHECK(diff == 1);
      } else {
        CHECK(b.ops == a.ops);
        CHECK(std::popcount(a.adjacency->bits() ^ b.adjacency->bits()) == 1);
      }
      const auto back = neighbors(b, spec);
      CHECK(std::any_of(back.begin(), back.end(), [&](const Architecture& c) { return c.index == a.index; }));
    }
  }
}

TEST_CASE("explicit architecture lists support lookup and reject duplicates") {
  const SpaceSpec spec = SpaceSpec::variable_dag(4, 3, 2);
  std::vector<Architecture> archs;
  for (std::uint64_t i : {7u, 3u, 40u, 11u}) archs.push_back(decode_index(spec, i));
  for (std::size_t i = 0; i < archs.size(); ++i) archs[i].index = static_cast<ArchIndex>(i);
  const SearchSpace space = SearchSpace::from_architectures(spec, archs);
  CHECK(!space.canonical());
  CHECK(space.find(decode_index(spec, 40)) == ArchIndex{2});
  CHECK(!space.find(decode_index(spec, 5)).has_value());
  CHECK_THROWS_AS(space.at(4), std::out_of_range);

  auto dup = archs;
  dup.push_back(archs[1]);
  dup.back().index = 4;
  CHECK_THROWS_AS(SearchSpace::from_architectures(spec, dup), std::invalid_argument);
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(SpaceSpec::fixed_dag(0, 5).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SpaceSpec::fixed_dag(3, 0).validate(), std::invalid_argument);
  CHECK_THROWS_AS(SpaceSpec::variable_dag(9, 9, 3).validate(), std::invalid_argument);
  CHECK_THROWS_AS(parse_space_kind("ring"), std::invalid_argument);
}
