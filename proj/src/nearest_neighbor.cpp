#include <algorithm>
#include <stdexcept>

#include "weaknas/search.hpp"

namespace weaknas {

std::vector<ArchIndex> nearest_neighbor_sampling(std::span<const double> scores, const SampleSet& sampled,
                                                 std::size_t count, std::size_t pool_size,
                                                 const TabularBenchmark& bench, Signal signal, Rng& rng) {
  if (scores.size() != sampled.space_size()) throw std::invalid_argument("score count differs from space size");
  if (count > sampled.remaining()) throw std::invalid_argument("M exceeds the unsampled remainder");
  const std::vector<ArchIndex> pool = top_n_pool(scores, sampled, pool_size);

  std::vector<bool> touched(sampled.space_size(), false);
  const auto known = [&](ArchIndex a) { return sampled.contains(a) || touched[a]; };
  std::vector<ArchIndex> out;
  const auto charge = [&](ArchIndex a) {
    touched[a] = true;
    out.push_back(a);
  };

  std::vector<ArchIndex> starts;
  while (out.size() < count) {
    // Only untouched pool members can start a walk, so every walk costs at
    // least one query.
    starts.clear();
    for (ArchIndex a : pool) {
      if (!known(a)) starts.push_back(a);
    }
    if (starts.empty()) break;
    ArchIndex current = starts[rng.uniform_index(starts.size())];
    charge(current);

    while (out.size() < count) {
      const std::vector<ArchIndex> nbrs = bench.space().neighbors(current);
      for (ArchIndex v : nbrs) {
        if (out.size() >= count) break;
        if (!known(v)) charge(v);
      }
      if (out.size() >= count) break;
      ArchIndex best = current;
      double best_value = bench.query(current, signal);
      for (ArchIndex v : nbrs) {
        const double value = bench.query(v, signal);
        if (value > best_value || (value == best_value && best != current && v < best)) {
          best = v;
          best_value = value;
        }
      }
      if (best == current) break;  // local maximum
      current = best;
    }
  }
  return out;
}

}  // namespace weaknas
