#pragma once

#include <cstdint>
#include <span>

#include "weaknas/search.hpp"

namespace weaknas::detail {

std::uint64_t hash_scores(std::span<const double> scores);

/// Fills the query log and the argmax-by-value selection.
void finalize(RunResult& result, const TabularBenchmark& bench, const SampleSet& sampled);

/// Queries `batch` in order. Returns true when stop_at_optimum fired.
bool query_all(const TabularBenchmark& bench, Signal signal, std::span<const ArchIndex> batch, SampleSet& sampled,
               IterationRecord& record, bool stop_at_optimum);

}  // namespace weaknas::detail
