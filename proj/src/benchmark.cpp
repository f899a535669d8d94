#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "weaknas/benchmark.hpp"
#include "weaknas/kernels.hpp"
#include "weaknas/rng.hpp"

namespace weaknas {

namespace {

ArchIndex argmax_lowest(const std::vector<AccuracyRecord>& records, Signal signal) {
  ArchIndex best = 0;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const double cand = signal == Signal::Validation ? records[i].val_acc : records[i].test_acc;
    const double cur = signal == Signal::Validation ? records[best].val_acc : records[best].test_acc;
    if (cand > cur) best = static_cast<ArchIndex>(i);
  }
  return best;
}

double clip_percent(double v) { return std::clamp(v, 0.0, 100.0); }

}  // namespace

TabularBenchmark::TabularBenchmark(SearchSpace space, std::vector<AccuracyRecord> records)
    : space_(std::move(space)), records_(std::move(records)) {
  if (records_.size() != space_.size()) {
    throw std::invalid_argument("benchmark has " + std::to_string(records_.size()) + " records for a space of " +
                                std::to_string(space_.size()));
  }
  if (records_.empty()) throw std::invalid_argument("benchmark is empty");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto& r = records_[i];
    if (!(r.val_acc >= 0.0 && r.val_acc <= 100.0 && r.test_acc >= 0.0 && r.test_acc <= 100.0)) {
      throw std::invalid_argument("accuracy of architecture " + std::to_string(i) + " outside [0, 100]");
    }
  }
  optimum_val_ = argmax_lowest(records_, Signal::Validation);
  optimum_test_ = argmax_lowest(records_, Signal::Test);
}

double TabularBenchmark::query(ArchIndex index, Signal signal) const {
  if (index >= records_.size()) {
    throw std::out_of_range("architecture index " + std::to_string(index) + " outside benchmark of size " +
                            std::to_string(records_.size()));
  }
  const AccuracyRecord& r = records_[index];
  return signal == Signal::Validation ? r.val_acc : r.test_acc;
}

std::vector<ArchIndex> TabularBenchmark::top_indices(std::size_t count, Signal signal) const {
  count = std::min(count, records_.size());
  std::vector<ArchIndex> order(records_.size());
  std::iota(order.begin(), order.end(), ArchIndex{0});
  auto better = [&](ArchIndex a, ArchIndex b) {
    const double va = query(a, signal);
    const double vb = query(b, signal);
    return va != vb ? va > vb : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count), order.end(), better);
  order.resize(count);
  return order;
}

TabularBenchmark generate_synthetic_benchmark(const SpaceSpec& spec, const SyntheticParams& params) {
  if (params.num_clusters < 1) throw std::invalid_argument("synthetic benchmark needs num_clusters >= 1");
  if (!(params.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be non-negative");
  if (!(params.amplitude_min <= params.amplitude_max) || !(params.bandwidth_min > 0.0) ||
      !(params.bandwidth_min <= params.bandwidth_max)) {
    throw std::invalid_argument("invalid synthetic amplitude/bandwidth range");
  }
  SearchSpace space = SearchSpace::enumerate(spec);
  if (static_cast<std::size_t>(params.num_clusters) > space.size()) {
    throw std::invalid_argument("more clusters than architectures");
  }
  const Encoding encoding = default_encoding(spec.kind);
  const FeatureMatrix features = encode_space(space, encoding);

  struct Cluster {
    ArchIndex center;
    double amplitude;
    double bandwidth_sq;
  };
  Rng rng(params.seed);
  std::vector<Cluster> clusters;
  for (std::uint32_t c : rng.sample_without_replacement(static_cast<std::uint32_t>(space.size()),
                                                        static_cast<std::uint32_t>(params.num_clusters))) {
    const double amplitude = rng.uniform(params.amplitude_min, params.amplitude_max);
    const double bandwidth = rng.uniform(params.bandwidth_min, params.bandwidth_max);
    clusters.push_back({c, amplitude, bandwidth * bandwidth});
  }

  std::vector<AccuracyRecord> records(space.size());
  for (std::size_t i = 0; i < space.size(); ++i) {
    double signal = params.base_accuracy;
    for (const Cluster& c : clusters) {
      const double d2 = kernels::squared_distance(features.row(i), features.row(c.center));
      signal += c.amplitude * std::exp(-d2 / c.bandwidth_sq);
    }
    const double val_noise = rng.normal();
    const double test_noise = rng.normal();
    records[i].val_acc = clip_percent(signal + params.noise_sd * val_noise);
    records[i].test_acc = clip_percent(signal + params.noise_sd * test_noise);
  }

  // Unique validation optimum.
  double best = records[0].val_acc;
  for (const auto& r : records) best = std::max(best, r.val_acc);
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].val_acc == best) tied.push_back(i);
  }
  if (tied.size() > 1) {
    if (best >= kOptimumTieEpsilon) {
      for (std::size_t k = 1; k < tied.size(); ++k) records[tied[k]].val_acc = best - kOptimumTieEpsilon;
    } else {
      records[tied.front()].val_acc = best + kOptimumTieEpsilon;
    }
  }
  return TabularBenchmark(std::move(space), std::move(records));
}

}  // namespace weaknas
