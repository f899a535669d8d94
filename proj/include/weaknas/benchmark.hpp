#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "weaknas/encoding.hpp"
#include "weaknas/space.hpp"

namespace weaknas {

enum class Signal { Validation, Test };

struct AccuracyRecord {
  double val_acc = 0.0;   // percent
  double test_acc = 0.0;  // percent

  bool operator==(const AccuracyRecord&) const = default;
};

/// Complete architecture -> accuracy table. Immutable after construction.
class TabularBenchmark {
 public:
  /// Throws std::invalid_argument if record count differs from the space
  /// size or any accuracy lies outside [0, 100].
  TabularBenchmark(SearchSpace space, std::vector<AccuracyRecord> records);

  const SearchSpace& space() const { return space_; }
  const SpaceSpec& spec() const { return space_.spec(); }
  std::size_t size() const { return records_.size(); }
  const std::vector<AccuracyRecord>& records() const { return records_; }

  /// Pure lookup. Throws std::out_of_range for indices outside the space.
  double query(ArchIndex index, Signal signal) const;

  /// Argmax ids, ties broken by the lowest index.
  ArchIndex optimum_val_index() const { return optimum_val_; }
  ArchIndex optimum_test_index() const { return optimum_test_; }
  ArchIndex optimum_index(Signal signal) const {
    return signal == Signal::Validation ? optimum_val_ : optimum_test_;
  }
  double max_accuracy(Signal signal) const { return query(optimum_index(signal), signal); }

  /// The `count` best architectures by `signal`, best first, ties broken by
  /// the lowest index.
  std::vector<ArchIndex> top_indices(std::size_t count, Signal signal) const;

  bool operator==(const TabularBenchmark& other) const {
    return spec() == other.spec() && records_ == other.records_;
  }

 private:
  SearchSpace space_;
  std::vector<AccuracyRecord> records_;
  ArchIndex optimum_val_ = 0;
  ArchIndex optimum_test_ = 0;
};

/// Gaussian radial bumps in encoding space:
///   acc(x) = base + sum_c amplitude_c * exp(-|enc(x) - center_c|^2 / bandwidth_c^2) + noise
/// with independent noise draws for the validation and test columns, clipped
/// to [0, 100]. Each center is the encoding of a distinct random architecture.
struct SyntheticParams {
  int num_clusters = 4;
  double noise_sd = 0.5;
  std::uint64_t seed = 0;

  double base_accuracy = 50.0;
  double amplitude_min = 10.0;
  double amplitude_max = 30.0;
  double bandwidth_min = 2.0;
  double bandwidth_max = 4.0;
};

/// Deterministic in (spec, params). The validation optimum is made unique
/// by lowering tied maxima other than the lowest index by a small epsilon.
/// Throws std::invalid_argument for num_clusters < 1, negative noise, or a
/// space beyond kMaxSpaceSize.
TabularBenchmark generate_synthetic_benchmark(const SpaceSpec& spec, const SyntheticParams& params);

/// Amount subtracted from tied validation maxima.
inline constexpr double kOptimumTieEpsilon = 1e-6;

/// Malformed benchmark file. `line()` is 1-based, 0 when the problem is not
/// tied to a specific line (e.g. a missing index).
class BenchmarkFormatError : public std::runtime_error {
 public:
  BenchmarkFormatError(const std::string& message, std::size_t line);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

TabularBenchmark load_benchmark(const std::filesystem::path& path);
TabularBenchmark parse_benchmark(const std::string& text);

/// One record per line, indices ascending, single-trial values written as
/// plain numbers. Byte-identical for equal benchmarks.
std::string serialize_benchmark(const TabularBenchmark& bench);
void save_benchmark(const TabularBenchmark& bench, const std::filesystem::path& path);

}  // namespace weaknas
