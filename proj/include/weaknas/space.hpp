#pragma once
// Finite architecture spaces: fixed-connectivity cells (an operator per edge)
// and variable DAG cells (an operator per interior node plus an
// upper-triangular adjacency matrix). Every architecture has a dense index.

#include <compare>
#include <cstdint>
#include <iterator>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace weaknas {

using ArchIndex = std::uint32_t;

/// Full-space enumeration and prediction must stay tractable.
inline constexpr std::uint64_t kMaxSpaceSize = 10'000'000;

enum class SpaceKind { FixedDag, VariableDag };

std::string to_string(SpaceKind kind);
SpaceKind parse_space_kind(const std::string& text);

struct SpaceSpec {
  SpaceKind kind = SpaceKind::FixedDag;
  // FixedDag
  int num_edges = 0;
  int num_ops = 0;
  // VariableDag
  int max_nodes = 0;
  int max_edges = 0;
  int op_set_size = 0;

  static SpaceSpec fixed_dag(int num_edges, int num_ops);
  static SpaceSpec variable_dag(int max_nodes, int max_edges, int op_set_size);

  /// Throws std::invalid_argument on non-positive counts or unsupported sizes.
  void validate() const;

  /// Number of architectures in the canonical enumeration, saturating at
  /// UINT64_MAX.
  std::uint64_t enumerated_size() const;

  /// Operator alphabet size (num_ops or op_set_size).
  int op_count() const { return kind == SpaceKind::FixedDag ? num_ops : op_set_size; }

  bool operator==(const SpaceSpec&) const = default;
};

/// Square 0/1 matrix over at most kMaxNodes nodes, stored as a bitmask with
/// a fixed row stride of kMaxNodes.
class AdjacencyMatrix {
 public:
  static constexpr int kMaxNodes = 8;

  AdjacencyMatrix() = default;
  explicit AdjacencyMatrix(int num_nodes);

  int num_nodes() const { return num_nodes_; }
  bool edge(int from, int to) const;
  void set_edge(int from, int to, bool present = true);
  int edge_count() const;
  bool is_upper_triangular() const;
  std::uint64_t bits() const { return bits_; }

  bool operator==(const AdjacencyMatrix&) const = default;

 private:
  int num_nodes_ = 0;
  std::uint64_t bits_ = 0;
};

/// For FixedDag `ops` holds one operator per edge. For VariableDag it holds
/// the operator of each interior node (node 0 is the input, the last node is
/// the output), so num_nodes == ops.size() + 2.
struct Architecture {
  ArchIndex index = 0;
  std::vector<int> ops;
  std::optional<AdjacencyMatrix> adjacency;

  bool same_structure(const Architecture& other) const {
    return ops == other.ops && adjacency == other.adjacency;
  }
};

/// Throws std::invalid_argument if `arch` is not a member of `spec`.
void validate_architecture(const Architecture& arch, const SpaceSpec& spec);

/// Canonical dense index <-> structure. FixedDag reads ops as base-num_ops
/// digits with ops[0] most significant. VariableDag orders by node count,
/// then by upper-triangular edge mask (numeric, restricted to at most
/// max_edges edges), then by interior ops as base-op_set_size digits.
Architecture decode_index(const SpaceSpec& spec, std::uint64_t index);
std::uint64_t encode_index(const SpaceSpec& spec, const Architecture& arch);

/// Lazily decoded canonical enumeration.
class ArchitectureRange {
 public:
  class iterator {
   public:
    using value_type = Architecture;
    using difference_type = std::ptrdiff_t;
    using iterator_concept = std::input_iterator_tag;

    iterator() = default;
    iterator(const SpaceSpec* spec, std::uint64_t pos, std::uint64_t end);

    const Architecture& operator*() const { return current_; }
    const Architecture* operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    bool operator==(std::default_sentinel_t) const { return pos_ >= end_; }

   private:
    const SpaceSpec* spec_ = nullptr;
    std::uint64_t pos_ = 0;
    std::uint64_t end_ = 0;
    Architecture current_;
  };

  explicit ArchitectureRange(SpaceSpec spec);

  iterator begin() const { return iterator(&spec_, 0, size_); }
  std::default_sentinel_t end() const { return {}; }
  std::uint64_t size() const { return size_; }

 private:
  SpaceSpec spec_;
  std::uint64_t size_ = 0;
};

/// Every architecture exactly once, in index order. Refuses spaces larger
/// than kMaxSpaceSize.
ArchitectureRange enumerate_space(const SpaceSpec& spec);

/// All architectures at edit distance exactly one, with canonical indices,
/// sorted by index: one operator change, or (VariableDag) one edge toggled
/// while keeping at most max_edges edges.
std::vector<Architecture> neighbors(const Architecture& arch, const SpaceSpec& spec);

/// Materialized space. Either canonical (index == canonical index) or built
/// from an explicit architecture list (e.g. a deduplicated cell table loaded
/// from disk), in which case structure lookup goes through a hash map.
class SearchSpace {
 public:
  static SearchSpace enumerate(const SpaceSpec& spec);
  /// `archs[i].index` must equal i; structures must be distinct members of
  /// `spec`.
  static SearchSpace from_architectures(const SpaceSpec& spec, std::vector<Architecture> archs);

  const SpaceSpec& spec() const { return spec_; }
  std::size_t size() const { return archs_.size(); }
  bool canonical() const { return canonical_; }

  /// Throws std::out_of_range.
  const Architecture& at(ArchIndex index) const;
  const std::vector<Architecture>& architectures() const { return archs_; }

  std::optional<ArchIndex> find(const Architecture& structure) const;

  /// Neighbors that exist in this space, sorted by index.
  std::vector<ArchIndex> neighbors(ArchIndex index) const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& k) const noexcept {
      return static_cast<std::size_t>(k.first * 0x9e3779b97f4a7c15ULL ^ k.second);
    }
  };
  static std::pair<std::uint64_t, std::uint64_t> structure_key(const Architecture& arch);

  SpaceSpec spec_;
  bool canonical_ = true;
  std::vector<Architecture> archs_;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, ArchIndex, KeyHash> lookup_;
};

}  // namespace weaknas
