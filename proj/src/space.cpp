#include "weaknas/space.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <stdexcept>
#include <string>

namespace weaknas {

namespace {

constexpr std::uint64_t kSaturated = std::numeric_limits<std::uint64_t>::max();

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kSaturated / a) return kSaturated;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) { return a > kSaturated - b ? kSaturated : a + b; }

std::uint64_t sat_pow(std::uint64_t base, int exp) {
  std::uint64_t out = 1;
  for (int i = 0; i < exp; ++i) out = sat_mul(out, base);
  return out;
}

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return out;
}

// Masks over `positions` bits with at most `max_ones` bits set.
std::uint64_t masks_with_at_most(int positions, int max_ones) {
  if (max_ones < 0) return 0;
  std::uint64_t total = 0;
  for (int j = 0; j <= std::min(max_ones, positions); ++j) total = sat_add(total, binomial(positions, j));
  return total;
}

int upper_positions(int n) { return n * (n - 1) / 2; }

// Upper-triangular position k of an n-node graph, row-major over i < j.
std::pair<int, int> position_to_edge(int n, int k) {
  for (int i = 0; i < n; ++i) {
    const int row = n - 1 - i;
    if (k < row) return {i, i + 1 + k};
    k -= row;
  }
  throw std::logic_error("edge position out of range");
}

std::uint64_t edge_mask(const AdjacencyMatrix& adj) {
  const int n = adj.num_nodes();
  std::uint64_t mask = 0;
  int k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      if (adj.edge(i, j)) mask |= std::uint64_t{1} << k;
    }
  }
  return mask;
}

std::uint64_t mask_rank(std::uint64_t mask, int positions, int max_edges) {
  std::uint64_t rank = 0;
  int ones = 0;
  for (int p = positions - 1; p >= 0; --p) {
    if (mask >> p & 1U) {
      rank += masks_with_at_most(p, max_edges - ones);
      ++ones;
    }
  }
  return rank;
}

std::uint64_t mask_unrank(std::uint64_t rank, int positions, int max_edges) {
  std::uint64_t mask = 0;
  int ones = 0;
  for (int p = positions - 1; p >= 0; --p) {
    const std::uint64_t zeros_here = masks_with_at_most(p, max_edges - ones);
    if (rank >= zeros_here) {
      rank -= zeros_here;
      mask |= std::uint64_t{1} << p;
      ++ones;
    }
  }
  return mask;
}

std::uint64_t variable_block_size(const SpaceSpec& spec, int n) {
  return sat_mul(masks_with_at_most(upper_positions(n), spec.max_edges),
                 sat_pow(static_cast<std::uint64_t>(spec.op_set_size), n - 2));
}

std::uint64_t digits_value(const std::vector<int>& ops, int base) {
  std::uint64_t value = 0;
  for (int op : ops) value = value * static_cast<std::uint64_t>(base) + static_cast<std::uint64_t>(op);
  return value;
}

std::vector<int> value_digits(std::uint64_t value, int base, int count) {
  std::vector<int> ops(static_cast<std::size_t>(count));
  for (int i = count - 1; i >= 0; --i) {
    ops[static_cast<std::size_t>(i)] = static_cast<int>(value % static_cast<std::uint64_t>(base));
    value /= static_cast<std::uint64_t>(base);
  }
  return ops;
}

// Neighbors without indices.
std::vector<Architecture> structural_neighbors(const Architecture& arch, const SpaceSpec& spec) {
  std::vector<Architecture> out;
  const int op_count = spec.op_count();
  for (std::size_t e = 0; e < arch.ops.size(); ++e) {
    for (int op = 0; op < op_count; ++op) {
      if (op == arch.ops[e]) continue;
      Architecture n = arch;
      n.ops[e] = op;
      out.push_back(std::move(n));
    }
  }
  if (spec.kind == SpaceKind::VariableDag) {
    const AdjacencyMatrix& adj = *arch.adjacency;
    const int nodes = adj.num_nodes();
    const int edges = adj.edge_count();
    for (int i = 0; i < nodes; ++i) {
      for (int j = i + 1; j < nodes; ++j) {
        const bool present = adj.edge(i, j);
        if (!present && edges + 1 > spec.max_edges) continue;
        Architecture n = arch;
        n.adjacency->set_edge(i, j, !present);
        out.push_back(std::move(n));
      }
    }
  }
  return out;
}

}  // namespace

std::string to_string(SpaceKind kind) { return kind == SpaceKind::FixedDag ? "fixed" : "variable"; }

SpaceKind parse_space_kind(const std::string& text) {
  if (text == "fixed" || text == "FixedDag") return SpaceKind::FixedDag;
  if (text == "variable" || text == "VariableDag") return SpaceKind::VariableDag;
  throw std::invalid_argument("unknown space kind '" + text + "' (expected fixed or variable)");
}

SpaceSpec SpaceSpec::fixed_dag(int num_edges, int num_ops) {
  SpaceSpec spec;
  spec.kind = SpaceKind::FixedDag;
  spec.num_edges = num_edges;
  spec.num_ops = num_ops;
  spec.validate();
  return spec;
}

SpaceSpec SpaceSpec::variable_dag(int max_nodes, int max_edges, int op_set_size) {
  SpaceSpec spec;
  spec.kind = SpaceKind::VariableDag;
  spec.max_nodes = max_nodes;
  spec.max_edges = max_edges;
  spec.op_set_size = op_set_size;
  spec.validate();
  return spec;
}

void SpaceSpec::validate() const {
  if (kind == SpaceKind::FixedDag) {
    if (num_edges < 1) throw std::invalid_argument("FixedDag space needs num_edges >= 1");
    if (num_ops < 1) throw std::invalid_argument("FixedDag space needs num_ops >= 1");
    return;
  }
  if (max_nodes < 2 || max_nodes > AdjacencyMatrix::kMaxNodes) {
    throw std::invalid_argument("VariableDag space needs 2 <= max_nodes <= " +
                                std::to_string(AdjacencyMatrix::kMaxNodes));
  }
  if (max_edges < 1) throw std::invalid_argument("VariableDag space needs max_edges >= 1");
  if (op_set_size < 1 || op_set_size > 15) {
    throw std::invalid_argument("VariableDag space needs 1 <= op_set_size <= 15");
  }
}

std::uint64_t SpaceSpec::enumerated_size() const {
  validate();
  if (kind == SpaceKind::FixedDag) return sat_pow(static_cast<std::uint64_t>(num_ops), num_edges);
  std::uint64_t total = 0;
  for (int n = 2; n <= max_nodes; ++n) total = sat_add(total, variable_block_size(*this, n));
  return total;
}

AdjacencyMatrix::AdjacencyMatrix(int num_nodes) : num_nodes_(num_nodes) {
  if (num_nodes < 0 || num_nodes > kMaxNodes) {
    throw std::invalid_argument("adjacency matrix supports at most " + std::to_string(kMaxNodes) + " nodes");
  }
}

bool AdjacencyMatrix::edge(int from, int to) const {
  return (bits_ >> (from * kMaxNodes + to) & 1U) != 0;
}

void AdjacencyMatrix::set_edge(int from, int to, bool present) {
  if (from < 0 || to < 0 || from >= num_nodes_ || to >= num_nodes_) {
    throw std::out_of_range("adjacency entry outside the matrix");
  }
  const std::uint64_t bit = std::uint64_t{1} << (from * kMaxNodes + to);
  bits_ = present ? (bits_ | bit) : (bits_ & ~bit);
}

int AdjacencyMatrix::edge_count() const { return std::popcount(bits_); }

bool AdjacencyMatrix::is_upper_triangular() const {
  for (int i = 0; i < num_nodes_; ++i) {
    for (int j = 0; j <= i; ++j) {
      if (edge(i, j)) return false;
    }
  }
  return true;
}

void validate_architecture(const Architecture& arch, const SpaceSpec& spec) {
  const int op_count = spec.op_count();
  for (int op : arch.ops) {
    if (op < 0 || op >= op_count) {
      throw std::invalid_argument("operator id " + std::to_string(op) + " outside [0, " +
                                  std::to_string(op_count) + ")");
    }
  }
  if (spec.kind == SpaceKind::FixedDag) {
    if (arch.adjacency) throw std::invalid_argument("FixedDag architectures carry no adjacency matrix");
    if (static_cast<int>(arch.ops.size()) != spec.num_edges) {
      throw std::invalid_argument("expected " + std::to_string(spec.num_edges) + " edge operators, got " +
                                  std::to_string(arch.ops.size()));
    }
    return;
  }
  if (!arch.adjacency) throw std::invalid_argument("VariableDag architecture lacks an adjacency matrix");
  const AdjacencyMatrix& adj = *arch.adjacency;
  if (adj.num_nodes() < 2 || adj.num_nodes() > spec.max_nodes) {
    throw std::invalid_argument("node count " + std::to_string(adj.num_nodes()) + " outside [2, " +
                                std::to_string(spec.max_nodes) + "]");
  }
  if (static_cast<int>(arch.ops.size()) != adj.num_nodes() - 2) {
    throw std::invalid_argument("VariableDag architecture needs one operator per interior node");
  }
  if (!adj.is_upper_triangular()) throw std::invalid_argument("adjacency matrix is not upper-triangular");
  if (adj.edge_count() > spec.max_edges) {
    throw std::invalid_argument("architecture has " + std::to_string(adj.edge_count()) + " edges, limit is " +
                                std::to_string(spec.max_edges));
  }
}

Architecture decode_index(const SpaceSpec& spec, std::uint64_t index) {
  const std::uint64_t size = spec.enumerated_size();
  if (index >= size) throw std::out_of_range("architecture index " + std::to_string(index) + " out of range");
  if (index > std::numeric_limits<ArchIndex>::max()) throw std::out_of_range("architecture index exceeds 32 bits");
  Architecture arch;
  arch.index = static_cast<ArchIndex>(index);
  if (spec.kind == SpaceKind::FixedDag) {
    arch.ops = value_digits(index, spec.num_ops, spec.num_edges);
    return arch;
  }
  std::uint64_t local = index;
  for (int n = 2; n <= spec.max_nodes; ++n) {
    const std::uint64_t block = variable_block_size(spec, n);
    if (local >= block) {
      local -= block;
      continue;
    }
    const std::uint64_t op_combos = sat_pow(static_cast<std::uint64_t>(spec.op_set_size), n - 2);
    const std::uint64_t mask = mask_unrank(local / op_combos, upper_positions(n), spec.max_edges);
    arch.ops = value_digits(local % op_combos, spec.op_set_size, n - 2);
    AdjacencyMatrix adj(n);
    for (int k = 0; k < upper_positions(n); ++k) {
      if (mask >> k & 1U) {
        const auto [i, j] = position_to_edge(n, k);
        adj.set_edge(i, j);
      }
    }
    arch.adjacency = adj;
    return arch;
  }
  throw std::logic_error("decode_index: index not located");
}

std::uint64_t encode_index(const SpaceSpec& spec, const Architecture& arch) {
  validate_architecture(arch, spec);
  if (spec.kind == SpaceKind::FixedDag) return digits_value(arch.ops, spec.num_ops);
  const int n = arch.adjacency->num_nodes();
  std::uint64_t offset = 0;
  for (int m = 2; m < n; ++m) offset = sat_add(offset, variable_block_size(spec, m));
  const std::uint64_t op_combos = sat_pow(static_cast<std::uint64_t>(spec.op_set_size), n - 2);
  const std::uint64_t rank = mask_rank(edge_mask(*arch.adjacency), upper_positions(n), spec.max_edges);
  return offset + rank * op_combos + digits_value(arch.ops, spec.op_set_size);
}

ArchitectureRange::iterator::iterator(const SpaceSpec* spec, std::uint64_t pos, std::uint64_t end)
    : spec_(spec), pos_(pos), end_(end) {
  if (pos_ < end_) current_ = decode_index(*spec_, pos_);
}

ArchitectureRange::iterator& ArchitectureRange::iterator::operator++() {
  ++pos_;
  if (pos_ < end_) current_ = decode_index(*spec_, pos_);
  return *this;
}

ArchitectureRange::ArchitectureRange(SpaceSpec spec) : spec_(spec), size_(spec.enumerated_size()) {}

ArchitectureRange enumerate_space(const SpaceSpec& spec) {
  const std::uint64_t size = spec.enumerated_size();
  if (size > kMaxSpaceSize) {
    throw std::invalid_argument("space has " +
                                (size == kSaturated ? std::string("more than 2^64") : std::to_string(size)) +
                                " architectures; enumeration is limited to " + std::to_string(kMaxSpaceSize));
  }
  return ArchitectureRange(spec);
}

std::vector<Architecture> neighbors(const Architecture& arch, const SpaceSpec& spec) {
  validate_architecture(arch, spec);
  std::vector<Architecture> out = structural_neighbors(arch, spec);
  for (Architecture& n : out) {
    const std::uint64_t idx = encode_index(spec, n);
    if (idx > std::numeric_limits<ArchIndex>::max()) throw std::out_of_range("neighbor index exceeds 32 bits");
    n.index = static_cast<ArchIndex>(idx);
  }
  std::sort(out.begin(), out.end(), [](const Architecture& a, const Architecture& b) { return a.index < b.index; });
  return out;
}

SearchSpace SearchSpace::enumerate(const SpaceSpec& spec) {
  SearchSpace space;
  space.spec_ = spec;
  space.canonical_ = true;
  const ArchitectureRange range = enumerate_space(spec);
  space.archs_.reserve(range.size());
  for (const Architecture& arch : range) space.archs_.push_back(arch);
  return space;
}

SearchSpace SearchSpace::from_architectures(const SpaceSpec& spec, std::vector<Architecture> archs) {
  spec.validate();
  if (archs.size() > kMaxSpaceSize) throw std::invalid_argument("space exceeds the enumeration limit");
  SearchSpace space;
  space.spec_ = spec;
  bool canonical = spec.enumerated_size() == archs.size();
  for (std::size_t i = 0; i < archs.size(); ++i) {
    const Architecture& arch = archs[i];
    if (arch.index != i) throw std::invalid_argument("architecture list must be ordered by dense index");
    validate_architecture(arch, spec);
    if (canonical && encode_index(spec, arch) != i) canonical = false;
  }
  if (spec.kind == SpaceKind::FixedDag && !canonical) {
    throw std::invalid_argument("FixedDag architectures must follow the canonical index order");
  }
  space.canonical_ = canonical;
  space.archs_ = std::move(archs);
  if (!canonical) {
    space.lookup_.reserve(space.archs_.size());
    for (const Architecture& arch : space.archs_) {
      if (!space.lookup_.emplace(structure_key(arch), arch.index).second) {
        throw std::invalid_argument("duplicate architecture structure at index " + std::to_string(arch.index));
      }
    }
  }
  return space;
}

const Architecture& SearchSpace::at(ArchIndex index) const {
  if (index >= archs_.size()) {
    throw std::out_of_range("architecture index " + std::to_string(index) + " outside space of size " +
                            std::to_string(archs_.size()));
  }
  return archs_[index];
}

std::pair<std::uint64_t, std::uint64_t> SearchSpace::structure_key(const Architecture& arch) {
  std::uint64_t ops = 0;
  for (int op : arch.ops) ops = ops << 4 | static_cast<std::uint64_t>(op + 1);
  if (!arch.adjacency) return {0, ops};
  ops = ops << 4 | static_cast<std::uint64_t>(arch.adjacency->num_nodes());
  return {arch.adjacency->bits(), ops};
}

std::optional<ArchIndex> SearchSpace::find(const Architecture& structure) const {
  if (canonical_) {
    try {
      const std::uint64_t idx = encode_index(spec_, structure);
      if (idx < archs_.size()) return static_cast<ArchIndex>(idx);
    } catch (const std::invalid_argument&) {
    }
    return std::nullopt;
  }
  auto it = lookup_.find(structure_key(structure));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

std::vector<ArchIndex> SearchSpace::neighbors(ArchIndex index) const {
  const Architecture& arch = at(index);
  std::vector<ArchIndex> out;
  if (canonical_) {
    for (const Architecture& n : weaknas::neighbors(arch, spec_)) out.push_back(n.index);
    return out;
  }
  for (const Architecture& n : structural_neighbors(arch, spec_)) {
    if (auto found = find(n)) out.push_back(*found);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace weaknas
