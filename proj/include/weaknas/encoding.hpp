#pragma once
// Architecture feature encodings.
//
// One-hot (FixedDag): num_edges groups of num_ops slots; slot
// e * num_ops + ops[e] is 1.
//
// Adjacency (VariableDag), length max_nodes^2 + max_nodes * (op_set_size + 2):
//   [0, max_nodes^2)  adjacency, row-major over a max_nodes x max_nodes grid.
//                     An n-node graph occupies the top-left n x n block
//                     (input is node 0, output is node n-1); the remaining
//                     rows and columns are zero.
//   then per node slot s, a one-hot of width op_set_size + 2:
//                     position 0 marks the input node, 1 + op marks an
//                     interior operator, op_set_size + 1 marks the output
//                     node. Slots s >= n are all zero.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "weaknas/space.hpp"

namespace weaknas {

enum class Encoding { OneHot, Adjacency };

std::string to_string(Encoding encoding);
Encoding parse_encoding(const std::string& text);
Encoding default_encoding(SpaceKind kind);

struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  bool operator==(const FeatureVector&) const = default;
};

/// Row-major dense matrix, one architecture per row.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void append_row(std::span<const double> values);

  static FeatureMatrix from_vectors(std::span<const FeatureVector> vectors);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

std::size_t feature_length(const SpaceSpec& spec, Encoding encoding);

/// Throws std::invalid_argument unless spec.kind is FixedDag.
FeatureVector encode_one_hot(const Architecture& arch, const SpaceSpec& spec);

/// Throws std::invalid_argument unless spec.kind is VariableDag and the
/// adjacency is upper-triangular. A zero-node matrix (pure padding) encodes
/// to all zeros.
FeatureVector encode_adjacency(const Architecture& arch, const SpaceSpec& spec);

/// Inverse of encode_adjacency for graphs with at least two nodes. The
/// returned architecture has index 0.
Architecture decode_adjacency(const FeatureVector& features, const SpaceSpec& spec);

FeatureVector encode(const Architecture& arch, const SpaceSpec& spec, Encoding encoding);

/// Throws std::invalid_argument if the encoding does not fit the space kind.
void check_encoding(const SpaceSpec& spec, Encoding encoding);

FeatureMatrix encode_space(const SearchSpace& space, Encoding encoding);

}  // namespace weaknas
