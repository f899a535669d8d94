#include "weaknas/encoding.hpp"

#include <algorithm>
#include <stdexcept>

namespace weaknas {

std::string to_string(Encoding encoding) { return encoding == Encoding::OneHot ? "onehot" : "adjacency"; }

Encoding parse_encoding(const std::string& text) {
  if (text == "onehot" || text == "one-hot" || text == "OneHot") return Encoding::OneHot;
  if (text == "adjacency" || text == "Adjacency") return Encoding::Adjacency;
  throw std::invalid_argument("unknown encoding '" + text + "' (expected onehot or adjacency)");
}

Encoding default_encoding(SpaceKind kind) {
  return kind == SpaceKind::FixedDag ? Encoding::OneHot : Encoding::Adjacency;
}

void FeatureMatrix::append_row(std::span<const double> values) {
  if (rows_ == 0 && cols_ == 0) cols_ = values.size();
  if (values.size() != cols_) throw std::invalid_argument("feature length mismatch");
  data_.insert(data_.end(), values.begin(), values.end());
  ++rows_;
}

FeatureMatrix FeatureMatrix::from_vectors(std::span<const FeatureVector> vectors) {
  FeatureMatrix m;
  for (const FeatureVector& v : vectors) m.append_row(v.values);
  return m;
}

std::size_t feature_length(const SpaceSpec& spec, Encoding encoding) {
  check_encoding(spec, encoding);
  if (encoding == Encoding::OneHot) {
    return static_cast<std::size_t>(spec.num_edges) * static_cast<std::size_t>(spec.num_ops);
  }
  const auto m = static_cast<std::size_t>(spec.max_nodes);
  return m * m + m * static_cast<std::size_t>(spec.op_set_size + 2);
}

void check_encoding(const SpaceSpec& spec, Encoding encoding) {
  if (encoding == Encoding::OneHot && spec.kind != SpaceKind::FixedDag) {
    throw std::invalid_argument("one-hot encoding requires a FixedDag space");
  }
  if (encoding == Encoding::Adjacency && spec.kind != SpaceKind::VariableDag) {
    throw std::invalid_argument("adjacency encoding requires a VariableDag space");
  }
}

FeatureVector encode_one_hot(const Architecture& arch, const SpaceSpec& spec) {
  check_encoding(spec, Encoding::OneHot);
  validate_architecture(arch, spec);
  FeatureVector out{std::vector<double>(feature_length(spec, Encoding::OneHot), 0.0)};
  for (std::size_t e = 0; e < arch.ops.size(); ++e) {
    out.values[e * static_cast<std::size_t>(spec.num_ops) + static_cast<std::size_t>(arch.ops[e])] = 1.0;
  }
  return out;
}

FeatureVector encode_adjacency(const Architecture& arch, const SpaceSpec& spec) {
  check_encoding(spec, Encoding::Adjacency);
  if (!arch.adjacency) throw std::invalid_argument("adjacency encoding needs an adjacency matrix");
  const AdjacencyMatrix& adj = *arch.adjacency;
  if (!adj.is_upper_triangular()) throw std::invalid_argument("adjacency matrix is not upper-triangular");
  if (adj.num_nodes() != 0) validate_architecture(arch, spec);

  const auto m = static_cast<std::size_t>(spec.max_nodes);
  const auto width = static_cast<std::size_t>(spec.op_set_size + 2);
  FeatureVector out{std::vector<double>(feature_length(spec, Encoding::Adjacency), 0.0)};
  const int n = adj.num_nodes();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (adj.edge(i, j)) out.values[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)] = 1.0;
    }
  }
  const std::size_t ops_base = m * m;
  for (int s = 0; s < n; ++s) {
    std::size_t slot;
    if (s == 0) {
      slot = 0;
    } else if (s == n - 1) {
      slot = width - 1;
    } else {
      slot = 1 + static_cast<std::size_t>(arch.ops[static_cast<std::size_t>(s - 1)]);
    }
    out.values[ops_base + static_cast<std::size_t>(s) * width + slot] = 1.0;
  }
  return out;
}

Architecture decode_adjacency(const FeatureVector& features, const SpaceSpec& spec) {
  if (features.size() != feature_length(spec, Encoding::Adjacency)) {
    throw std::invalid_argument("adjacency feature vector has the wrong length");
  }
  const auto m = static_cast<std::size_t>(spec.max_nodes);
  const auto width = static_cast<std::size_t>(spec.op_set_size + 2);
  const std::size_t ops_base = m * m;

  int n = 0;
  while (static_cast<std::size_t>(n) < m) {
    const auto begin = features.values.begin() + static_cast<std::ptrdiff_t>(ops_base + static_cast<std::size_t>(n) * width);
    if (std::none_of(begin, begin + static_cast<std::ptrdiff_t>(width), [](double v) { return v != 0.0; })) break;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("feature vector does not describe a graph with input and output");

  Architecture arch;
  AdjacencyMatrix adj(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (features.values[static_cast<std::size_t>(i) * m + static_cast<std::size_t>(j)] != 0.0) adj.set_edge(i, j);
    }
  }
  for (int s = 1; s < n - 1; ++s) {
    const std::size_t base = ops_base + static_cast<std::size_t>(s) * width;
    int op = -1;
    for (std::size_t k = 1; k + 1 < width; ++k) {
      if (features.values[base + k] != 0.0) op = static_cast<int>(k - 1);
    }
    if (op < 0) throw std::invalid_argument("interior node without an operator");
    arch.ops.push_back(op);
  }
  arch.adjacency = adj;
  validate_architecture(arch, spec);
  return arch;
}

FeatureVector encode(const Architecture& arch, const SpaceSpec& spec, Encoding encoding) {
  return encoding == Encoding::OneHot ? encode_one_hot(arch, spec) : encode_adjacency(arch, spec);
}

FeatureMatrix encode_space(const SearchSpace& space, Encoding encoding) {
  const std::size_t cols = feature_length(space.spec(), encoding);
  FeatureMatrix out(space.size(), cols);
  for (std::size_t i = 0; i < space.size(); ++i) {
    const FeatureVector v = encode(space.architectures()[i], space.spec(), encoding);
    std::copy(v.values.begin(), v.values.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace weaknas
