#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "weaknas/benchmark.hpp"

namespace weaknas {

namespace {

using json = nlohmann::json;

std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Line on which each element of the top-level "records" array starts.
std::vector<std::size_t> record_start_lines(const std::string& text) {
  std::vector<std::size_t> lines;
  std::size_t line = 1;
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  bool in_records = false;
  std::string current;
  std::string last_string;
  std::string pending_key;
  for (char c : text) {
    if (c == '\n') ++line;
    if (in_string) {
      if (escaped) {
        escaped = false;
        current += c;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
        last_string = current;
      } else {
        current += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_string = true;
        current.clear();
        break;
      case ':':
        if (depth == 1) pending_key = last_string;
        break;
      case '[':
        if (depth == 1 && pending_key == "records") in_records = true;
        ++depth;
        break;
      case '{':
        if (in_records && depth == 2) lines.push_back(line);
        ++depth;
        break;
      case ']':
        --depth;
        if (depth == 1) in_records = false;
        break;
      case '}':
        --depth;
        break;
      default:
        break;
    }
  }
  return lines;
}

[[noreturn]] void fail(const std::string& message, std::size_t line) { throw BenchmarkFormatError(message, line); }

int require_int(const json& header, const char* key) {
  if (!header.contains(key) || !header[key].is_number_integer()) {
    fail(std::string("header field '") + key + "' missing or not an integer", 1);
  }
  return header[key].get<int>();
}

double mean_accuracy(const json& value, const char* key, std::size_t line) {
  std::vector<double> trials;
  if (value.is_number()) {
    trials.push_back(value.get<double>());
  } else if (value.is_array() && !value.empty()) {
    for (const json& t : value) {
      if (!t.is_number()) fail(std::string("'") + key + "' trial is not a number", line);
      trials.push_back(t.get<double>());
    }
  } else {
    fail(std::string("'") + key + "' must be a number or a non-empty list of numbers", line);
  }
  double sum = 0.0;
  for (double t : trials) {
    if (!(t >= 0.0 && t <= 100.0)) {
      fail(std::string("'") + key + "' value " + std::to_string(t) + " outside [0, 100]", line);
    }
    sum += t;
  }
  return sum / static_cast<double>(trials.size());
}

}  // namespace

BenchmarkFormatError::BenchmarkFormatError(const std::string& message, std::size_t line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message), line_(line) {}

TabularBenchmark parse_benchmark(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("invalid JSON: ") + e.what(), line_of_byte(text, e.byte == 0 ? 0 : e.byte - 1));
  }
  if (!doc.is_object()) fail("benchmark file must hold a JSON object", 1);
  if (!doc.contains("kind") || !doc["kind"].is_string()) fail("header field 'kind' missing", 1);

  SpaceSpec spec;
  try {
    spec.kind = parse_space_kind(doc["kind"].get<std::string>());
  } catch (const std::invalid_argument& e) {
    fail(e.what(), 1);
  }
  if (spec.kind == SpaceKind::FixedDag) {
    spec.num_edges = require_int(doc, "num_edges");
    spec.num_ops = require_int(doc, "num_ops");
  } else {
    spec.max_nodes = require_int(doc, "max_nodes");
    spec.op_set_size = require_int(doc, "num_ops");
    spec.max_edges = doc.contains("max_edges") ? require_int(doc, "max_edges") : spec.max_nodes * (spec.max_nodes - 1) / 2;
  }
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what(), 1);
  }
  const int size_field = require_int(doc, "size");
  if (size_field < 1 || static_cast<std::uint64_t>(size_field) > kMaxSpaceSize) {
    fail("header 'size' must be in [1, " + std::to_string(kMaxSpaceSize) + "]", 1);
  }
  const auto size = static_cast<std::size_t>(size_field);
  if (spec.kind == SpaceKind::FixedDag && spec.enumerated_size() != size) {
    fail("header 'size' " + std::to_string(size) + " does not match num_ops^num_edges = " +
             std::to_string(spec.enumerated_size()),
         1);
  }
  if (!doc.contains("records") || !doc["records"].is_array()) fail("'records' array missing", 1);

  const json& records = doc["records"];
  const std::vector<std::size_t> lines = record_start_lines(text);
  auto line_at = [&](std::size_t k) { return k < lines.size() ? lines[k] : std::size_t{0}; };

  std::vector<std::optional<Architecture>> archs(size);
  std::vector<AccuracyRecord> accs(size);
  std::vector<std::size_t> seen_line(size, 0);
  for (std::size_t k = 0; k < records.size(); ++k) {
    const json& rec = records[k];
    const std::size_t line = line_at(k);
    if (!rec.is_object()) fail("record is not an object", line);
    if (!rec.contains("index") || !rec["index"].is_number_integer()) fail("record lacks an integer 'index'", line);
    const auto raw_index = rec["index"].get<std::int64_t>();
    if (raw_index < 0 || static_cast<std::uint64_t>(raw_index) >= size) {
      fail("index " + std::to_string(raw_index) + " outside [0, " + std::to_string(size) + ")", line);
    }
    const auto index = static_cast<std::size_t>(raw_index);
    if (seen_line[index] != 0 || archs[index]) {
      fail("duplicate index " + std::to_string(index) + " (first seen on line " + std::to_string(seen_line[index]) + ")",
           line);
    }
    seen_line[index] = line;

    if (!rec.contains("ops") || !rec["ops"].is_array()) fail("record lacks an 'ops' list", line);
    Architecture arch;
    arch.index = static_cast<ArchIndex>(index);
    for (const json& op : rec["ops"]) {
      if (!op.is_number_integer()) fail("'ops' entries must be integers", line);
      arch.ops.push_back(op.get<int>());
    }
    if (spec.kind == SpaceKind::VariableDag) {
      if (!rec.contains("adjacency") || !rec["adjacency"].is_array()) {
        fail("VariableDag record lacks an 'adjacency' bit list", line);
      }
      const json& bits = rec["adjacency"];
      const std::size_t n = arch.ops.size() + 2;
      if (n > static_cast<std::size_t>(AdjacencyMatrix::kMaxNodes) || bits.size() != n * n) {
        fail("'adjacency' must list " + std::to_string(n * n) + " entries for " + std::to_string(n) + " nodes", line);
      }
      AdjacencyMatrix adj(static_cast<int>(n));
      for (std::size_t b = 0; b < bits.size(); ++b) {
        if (!bits[b].is_number_integer() || (bits[b].get<int>() != 0 && bits[b].get<int>() != 1)) {
          fail("'adjacency' entries must be 0 or 1", line);
        }
        if (bits[b].get<int>() == 1) adj.set_edge(static_cast<int>(b / n), static_cast<int>(b % n));
      }
      arch.adjacency = adj;
    }
    try {
      validate_architecture(arch, spec);
      if (spec.kind == SpaceKind::FixedDag && encode_index(spec, arch) != index) {
        fail("ops do not match the canonical decoding of index " + std::to_string(index), line);
      }
    } catch (const std::invalid_argument& e) {
      fail(e.what(), line);
    }
    if (!rec.contains("val_acc")) fail("record lacks 'val_acc'", line);
    if (!rec.contains("test_acc")) fail("record lacks 'test_acc'", line);
    accs[index].val_acc = mean_accuracy(rec["val_acc"], "val_acc", line);
    accs[index].test_acc = mean_accuracy(rec["test_acc"], "test_acc", line);
    archs[index] = std::move(arch);
  }
  for (std::size_t i = 0; i < size; ++i) {
    if (!archs[i]) fail("missing architecture index " + std::to_string(i), 0);
  }

  std::vector<Architecture> list;
  list.reserve(size);
  for (auto& a : archs) list.push_back(std::move(*a));
  try {
    return TabularBenchmark(SearchSpace::from_architectures(spec, std::move(list)), std::move(accs));
  } catch (const std::invalid_argument& e) {
    fail(e.what(), 0);
  }
}

TabularBenchmark load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open benchmark file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_benchmark(buffer.str());
}

std::string serialize_benchmark(const TabularBenchmark& bench) {
  using ojson = nlohmann::ordered_json;
  const SpaceSpec& spec = bench.spec();
  ojson header;
  header["kind"] = to_string(spec.kind);
  if (spec.kind == SpaceKind::FixedDag) {
    header["num_edges"] = spec.num_edges;
    header["num_ops"] = spec.num_ops;
  } else {
    header["max_nodes"] = spec.max_nodes;
    header["max_edges"] = spec.max_edges;
    header["num_ops"] = spec.op_set_size;
  }
  header["size"] = bench.size();

  std::string out = header.dump();
  out.pop_back();  // reopen the object
  out += ",\"records\":[\n";
  for (std::size_t i = 0; i < bench.size(); ++i) {
    const Architecture& arch = bench.space().at(static_cast<ArchIndex>(i));
    ojson rec;
    rec["index"] = i;
    rec["ops"] = arch.ops;
    if (arch.adjacency) {
      const int n = arch.adjacency->num_nodes();
      std::vector<int> bits;
      bits.reserve(static_cast<std::size_t>(n * n));
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) bits.push_back(arch.adjacency->edge(r, c) ? 1 : 0);
      }
      rec["adjacency"] = bits;
    }
    rec["val_acc"] = bench.records()[i].val_acc;
    rec["test_acc"] = bench.records()[i].test_acc;
    out += rec.dump();
    out += i + 1 < bench.size() ? ",\n" : "\n";
  }
  out += "]}\n";
  return out;
}

void save_benchmark(const TabularBenchmark& bench, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write benchmark file " + path.string());
  out << serialize_benchmark(bench);
  if (!out) throw std::runtime_error("failed writing benchmark file " + path.string());
}

}  // namespace weaknas
