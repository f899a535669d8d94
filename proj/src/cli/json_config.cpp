#include "json_config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace weaknas::cli {

using nlohmann::json;

namespace {

std::string scalar_text(const json& v, const std::string& key) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  if (v.is_number()) {
    std::ostringstream os;
    os.precision(17);
    os << v.get<double>();
    return os.str();
  }
  throw std::invalid_argument("config key '" + key + "' must hold a string, number, boolean or array");
}

bool given(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0 || (flag == "--output" && a == "-o");
  });
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 == args.size()) throw std::invalid_argument("--config needs a file");
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (path.empty()) return rest;

  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(path + ": invalid JSON config: " + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument(path + ": config must be a JSON object");

  std::vector<std::string> out;
  for (const auto& [key, value] : j.items()) {
    const std::string flag = "--" + key;
    if (key == "config") throw std::invalid_argument(path + ": config files cannot nest");
    if (given(rest, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(flag);
    } else if (value.is_array()) {
      for (const json& v : value) {
        out.push_back(flag);
        out.push_back(scalar_text(v, key));
      }
    } else {
      out.push_back(flag);
      out.push_back(scalar_text(value, key));
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace weaknas::cli
