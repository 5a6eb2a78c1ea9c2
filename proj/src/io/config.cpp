#include "wildfusion/io/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace wf {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

ConfigMap ConfigMap::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

ConfigMap ConfigMap::parse_text(const std::string& text,
                                const std::string& origin) {
  ConfigMap cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty key");
    if (cfg.values_.count(key))
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": duplicate key '" + key + "'");
    cfg.values_[key] = value;
  }
  return cfg;
}

const std::string* ConfigMap::find(const std::string& key) {
  const auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_.insert(key);
  return &it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) {
  double v = fallback;
  if (const std::string* s = find(key)) {
    try {
      std::size_t pos = 0;
      v = std::stod(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + *s +
                        "' is not a number");
    }
  }
  std::ostringstream os;
  os.precision(17);
  os << v;
  resolved_[key] = os.str();
  return v;
}

int ConfigMap::get_int(const std::string& key, int fallback) {
  int v = fallback;
  if (const std::string* s = find(key)) {
    try {
      std::size_t pos = 0;
      v = std::stoi(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + *s +
                        "' is not an integer");
    }
  }
  resolved_[key] = std::to_string(v);
  return v;
}

std::uint64_t ConfigMap::get_u64(const std::string& key,
                                 std::uint64_t fallback) {
  std::uint64_t v = fallback;
  if (const std::string* s = find(key)) {
    try {
      std::size_t pos = 0;
      v = std::stoull(*s, &pos);
      if (pos != s->size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw ConfigError(origin_ + ": key '" + key + "': '" + *s +
                        "' is not an unsigned integer");
    }
  }
  resolved_[key] = std::to_string(v);
  return v;
}

bool ConfigMap::get_bool(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const std::string* s = find(key)) {
    std::string low = *s;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (low == "true" || low == "1")
      v = true;
    else if (low == "false" || low == "0")
      v = false;
    else
      throw ConfigError(origin_ + ": key '" + key + "': '" + *s +
                        "' is not a boolean");
  }
  resolved_[key] = v ? "true" : "false";
  return v;
}

std::string ConfigMap::get_string(const std::string& key,
                                  const std::string& fallback) {
  std::string v = fallback;
  if (const std::string* s = find(key)) v = *s;
  resolved_[key] = v;
  return v;
}

void ConfigMap::check_consumed() const {
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (!consumed_.count(key)) {
      if (!unknown.empty()) unknown += ", ";
      unknown += key;
    }
  }
  if (!unknown.empty())
    throw ConfigError(origin_ + ": unknown config keys: " + unknown);
}

void ConfigMap::check_consumed(const std::vector<std::string>& active,
                               const std::vector<std::string>& known) const {
  auto in = [](const std::string& key, const std::vector<std::string>& set) {
    for (const std::string& prefix : set)
      if (key.rfind(prefix, 0) == 0) return true;
    return false;
  };
  std::string unknown;
  for (const auto& [key, value] : values_) {
    if (consumed_.count(key)) continue;
    // a leftover key is fine only when a different stage owns its section
    if (!in(key, active) && in(key, known)) continue;
    if (!unknown.empty()) unknown += ", ";
    unknown += key;
  }
  if (!unknown.empty())
    throw ConfigError(origin_ + ": unknown config keys: " + unknown);
}

std::string ConfigMap::resolved() const {
  std::string out;
  for (const auto& [key, value] : resolved_)
    out += key + " = " + value + "\n";
  return out;
}

}  // namespace wf
