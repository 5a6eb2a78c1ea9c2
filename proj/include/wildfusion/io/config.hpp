#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wildfusion/core/error.hpp"

namespace wf {

/// Flat key=value configuration with dotted section keys
/// ("train.lambda2 = 0.01"). '#' starts a comment. Consumers pull typed
/// values; any key never consumed is a hard error, so typos cannot pass
/// silently. Every consumed key and its final (possibly default) value is
/// recorded for the resolved-config snapshot.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap parse_file(const std::string& path);
  static ConfigMap parse_text(const std::string& text,
                              const std::string& origin = "<string>");

  double get_double(const std::string& key, double fallback);
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_string(const std::string& key, const std::string& fallback);
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback);

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Throws listing every key that was set but never consumed.
  void check_consumed() const;

  /// Variant for multi-stage config files: unconsumed keys are tolerated
  /// when their section prefix is in `known` but not in `active` (they
  /// belong to a different pipeline stage). Anything else unconsumed still
  /// throws.
  void check_consumed(const std::vector<std::string>& active,
                      const std::vector<std::string>& known) const;

  /// Renders every consumed key with its resolved value, one per line.
  std::string resolved() const;

 private:
  const std::string* find(const std::string& key);

  std::string origin_;
  std::map<std::string, std::string> values_;
  std::set<std::string> consumed_;
  std::map<std::string, std::string> resolved_;
};

}  // namespace wf
