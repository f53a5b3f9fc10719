#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fluctlab {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Versioned key-value configuration (text): one "key = value" per line,
// '#' comments. Unknown keys are rejected against each experiment's schema,
// and schema_version must be present.
class ExperimentConfig {
 public:
  static ExperimentConfig from_file(const std::filesystem::path& path, const std::string& experiment);
  static ExperimentConfig from_string(const std::string& text, const std::string& experiment);
  static ExperimentConfig defaults(const std::string& experiment);

  void set(const std::string& key, const std::string& value);  // validated against the schema
  bool has(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) > 0; }

  std::string get_str(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  long get_long(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<int> get_int_list(const std::string& key) const;    // comma separated
  std::vector<double> get_double_list(const std::string& key) const;

  const std::string& experiment() const { return experiment_; }
  // Canonical echo: sorted "key = value" lines; the manifest hash covers this.
  std::string canonical_echo() const;

  static const std::set<std::string>& allowed_keys(const std::string& experiment);
  static const std::map<std::string, std::string>& default_values(const std::string& experiment);
  static std::vector<std::string> known_experiments();

 private:
  std::string experiment_;
  std::map<std::string, std::string> values_;
  std::set<std::string> explicit_;
};

}  // namespace fluctlab
