#include "fluctlab/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace fluctlab {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

struct Schema {
  std::set<std::string> keys;
  std::map<std::string, std::string> defaults;
};

const std::map<std::string, Schema>& schemas() {
  static const std::map<std::string, Schema> table = [] {
    std::map<std::string, Schema> t;
    const std::map<std::string, std::string> common{
        {"schema_version", "1"}, {"seed", "12345"}, {"threads", "1"}, {"out_dir", ""}};

    auto add = [&](const std::string& name, std::map<std::string, std::string> extra) {
      Schema s;
      s.defaults = common;
      for (auto& [k, v] : extra) s.defaults[k] = v;
      for (auto& [k, v] : s.defaults) {
        (void)v;
        s.keys.insert(k);
      }
      t[name] = std::move(s);
    };

    add("simulate", {{"n_sites", "32"},
                     {"y", "1.0"},
                     {"coupling", "constant:1"},
                     {"topology", "periodic"},
                     {"dt_macro", "1e-4"},
                     {"sweep", "even_odd"},
                     {"accelerate", "true"},
                     {"t_final", "1.0"},
                     {"record_every", "10"},
                     {"modes", "1,2"}});
    add("diffusion-coefficient", {{"y", "1.0"},
                                  {"coupling", "constant:1"},
                                  {"basis_degree", "4"},
                                  {"basis_halfwidth", "2"}});
    // Energy conservation pins each trajectory to its initial shell, so the
    // covariance amplitude averages over shells only through the replica
    // count: prefer many short replicas.
    add("fluctuations", {{"n_sites", "64"},
                         {"y", "1.0"},
                         {"coupling", "constant:1"},
                         {"dt_macro", "2.5e-5"},
                         {"t_final", "0.75"},
                         {"record_every", "40"},
                         {"replicas", "256"},
                         {"modes", "1,2"},
                         {"a_hat", "1.0"},
                         {"static_samples", "20000"},
                         {"static_replicas", "16"},
                         {"lag_count", "40"}});
    add("clt-variances", {{"half_chain", "8"},
                          {"y", "1.0"},
                          {"coupling", "constant:1"},
                          {"target", "B"},
                          {"t_total", "1000"},
                          {"dt", "0.02"},
                          {"replicas", "64"},
                          {"windows", "4"},
                          {"a_hat", "1.0"},
                          {"f_source", "zero"},
                          {"basis_degree", "4"},
                          {"basis_halfwidth", "2"}});
    // Short windows resolve the paired residual ordering best: the drop grows
    // linearly in T while its fluctuation grows faster once T exceeds the
    // field relaxation time.
    add("bg-residual", {{"n_sites", "32"},
                        {"y", "1.0"},
                        {"coupling", "gaussian-bump:0.5:1.0"},
                        {"mode", "1"},
                        {"t_final", "0.1"},
                        {"dt_macro", "5e-5"},
                        {"replicas", "400"},
                        {"basis_degree", "4"},
                        {"basis_halfwidth", "2"},
                        {"scan_halfwidth", "0.2"},
                        {"scan_step", "0.05"}});
    add("sphere-checks", {{"mc_samples", "200000"},
                          {"y", "1.3"},
                          {"max_half_degree", "4"},
                          {"n_max", "9"},
                          {"telescoping_dim", "7"},
                          {"telescoping_polys", "10"},
                          {"divergence_dim", "5"},
                          {"spheres_identity_n_max", "50"}});
    add("spectral-gap", {{"n_list", "4,8,16,32"},
                         {"y", "1.0"},
                         {"coupling", "constant:1"},
                         {"dt", "0.05"},
                         {"run_time_per_tau", "4000"},
                         {"obs_spacing_per_tau", "0.02"},
                         {"replicas", "4"},
                         {"mode", "1"}});
    add("ensemble-gap", {{"y", "1.0"}, {"n_list", "8,16,32,64,128,256"}});
    return t;
  }();
  return table;
}

const Schema& schema_for(const std::string& experiment) {
  const auto it = schemas().find(experiment);
  if (it == schemas().end()) throw ConfigError("unknown experiment '" + experiment + "'");
  return it->second;
}

}  // namespace

std::vector<std::string> ExperimentConfig::known_experiments() {
  std::vector<std::string> out;
  for (const auto& [k, v] : schemas()) {
    (void)v;
    out.push_back(k);
  }
  return out;
}

const std::set<std::string>& ExperimentConfig::allowed_keys(const std::string& experiment) {
  return schema_for(experiment).keys;
}

const std::map<std::string, std::string>& ExperimentConfig::default_values(
    const std::string& experiment) {
  return schema_for(experiment).defaults;
}

ExperimentConfig ExperimentConfig::defaults(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment_ = experiment;
  c.values_ = schema_for(experiment).defaults;
  return c;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  const auto& allowed = allowed_keys(experiment_);
  if (!allowed.count(key))
    throw ConfigError("unknown key '" + key + "' for experiment '" + experiment_ + "'");
  values_[key] = value;
  explicit_.insert(key);
}

bool ExperimentConfig::has(const std::string& key) const { return values_.count(key) > 0; }

ExperimentConfig ExperimentConfig::from_string(const std::string& text,
                                               const std::string& experiment) {
  ExperimentConfig c = defaults(experiment);
  bool saw_version = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "experiment") {
      if (value != experiment)
        throw ConfigError("config names experiment '" + value + "' but '" + experiment +
                          "' was requested");
      continue;
    }
    c.set(key, value);
    if (key == "schema_version") saw_version = true;
  }
  if (!saw_version) throw ConfigError("config is missing schema_version");
  if (c.get_str("schema_version") != "1")
    throw ConfigError("unsupported schema_version '" + c.get_str("schema_version") + "'");
  return c;
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path,
                                             const std::string& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_string(buf.str(), experiment);
}

std::string ExperimentConfig::get_str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  return it->second;
}

double ExperimentConfig::get_double(const std::string& key) const {
  try {
    std::size_t pos = 0;
    const std::string s = get_str(key);
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw ConfigError("");
    return v;
  } catch (...) {
    throw ConfigError("key '" + key + "' is not a number");
  }
}

int ExperimentConfig::get_int(const std::string& key) const {
  const double v = get_double(key);
  const int i = static_cast<int>(v);
  if (static_cast<double>(i) != v) throw ConfigError("key '" + key + "' is not an integer");
  return i;
}

long ExperimentConfig::get_long(const std::string& key) const {
  return static_cast<long>(get_double(key));
}

std::uint64_t ExperimentConfig::get_u64(const std::string& key) const {
  try {
    return std::stoull(get_str(key));
  } catch (...) {
    throw ConfigError("key '" + key + "' is not an unsigned integer");
  }
}

bool ExperimentConfig::get_bool(const std::string& key) const {
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("key '" + key + "' is not a boolean");
}

std::vector<int> ExperimentConfig::get_int_list(const std::string& key) const {
  std::vector<int> out;
  std::istringstream in(get_str(key));
  std::string cell;
  while (std::getline(in, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    out.push_back(std::stoi(cell));
  }
  if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
  return out;
}

std::vector<double> ExperimentConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  std::istringstream in(get_str(key));
  std::string cell;
  while (std::getline(in, cell, ',')) {
    cell = trim(cell);
    if (cell.empty()) continue;
    out.push_back(std::stod(cell));
  }
  if (out.empty()) throw ConfigError("key '" + key + "' is an empty list");
  return out;
}

std::string ExperimentConfig::canonical_echo() const {
  // out_dir and threads are execution details: they never touch the numbers,
  // so they stay out of the reproducibility echo and its hash.
  std::ostringstream out;
  out << "experiment = " << experiment_ << "\n";
  for (const auto& [k, v] : values_) {
    if (k == "out_dir" || k == "threads") continue;
    out << k << " = " << v << "\n";
  }
  return out.str();
}

}  // namespace fluctlab
