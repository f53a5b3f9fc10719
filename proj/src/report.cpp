#include "fluctlab/report.hpp"

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fluctlab {

namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return std::string(buf);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

OutputStage::OutputStage(fs::path final_dir) : final_dir_(std::move(final_dir)) {
  fs::create_directories(final_dir_.parent_path().empty() ? fs::path(".")
                                                          : final_dir_.parent_path());
  staging_dir_ = final_dir_;
  staging_dir_ += ".staging";
  std::error_code ec;
  fs::remove_all(staging_dir_, ec);
  fs::create_directories(staging_dir_);
}

OutputStage::~OutputStage() {
  if (!published_) {
    std::error_code ec;
    fs::remove_all(staging_dir_, ec);
  }
}

fs::path OutputStage::path(const std::string& filename) const {
  return staging_dir_ / filename;
}

void OutputStage::publish() {
  fs::create_directories(final_dir_);
  for (const auto& entry : fs::directory_iterator(staging_dir_)) {
    const fs::path dest = final_dir_ / entry.path().filename();
    std::error_code ec;
    fs::remove(dest, ec);
    fs::rename(entry.path(), dest);
  }
  fs::remove_all(staging_dir_);
  published_ = true;
}

void write_stat_series_csv(const fs::path& file, const StatSeries& series,
                           std::uint64_t manifest_hash) {
  series.validate();
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "# manifest=" << hex64(manifest_hash) << "\n";
  out << series.grid_name << ",estimate,stderr,replicas\n";
  for (std::size_t i = 0; i < series.grid.size(); ++i) {
    out << format_double(series.grid[i]) << "," << format_double(series.estimate[i]) << ","
        << format_double(series.std_error[i]) << "," << series.replicas << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

StatSeries read_stat_series_csv(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  StatSeries s;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# manifest=", 0) != 0)
    throw std::runtime_error("stat series csv: missing manifest line in " + file.string());
  if (!std::getline(in, line)) throw std::runtime_error("stat series csv: missing header");
  const auto comma = line.find(',');
  s.grid_name = line.substr(0, comma);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) throw std::runtime_error("stat series csv: malformed row: " + line);
    s.grid.push_back(std::stod(cells[0]));
    s.estimate.push_back(std::stod(cells[1]));
    s.std_error.push_back(std::stod(cells[2]));
    s.replicas = std::stoi(cells[3]);
  }
  return s;
}

void write_table_csv(const fs::path& file, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, std::uint64_t manifest_hash) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << "# manifest=" << hex64(manifest_hash) << "\n";
  for (std::size_t c = 0; c < columns.size(); ++c)
    out << columns[c] << (c + 1 < columns.size() ? "," : "");
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("table csv: ragged row");
    for (std::size_t c = 0; c < row.size(); ++c)
      out << format_double(row[c]) << (c + 1 < row.size() ? "," : "");
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

void write_json(const fs::path& file, const nlohmann::json& j) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed for " + file.string());
}

nlohmann::json read_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  nlohmann::json j;
  in >> j;
  return j;
}

}  // namespace fluctlab
