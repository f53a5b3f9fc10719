#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>
#include <string>

#include "fluctlab/stats.hpp"

namespace fluctlab {

inline constexpr const char* kCodeVersion = "0.1.0";

std::uint64_t fnv1a(const std::string& text);
std::string hex64(std::uint64_t v);

// Formats a double with 17 significant digits (round-trip safe).
std::string format_double(double v);

// Staged output directory: files are written to a hidden sibling and renamed
// into place on publish, so failed runs leave no partial artifacts.
class OutputStage {
 public:
  explicit OutputStage(std::filesystem::path final_dir);
  OutputStage(const OutputStage&) = delete;
  OutputStage& operator=(const OutputStage&) = delete;
  ~OutputStage();

  std::filesystem::path path(const std::string& filename) const;
  void publish();

 private:
  std::filesystem::path final_dir_;
  std::filesystem::path staging_dir_;
  bool published_ = false;
};

// CSV with a manifest-hash comment line, a header, and 17-digit floats:
//   # manifest=<hex>
//   <grid_name>,estimate,stderr,replicas
void write_stat_series_csv(const std::filesystem::path& file, const StatSeries& series,
                           std::uint64_t manifest_hash);
StatSeries read_stat_series_csv(const std::filesystem::path& file);

// Generic numeric table with the same manifest line and float formatting.
void write_table_csv(const std::filesystem::path& file, const std::vector<std::string>& columns,
                     const std::vector<std::vector<double>>& rows, std::uint64_t manifest_hash);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

}  // namespace fluctlab
