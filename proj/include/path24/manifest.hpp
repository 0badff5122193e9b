#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <vector>

#include "path24/types.hpp"

namespace path24 {

// Official per-scan test-set sizes, classes 1..24 mapped to scan ids 0..23.
inline constexpr std::array<int, kNumScans> kOfficialTestCounts = {
    65, 65, 65, 75, 15, 40, 70, 50, 60, 60, 70, 70,
    70, 60, 60, 30, 45, 45, 25, 25, 65, 65, 65, 65};

inline constexpr int kOfficialTrainPoolSize = 23916;
inline constexpr int kOfficialTestSize = 1325;

struct DatasetManifest {
  std::vector<PatchRecord> records;
  ColorMode color_mode = ColorMode::kRgb;
  std::uint64_t seed = 0;  // split seed; meaningful once stratified_split ran

  std::map<int, int> per_class_test_counts() const;
  int count(Split split) const;
  std::map<int, int> per_class_counts(Split split) const;
};

// Walks `<root>/s<k>/` (k in 0..23) for training patches and `<root>/test/`
// for test patches named `s<k>_<i>.<ext>`. Training records come back tagged
// kTrain pending stratified_split.
DatasetManifest build_manifest(const std::filesystem::path& root_dir,
                               ColorMode color_mode);

// Per class, floor(val_fraction * class_count) train-pool records become kVal,
// deterministically in `seed`. Test records are untouched.
DatasetManifest stratified_split(const DatasetManifest& manifest,
                                 double val_fraction, std::uint64_t seed);

// CSV with header `path,scan_id,split`; paths relative to the CSV's directory.
void save_manifest(const DatasetManifest& manifest,
                   const std::filesystem::path& csv_path);
DatasetManifest load_manifest(const std::filesystem::path& csv_path,
                              ColorMode color_mode);

// Parses `s<k>_<i>.<ext>` into k. Throws IngestionError on mismatch.
int parse_test_filename(const std::string& filename);

}  // namespace path24
