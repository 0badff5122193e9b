#include "path24/manifest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace path24 {

namespace fs = std::filesystem;

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw Error("unreachable split value");
}

std::string to_string(ColorMode mode) {
  return mode == ColorMode::kRgb ? "rgb" : "grayscale";
}

Split parse_split(const std::string& text) {
  if (text == "train") return Split::kTrain;
  if (text == "val") return Split::kVal;
  if (text == "test") return Split::kTest;
  throw Error("unknown split: '" + text + "'");
}

ColorMode parse_color_mode(const std::string& text) {
  if (text == "rgb") return ColorMode::kRgb;
  if (text == "grayscale" || text == "gray") return ColorMode::kGrayscale;
  throw Error("unknown color mode: '" + text + "'");
}

std::map<int, int> DatasetManifest::per_class_test_counts() const {
  return per_class_counts(Split::kTest);
}

int DatasetManifest::count(Split split) const {
  return static_cast<int>(std::count_if(
      records.begin(), records.end(),
      [split](const PatchRecord& r) { return r.split == split; }));
}

std::map<int, int> DatasetManifest::per_class_counts(Split split) const {
  std::map<int, int> counts;
  for (const auto& r : records) {
    if (r.split == split) counts[r.label.value()]++;
  }
  return counts;
}

namespace {

const std::set<std::string> kImageExtensions = {".tif", ".tiff", ".png",
                                                ".jpg", ".jpeg"};

bool is_image_file(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return kImageExtensions.count(ext) > 0;
}

std::vector<fs::path> sorted_image_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_image_file(entry.path())) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

int parse_test_filename(const std::string& filename) {
  // Expected: s<k>_<i>.<ext>
  if (filename.size() < 2 || filename[0] != 's') {
    throw IngestionError("unparseable test filename (want s<k>_<i>.<ext>): " +
                         filename);
  }
  std::size_t underscore = filename.find('_');
  if (underscore == std::string::npos || underscore == 1) {
    throw IngestionError("unparseable test filename (want s<k>_<i>.<ext>): " +
                         filename);
  }
  int k = -1;
  const char* begin = filename.data() + 1;
  const char* end = filename.data() + underscore;
  auto [ptr, ec] = std::from_chars(begin, end, k);
  if (ec != std::errc{} || ptr != end) {
    throw IngestionError("unparseable test filename (want s<k>_<i>.<ext>): " +
                         filename);
  }
  if (k < 0 || k >= kNumScans) {
    throw IngestionError("test filename scan id outside 0..23: " + filename);
  }
  return k;
}

DatasetManifest build_manifest(const fs::path& root_dir, ColorMode color_mode) {
  if (!fs::is_directory(root_dir)) {
    throw IngestionError("dataset root is not a directory: " +
                         root_dir.string());
  }

  DatasetManifest manifest;
  manifest.color_mode = color_mode;

  // Reject class directories outside s0..s23 instead of silently skipping.
  for (const auto& entry : fs::directory_iterator(root_dir)) {
    if (!entry.is_directory()) continue;
    std::string name = entry.path().filename().string();
    if (name == "test") continue;
    if (name.size() < 2 || name[0] != 's') {
      throw IngestionError("unexpected directory under dataset root: " +
                           entry.path().string());
    }
    int k = -1;
    auto [ptr, ec] =
        std::from_chars(name.data() + 1, name.data() + name.size(), k);
    if (ec != std::errc{} || ptr != name.data() + name.size()) {
      throw IngestionError("unexpected directory under dataset root: " +
                           entry.path().string());
    }
    if (k < 0 || k >= kNumScans) {
      throw IngestionError("class directory outside s0..s23: " +
                           entry.path().string());
    }
  }

  for (int k = 0; k < kNumScans; ++k) {
    fs::path class_dir = root_dir / ("s" + std::to_string(k));
    if (!fs::is_directory(class_dir)) continue;
    for (const auto& file : sorted_image_files(class_dir)) {
      manifest.records.push_back(
          PatchRecord{file, ScanId(k), Split::kTrain, 0, 0});
    }
  }

  fs::path test_dir = root_dir / "test";
  if (fs::is_directory(test_dir)) {
    for (const auto& file : sorted_image_files(test_dir)) {
      int k = parse_test_filename(file.filename().string());
      manifest.records.push_back(
          PatchRecord{file, ScanId(k), Split::kTest, 0, 0});
    }
  }

  if (manifest.records.empty()) {
    throw IngestionError("no patches found under " + root_dir.string() +
                         " (expected s<k>/ class dirs and/or test/)");
  }
  return manifest;
}

DatasetManifest stratified_split(const DatasetManifest& manifest,
                                 double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw Error("val_fraction must be in (0,1), got " +
                std::to_string(val_fraction));
  }

  // Bucket train-pool record indices per class; val/test pass through.
  std::map<int, std::vector<std::size_t>> pool;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const auto& r = manifest.records[i];
    if (r.split != Split::kTest) pool[r.label.value()].push_back(i);
  }

  DatasetManifest out = manifest;
  out.seed = seed;
  for (auto& [label, indices] : pool) {
    if (indices.size() < 2) {
      throw Error("cannot stratify class " + std::to_string(label) +
                  " with fewer than 2 records");
    }
    auto n_val = static_cast<std::size_t>(val_fraction *
                                          static_cast<double>(indices.size()));
    std::mt19937_64 rng(seed ^ (0x9e3779b97f4a7c15ULL * (label + 1)));
    std::shuffle(indices.begin(), indices.end(), rng);
    for (std::size_t j = 0; j < indices.size(); ++j) {
      out.records[indices[j]].split =
          j < n_val ? Split::kVal : Split::kTrain;
    }
  }
  return out;
}

void save_manifest(const DatasetManifest& manifest, const fs::path& csv_path) {
  fs::path base = csv_path.has_parent_path() ? csv_path.parent_path()
                                             : fs::path(".");
  std::ofstream out(csv_path, std::ios::binary);  // binary keeps LF endings
  if (!out) {
    throw Error("cannot open manifest for writing: " + csv_path.string());
  }
  out << "path,scan_id,split\n";
  for (const auto& r : manifest.records) {
    fs::path rel = fs::relative(r.path, base);
    out << rel.generic_string() << ',' << r.label.value() << ','
        << to_string(r.split) << '\n';
  }
}

DatasetManifest load_manifest(const fs::path& csv_path, ColorMode color_mode) {
  std::ifstream in(csv_path);
  if (!in) {
    throw Error("cannot open manifest: " + csv_path.string());
  }
  fs::path base = csv_path.has_parent_path() ? csv_path.parent_path()
                                             : fs::path(".");
  DatasetManifest manifest;
  manifest.color_mode = color_mode;
  std::string line;
  if (!std::getline(in, line) || line.rfind("path,scan_id,split", 0) != 0) {
    throw Error("bad manifest header in " + csv_path.string());
  }
  std::set<std::string> seen;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string path_field, id_field, split_field;
    if (!std::getline(ss, path_field, ',') ||
        !std::getline(ss, id_field, ',') || !std::getline(ss, split_field)) {
      throw Error("malformed manifest row " + std::to_string(lineno) + " in " +
                  csv_path.string());
    }
    if (!seen.insert(path_field).second) {
      throw Error("duplicate path in manifest: " + path_field);
    }
    manifest.records.push_back(PatchRecord{base / path_field,
                                           ScanId(std::stoi(id_field)),
                                           parse_split(split_field), 0, 0});
  }
  return manifest;
}

}  // namespace path24
