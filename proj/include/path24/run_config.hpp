#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "path24/classifier.hpp"
#include "path24/manifest.hpp"
#include "path24/preprocess.hpp"
#include "path24/trainer.hpp"

namespace path24 {

// Everything a run needs, resolved from defaults <- config file <- CLI flags.
struct RunConfig {
  std::filesystem::path dataset_root;
  std::filesystem::path manifest_path;
  ColorMode color_mode = ColorMode::kRgb;
  std::string backbone = "resnet50";
  bool backbone_pretrained = false;
  std::filesystem::path backbone_weights;
  double val_fraction = 0.2;
  HeadConfig head;
  TrainConfig train;
  PreprocessConfig preprocess;
  std::filesystem::path output_dir = "runs";

  // Flat `section.key = value` text, one pair per line, '#' comments.
  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_pairs(const std::map<std::string, std::string>& pairs);
  void apply_pair(const std::string& key, const std::string& value);

  // Full key=value snapshot, parseable by from_file.
  std::string snapshot() const;
  void save_snapshot(const std::filesystem::path& path) const;
};

// Parses a flat config file into pairs; throws ConfigError listing every
// malformed line.
std::map<std::string, std::string> parse_flat_config(
    const std::filesystem::path& path);

}  // namespace path24
