#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

namespace path24 {

inline constexpr int kNumScans = 24;

enum class Split { kTrain, kVal, kTest };
enum class ColorMode { kRgb, kGrayscale };

std::string to_string(Split split);
std::string to_string(ColorMode mode);
Split parse_split(const std::string& text);
ColorMode parse_color_mode(const std::string& text);

// Base for everything this library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IngestionError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

// Label of one of the 24 source scans.
class ScanId {
 public:
  ScanId() : value_(0) {}
  explicit ScanId(int value) : value_(value) {
    if (value < 0 || value >= kNumScans) {
      throw Error("scan id out of range [0,23]: " + std::to_string(value));
    }
  }

  int value() const { return value_; }

  friend bool operator==(ScanId a, ScanId b) { return a.value_ == b.value_; }
  friend bool operator<(ScanId a, ScanId b) { return a.value_ < b.value_; }

 private:
  int value_;
};

struct PatchRecord {
  std::filesystem::path path;
  ScanId label;
  Split split = Split::kTrain;
  int width = 0;
  int height = 0;
};

}  // namespace path24
