#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "path24/classifier.hpp"
#include "path24/optimizer.hpp"

namespace path24 {

enum class Device { kCpu, kAccelerator };

struct TrainConfig {
  double learning_rate = 1e-3;
  int epochs = 50;
  int batch_size = 32;
  OptimizerKind optimizer = OptimizerKind::kRmsProp;
  OptimizerParams optimizer_params;
  std::uint64_t seed = 0;
  Device device = Device::kCpu;

  void validate() const;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  double wall_time_s = 0.0;
  int best_epoch = 0;  // 1-based, by validation accuracy

  std::string to_json() const;
  static TrainReport from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static TrainReport load(const std::filesystem::path& path);
};

struct LabeledImages {
  std::vector<cv::Mat> images;  // preprocessed CV_32FC3
  std::vector<int> labels;

  std::size_t size() const { return images.size(); }
};

struct TrainPaths {
  std::filesystem::path best_checkpoint;   // empty = keep in memory only
  std::filesystem::path final_checkpoint;  // empty = skip
};

// Trains the head (base stays frozen), monitoring val after each epoch.
// The model ends at the final-epoch weights; the best-by-val-accuracy and
// final checkpoints are written when paths are given.
TrainReport train(ClassifierModel& model, const LabeledImages& train_set,
                  const LabeledImages& val_set, const TrainConfig& config,
                  const TrainPaths& paths = {});

// Mean cross-entropy and top-1 accuracy in eval mode; no weight mutation.
std::pair<double, double> evaluate_split(ClassifierModel& model,
                                         const LabeledImages& split);

}  // namespace path24
