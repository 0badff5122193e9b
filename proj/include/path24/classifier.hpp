#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "path24/backbone.hpp"
#include "path24/nn.hpp"
#include "path24/preprocess.hpp"
#include "path24/types.hpp"

namespace path24 {

struct HeadConfig {
  int hidden_width = 512;
  double dropout1 = 0.25;
  double dropout2 = 0.50;
  double bn_momentum = 0.1;
  double bn_epsilon = 1e-5;
  int num_classes = kNumScans;

  void validate() const;
};

// The customized classifier head: bn -> dropout -> fc -> bn -> dropout -> fc.
// Softmax stays outside (loss-internal during training, explicit at
// inference).
class Head {
 public:
  Head(int feature_dim, const HeadConfig& config, std::uint64_t init_seed);

  Matrix forward(const Matrix& features, bool training);
  // dlogits from the loss; populates parameter grads, returns dfeatures.
  Matrix backward(const Matrix& dlogits);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  long parameter_count() const;
  bool empty() const { return !fc1_.has_value(); }

  void set_dropout_seed(std::uint64_t seed) { dropout_rng_.seed(seed); }

  // Serialization access (running statistics included).
  BatchNorm1d& bn1() { return *bn1_; }
  BatchNorm1d& bn2() { return *bn2_; }
  const BatchNorm1d& bn1() const { return *bn1_; }
  const BatchNorm1d& bn2() const { return *bn2_; }

 private:
  HeadConfig config_;
  std::optional<BatchNorm1d> bn1_;
  std::optional<Dropout> drop1_;
  std::optional<Linear> fc1_;
  std::optional<BatchNorm1d> bn2_;
  std::optional<Dropout> drop2_;
  std::optional<Linear> fc2_;
  std::mt19937_64 dropout_rng_;
};

enum class ForwardMode { kTrain, kEval };

struct BuildOptions {
  std::filesystem::path backbone_weights;  // required when spec.pretrained
  std::uint64_t seed = 0;                  // head init (and stub backbone)
};

// Frozen backbone + trainable head.
class ClassifierModel {
 public:
  ClassifierModel(std::shared_ptr<const Backbone> backbone,
                  HeadConfig head_config, PreprocessConfig preprocess,
                  std::uint64_t seed);

  // kTrain: B x num_classes logits (dropout active, batch statistics).
  // kEval: B x num_classes probabilities (rows sum to 1).
  Matrix forward(const std::vector<cv::Mat>& batch, ForwardMode mode);
  Matrix forward_features(const Matrix& features, ForwardMode mode);

  // Argmax class and its probability; ties go to the lowest class index.
  std::pair<int, double> predict(const cv::Mat& image);

  void freeze_base() { base_trainable_ = false; }
  void set_base_trainable(bool trainable) { base_trainable_ = trainable; }
  bool base_trainable() const { return base_trainable_; }
  long trainable_parameter_count() const;

  const Backbone& backbone() const { return *backbone_; }
  Head& head() { return head_; }
  const Head& head() const { return head_; }
  const HeadConfig& head_config() const { return head_config_; }
  const PreprocessConfig& preprocess_config() const { return preprocess_; }
  std::uint64_t seed() const { return seed_; }

  void save_checkpoint(const std::filesystem::path& path) const;
  static ClassifierModel load_checkpoint(
      const std::filesystem::path& path,
      const std::optional<std::string>& expected_backbone = std::nullopt);

 private:
  std::shared_ptr<const Backbone> backbone_;
  HeadConfig head_config_;
  PreprocessConfig preprocess_;
  Head head_;
  std::uint64_t seed_;
  bool base_trainable_ = false;
};

ClassifierModel build_classifier(const BackboneSpec& spec,
                                 const HeadConfig& head_config,
                                 const PreprocessConfig& preprocess = {},
                                 const BuildOptions& options = {});

}  // namespace path24
