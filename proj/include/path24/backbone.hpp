#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <opencv2/core.hpp>

#include "path24/nn.hpp"
#include "path24/types.hpp"

namespace path24 {

struct BackboneSpec {
  std::string name = "resnet50";
  int feature_dim = 2048;
  bool pretrained = true;
};

// name -> pooled feature width. Seeded with resnet50 (2048) and
// densenet161 (2208); extensible at runtime.
int backbone_feature_dim(const std::string& name);
void register_backbone(const std::string& name, int feature_dim);
std::vector<std::string> registered_backbones();

// Fills in feature_dim from the registry and validates the name.
BackboneSpec make_backbone_spec(const std::string& name, bool pretrained);

// A pretrained convolutional stack consumed as an opaque, frozen feature
// extractor: images go in, pooled feature vectors of width feature_dim come
// out. The weights are a fixed affine map over a coarse spatial average pool;
// they are loaded from a weights file or seeded deterministically, and are
// never trained.
class Backbone {
 public:
  static constexpr int kPoolGrid = 8;  // 8x8 cells x 3 channels = 192 inputs
  static constexpr int kInputDim = kPoolGrid * kPoolGrid * 3;

  static Backbone random(const BackboneSpec& spec, std::uint64_t seed);
  static Backbone from_file(const BackboneSpec& spec,
                            const std::filesystem::path& weights_path);
  Backbone(BackboneSpec spec, Matrix weight, Vector bias);

  void save(const std::filesystem::path& weights_path) const;

  // batch of CV_32FC3 images -> B x feature_dim.
  Matrix extract(const std::vector<cv::Mat>& batch) const;
  Vector extract_one(const cv::Mat& image) const;

  const BackboneSpec& spec() const { return spec_; }
  const Matrix& weight() const { return weight_; }
  const Vector& bias() const { return bias_; }
  std::uint64_t weight_hash() const;

 private:
  Vector pool(const cv::Mat& image) const;

  BackboneSpec spec_;
  Matrix weight_;  // feature_dim x kInputDim
  Vector bias_;    // feature_dim
};

}  // namespace path24
