#pragma once

#include <array>

#include <opencv2/core.hpp>

#include "path24/types.hpp"

namespace path24 {

// ImageNet channel statistics, the backbones' pretraining defaults.
inline constexpr std::array<float, 3> kImageNetMean = {0.485f, 0.456f, 0.406f};
inline constexpr std::array<float, 3> kImageNetStd = {0.229f, 0.224f, 0.225f};

struct PreprocessConfig {
  ColorMode color_mode = ColorMode::kRgb;
  int target_size = 224;
  std::array<float, 3> channel_mean = kImageNetMean;
  std::array<float, 3> channel_std = kImageNetStd;

  void validate() const;
};

// BT.601 luminance over a 3-channel float image (RGB order). Output keeps the
// input's value scale.
cv::Mat to_grayscale(const cv::Mat& rgb);

// Single channel -> 3 identical channels.
cv::Mat replicate_channels(const cv::Mat& gray);

// Decode -> color-mode conversion -> resize -> [0,1] -> (x - mean)/std.
// Returns CV_32FC3, target_size x target_size, RGB channel order.
cv::Mat load_patch(const PatchRecord& record, const PreprocessConfig& config);

// Same pipeline applied to an already-decoded 8-bit image (BGR, as decoded by
// OpenCV). Exposed for the tiler and tests.
cv::Mat preprocess_image(const cv::Mat& bgr8, const PreprocessConfig& config);

}  // namespace path24
