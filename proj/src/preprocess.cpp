#include "path24/preprocess.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace path24 {

namespace {
constexpr float kLumR = 0.299f;
constexpr float kLumG = 0.587f;
constexpr float kLumB = 0.114f;
}  // namespace

void PreprocessConfig::validate() const {
  if (target_size < 32) {
    throw ConfigError("preprocess.target_size must be >= 32, got " +
                      std::to_string(target_size));
  }
  for (float s : channel_std) {
    if (!(s > 0.0f)) {
      throw ConfigError("preprocess.channel_std components must be > 0");
    }
  }
}

cv::Mat to_grayscale(const cv::Mat& rgb) {
  if (rgb.channels() != 3) {
    throw Error("to_grayscale expects 3 channels, got " +
                std::to_string(rgb.channels()));
  }
  cv::Mat src;
  rgb.convertTo(src, CV_32FC3);
  cv::Mat gray(src.rows, src.cols, CV_32FC1);
  for (int y = 0; y < src.rows; ++y) {
    const auto* in = src.ptr<cv::Vec3f>(y);
    auto* out = gray.ptr<float>(y);
    for (int x = 0; x < src.cols; ++x) {
      out[x] = kLumR * in[x][0] + kLumG * in[x][1] + kLumB * in[x][2];
    }
  }
  return gray;
}

cv::Mat replicate_channels(const cv::Mat& gray) {
  if (gray.channels() != 1) {
    throw Error("replicate_channels expects 1 channel, got " +
                std::to_string(gray.channels()));
  }
  cv::Mat out;
  cv::merge(std::vector<cv::Mat>{gray, gray, gray}, out);
  return out;
}

cv::Mat preprocess_image(const cv::Mat& bgr8, const PreprocessConfig& config) {
  config.validate();
  if (bgr8.empty()) {
    throw LoadError("empty image passed to preprocess_image");
  }
  cv::Mat rgb;
  cv::cvtColor(bgr8, rgb, cv::COLOR_BGR2RGB);

  if (config.color_mode == ColorMode::kGrayscale) {
    rgb = replicate_channels(to_grayscale(rgb));  // now CV_32FC3
  } else {
    rgb.convertTo(rgb, CV_32FC3);
  }

  cv::Mat resized;
  if (rgb.rows != config.target_size || rgb.cols != config.target_size) {
    cv::resize(rgb, resized, cv::Size(config.target_size, config.target_size),
               0, 0, cv::INTER_LINEAR);
  } else {
    resized = rgb;
  }

  cv::Mat out(resized.rows, resized.cols, CV_32FC3);
  const float inv255 = 1.0f / 255.0f;
  for (int y = 0; y < resized.rows; ++y) {
    const auto* in = resized.ptr<cv::Vec3f>(y);
    auto* dst = out.ptr<cv::Vec3f>(y);
    for (int x = 0; x < resized.cols; ++x) {
      for (int c = 0; c < 3; ++c) {
        dst[x][c] = (in[x][c] * inv255 - config.channel_mean[c]) /
                    config.channel_std[c];
      }
    }
  }
  return out;
}

cv::Mat load_patch(const PatchRecord& record, const PreprocessConfig& config) {
  cv::Mat bgr = cv::imread(record.path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw LoadError("cannot decode image: " + record.path.string());
  }
  if (bgr.rows != bgr.cols) {
    throw LoadError("non-square patch " + record.path.string() + " (" +
                    std::to_string(bgr.cols) + "x" + std::to_string(bgr.rows) +
                    "); run it through the tiler first");
  }
  return preprocess_image(bgr, config);
}

}  // namespace path24
