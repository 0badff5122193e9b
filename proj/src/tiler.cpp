#include "path24/tiler.hpp"

#include <opencv2/imgproc.hpp>

namespace path24 {

int tile_grid_count(int height, int width, int patch_size, int stride) {
  if (patch_size > height || patch_size > width) return 0;
  return ((height - patch_size) / stride + 1) *
         ((width - patch_size) / stride + 1);
}

std::vector<Tile> tile_wsi(const cv::Mat& image, const TilerOptions& options,
                           const cv::Mat& exclusion_mask) {
  if (options.patch_size < 1 || options.stride < 1) {
    throw Error("tiler patch_size and stride must be >= 1");
  }
  if (image.rows < options.patch_size || image.cols < options.patch_size) {
    throw Error("patch_size " + std::to_string(options.patch_size) +
                " exceeds image " + std::to_string(image.cols) + "x" +
                std::to_string(image.rows));
  }
  if (!exclusion_mask.empty() &&
      (exclusion_mask.rows != image.rows || exclusion_mask.cols != image.cols ||
       exclusion_mask.channels() != 1)) {
    throw Error("exclusion mask must be single-channel and match image size");
  }

  const int P = options.patch_size;
  const double area = static_cast<double>(P) * P;
  std::vector<Tile> tiles;
  int row = 0;
  for (int y = 0; y + P <= image.rows; y += options.stride, ++row) {
    int col = 0;
    for (int x = 0; x + P <= image.cols; x += options.stride, ++col) {
      cv::Rect window(x, y, P, P);
      if (!exclusion_mask.empty()) {
        double covered = cv::countNonZero(exclusion_mask(window)) / area;
        if (covered > options.mask_overlap_threshold) continue;
      }
      cv::Mat patch = image(window);
      if (options.white_threshold) {
        cv::Scalar m = cv::mean(patch);
        double intensity = 0.0;
        for (int c = 0; c < patch.channels(); ++c) intensity += m[c];
        intensity /= patch.channels();
        if (intensity > *options.white_threshold) continue;
      }
      tiles.push_back(Tile{x, y, row, col, patch.clone()});
    }
  }
  return tiles;
}

}  // namespace path24
