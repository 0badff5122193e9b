#pragma once

#include <optional>
#include <vector>

#include <opencv2/core.hpp>

#include "path24/types.hpp"

namespace path24 {

struct Tile {
  int x = 0;  // top-left column in source pixels
  int y = 0;  // top-left row in source pixels
  int row = 0;
  int col = 0;
  cv::Mat patch;
};

struct TilerOptions {
  int patch_size = 1000;
  int stride = 1000;
  // Fraction of patch area overlapping the exclusion mask above which the
  // patch is dropped. 0 means any overlap drops it.
  double mask_overlap_threshold = 0.0;
  // Patches whose mean intensity exceeds this are dropped (white background).
  std::optional<double> white_threshold;
};

// Full patches on the stride grid. `exclusion_mask`, when given, is a single
// channel mask of the source image's size where nonzero marks excluded area.
std::vector<Tile> tile_wsi(const cv::Mat& image, const TilerOptions& options,
                           const cv::Mat& exclusion_mask = cv::Mat());

// floor((H-P)/stride+1) * floor((W-P)/stride+1), before exclusions.
int tile_grid_count(int height, int width, int patch_size, int stride);

}  // namespace path24
