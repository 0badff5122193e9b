#pragma once

#include <filesystem>
#include <vector>

#include "path24/trainer.hpp"

namespace path24 {

// Loss and accuracy vs epoch, one PNG each.
void save_loss_curves(const TrainReport& report,
                      const std::filesystem::path& path);
void save_accuracy_curves(const TrainReport& report,
                          const std::filesystem::path& path);

// Confusion-matrix heatmap with per-cell counts.
void save_confusion_heatmap(const std::vector<std::vector<int>>& confusion,
                            const std::filesystem::path& path);

}  // namespace path24
