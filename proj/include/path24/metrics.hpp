#pragma once

#include <map>
#include <string>
#include <vector>

#include "path24/classifier.hpp"
#include "path24/manifest.hpp"
#include "path24/types.hpp"

namespace path24 {

struct PredictionEntry {
  std::string patch_id;
  int true_label = 0;
  int predicted_label = 0;
};

struct PredictionSet {
  std::vector<PredictionEntry> entries;
  int num_classes = kNumScans;

  // |Gamma_s| per class s, from the true labels.
  std::map<int, int> class_counts() const;
  void validate() const;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  int support = 0;
  bool precision_defined = true;  // false when the class was never predicted
  bool recall_defined = true;     // false when support is zero
};

struct ClassificationReport {
  std::vector<ClassMetrics> per_class;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

struct EvalResult {
  double eta_p = 0.0;
  double eta_w = 0.0;
  double eta_total = 0.0;
  std::vector<std::vector<int>> confusion;  // rows = true, cols = predicted
  ClassificationReport report;
  int misclassified_count = 0;

  std::string to_json() const;
  std::string to_table() const;  // human-readable per-class table
};

// Fraction of test patches assigned back to their true scan (micro accuracy).
double patch_to_scan_accuracy(const PredictionSet& preds);

// Unweighted mean over classes of the per-scan accuracies (macro accuracy).
// Every class must have at least one test patch.
double whole_scan_accuracy(const PredictionSet& preds);

double total_accuracy(double eta_p, double eta_w);

std::vector<std::vector<int>> confusion_matrix(const PredictionSet& preds);

ClassificationReport classification_report(
    const std::vector<std::vector<int>>& confusion);

EvalResult compute_eval_result(const PredictionSet& preds);

// Runs eval-mode prediction over the manifest's test records.
EvalResult evaluate_test_set(ClassifierModel& model,
                             const DatasetManifest& manifest);

// Half-up rounding of a ratio to a percentage with two decimals, for
// presentation only.
double round_percent(double ratio);

}  // namespace path24
