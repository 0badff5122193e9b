#include "path24/metrics.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "path24/preprocess.hpp"

namespace path24 {

using nlohmann::json;

std::map<int, int> PredictionSet::class_counts() const {
  std::map<int, int> counts;
  for (const auto& e : entries) counts[e.true_label]++;
  return counts;
}

void PredictionSet::validate() const {
  if (entries.empty()) throw EvalError("empty prediction set");
  if (num_classes < 1) throw EvalError("num_classes must be >= 1");
  for (const auto& e : entries) {
    if (e.true_label < 0 || e.true_label >= num_classes ||
        e.predicted_label < 0 || e.predicted_label >= num_classes) {
      throw EvalError("prediction label outside [0," +
                      std::to_string(num_classes) + ") for patch '" +
                      e.patch_id + "'");
    }
  }
}

double patch_to_scan_accuracy(const PredictionSet& preds) {
  preds.validate();
  long correct = 0;
  for (const auto& e : preds.entries) {
    if (e.true_label == e.predicted_label) ++correct;
  }
  return static_cast<double>(correct) /
         static_cast<double>(preds.entries.size());
}

double whole_scan_accuracy(const PredictionSet& preds) {
  preds.validate();
  std::vector<long> total(preds.num_classes, 0), correct(preds.num_classes, 0);
  for (const auto& e : preds.entries) {
    total[e.true_label]++;
    if (e.true_label == e.predicted_label) correct[e.true_label]++;
  }
  double sum = 0.0;
  for (int s = 0; s < preds.num_classes; ++s) {
    if (total[s] == 0) {
      throw EvalError("class " + std::to_string(s) +
                      " has no test patches; per-scan accuracy undefined");
    }
    sum += static_cast<double>(correct[s]) / static_cast<double>(total[s]);
  }
  return sum / static_cast<double>(preds.num_classes);
}

double total_accuracy(double eta_p, double eta_w) {
  if (eta_p < 0.0 || eta_p > 1.0 || eta_w < 0.0 || eta_w > 1.0) {
    throw EvalError("accuracies must be in [0,1]");
  }
  return eta_p * eta_w;
}

std::vector<std::vector<int>> confusion_matrix(const PredictionSet& preds) {
  preds.validate();
  std::vector<std::vector<int>> m(preds.num_classes,
                                  std::vector<int>(preds.num_classes, 0));
  for (const auto& e : preds.entries) {
    m[e.true_label][e.predicted_label]++;
  }
  return m;
}

ClassificationReport classification_report(
    const std::vector<std::vector<int>>& confusion) {
  const auto n = confusion.size();
  for (const auto& row : confusion) {
    if (row.size() != n) {
      throw EvalError("confusion matrix must be square");
    }
  }
  ClassificationReport report;
  double p_sum = 0.0, r_sum = 0.0, f_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    long col_sum = 0, row_sum = 0;
    for (std::size_t i = 0; i < n; ++i) {
      col_sum += confusion[i][c];
      row_sum += confusion[c][i];
    }
    ClassMetrics m;
    m.support = static_cast<int>(row_sum);
    m.precision_defined = col_sum > 0;
    m.recall_defined = row_sum > 0;
    m.precision = m.precision_defined
                      ? static_cast<double>(confusion[c][c]) / col_sum
                      : 0.0;
    m.recall = m.recall_defined
                   ? static_cast<double>(confusion[c][c]) / row_sum
                   : 0.0;
    // F1 from full-precision precision/recall.
    m.f1 = (m.precision + m.recall) > 0.0
               ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
               : 0.0;
    p_sum += m.precision;
    r_sum += m.recall;
    f_sum += m.f1;
    report.per_class.push_back(m);
  }
  if (n > 0) {
    report.macro_precision = p_sum / static_cast<double>(n);
    report.macro_recall = r_sum / static_cast<double>(n);
    report.macro_f1 = f_sum / static_cast<double>(n);
  }
  return report;
}

EvalResult compute_eval_result(const PredictionSet& preds) {
  EvalResult result;
  result.eta_p = patch_to_scan_accuracy(preds);
  result.eta_w = whole_scan_accuracy(preds);
  result.eta_total = total_accuracy(result.eta_p, result.eta_w);
  result.confusion = confusion_matrix(preds);
  result.report = classification_report(result.confusion);
  long trace = 0;
  for (std::size_t c = 0; c < result.confusion.size(); ++c) {
    trace += result.confusion[c][c];
  }
  result.misclassified_count =
      static_cast<int>(preds.entries.size()) - static_cast<int>(trace);
  return result;
}

double round_percent(double ratio) {
  return std::floor(ratio * 10000.0 + 0.5) / 100.0;
}

std::string EvalResult::to_json() const {
  json j;
  j["schema"] = "path24-eval-result/1";
  j["eta_p"] = eta_p;
  j["eta_w"] = eta_w;
  j["eta_total"] = eta_total;
  j["misclassified_count"] = misclassified_count;
  j["confusion"] = confusion;
  json per_class = json::array();
  for (const auto& m : report.per_class) {
    per_class.push_back({{"precision", m.precision},
                         {"recall", m.recall},
                         {"f1", m.f1},
                         {"support", m.support},
                         {"precision_defined", m.precision_defined},
                         {"recall_defined", m.recall_defined}});
  }
  j["per_class"] = per_class;
  j["macro"] = {{"precision", report.macro_precision},
                {"recall", report.macro_recall},
                {"f1", report.macro_f1}};
  return j.dump(2);
}

std::string EvalResult::to_table() const {
  std::ostringstream out;
  out << "Class  Precision  Recall  F1-score  Support\n";
  for (std::size_t c = 0; c < report.per_class.size(); ++c) {
    const auto& m = report.per_class[c];
    out << std::left << std::setw(7) << (c + 1) << std::fixed
        << std::setprecision(2) << std::setw(11) << m.precision
        << std::setw(8) << m.recall << std::setw(10) << m.f1 << m.support
        << '\n';
  }
  out << std::fixed << std::setprecision(2);
  out << "\neta_p = " << round_percent(eta_p)
      << "%  eta_w = " << round_percent(eta_w)
      << "%  eta_total = " << round_percent(eta_total) << "%\n";
  out << "misclassified: " << misclassified_count << '\n';
  return out.str();
}

EvalResult evaluate_test_set(ClassifierModel& model,
                             const DatasetManifest& manifest) {
  PredictionSet preds;
  preds.num_classes = model.head_config().num_classes;
  for (const auto& record : manifest.records) {
    if (record.split != Split::kTest) continue;
    cv::Mat patch = load_patch(record, model.preprocess_config());
    auto [predicted, confidence] = model.predict(patch);
    (void)confidence;
    preds.entries.push_back(PredictionEntry{record.path.filename().string(),
                                            record.label.value(), predicted});
  }
  if (preds.entries.empty()) {
    throw EvalError("manifest has no test records");
  }
  return compute_eval_result(preds);
}

}  // namespace path24
