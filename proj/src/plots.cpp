#include "path24/plots.hpp"

#include <algorithm>
#include <string>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace path24 {

namespace {

constexpr int kWidth = 900;
constexpr int kHeight = 600;
constexpr int kMargin = 60;

struct Series {
  std::vector<double> values;
  cv::Scalar color;
  std::string label;
};

void draw_chart(const std::vector<Series>& series, const std::string& title,
                const std::filesystem::path& path) {
  cv::Mat canvas(kHeight, kWidth, CV_8UC3, cv::Scalar(255, 255, 255));
  double lo = 0.0, hi = 1e-9;
  std::size_t n = 0;
  for (const auto& s : series) {
    for (double v : s.values) hi = std::max(hi, v);
    n = std::max(n, s.values.size());
  }
  hi *= 1.05;

  cv::Rect plot(kMargin, kMargin, kWidth - 2 * kMargin,
                kHeight - 2 * kMargin);
  cv::rectangle(canvas, plot, cv::Scalar(0, 0, 0));
  cv::putText(canvas, title, {kMargin, kMargin - 20},
              cv::FONT_HERSHEY_SIMPLEX, 0.7, cv::Scalar(0, 0, 0), 1,
              cv::LINE_AA);

  auto to_point = [&](std::size_t i, double v, std::size_t count) {
    double fx = count > 1 ? static_cast<double>(i) / (count - 1) : 0.5;
    double fy = (v - lo) / (hi - lo);
    return cv::Point(plot.x + static_cast<int>(fx * plot.width),
                     plot.y + plot.height -
                         static_cast<int>(fy * plot.height));
  };

  for (int tick = 0; tick <= 5; ++tick) {
    double v = lo + (hi - lo) * tick / 5.0;
    cv::Point p = to_point(0, v, 1);
    p.x = plot.x;
    cv::line(canvas, {plot.x - 4, p.y}, {plot.x, p.y}, cv::Scalar(0, 0, 0));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    cv::putText(canvas, buf, {6, p.y + 4}, cv::FONT_HERSHEY_SIMPLEX, 0.4,
                cv::Scalar(0, 0, 0), 1, cv::LINE_AA);
  }

  int legend_y = kMargin + 16;
  for (const auto& s : series) {
    for (std::size_t i = 1; i < s.values.size(); ++i) {
      cv::line(canvas, to_point(i - 1, s.values[i - 1], s.values.size()),
               to_point(i, s.values[i], s.values.size()), s.color, 2,
               cv::LINE_AA);
    }
    cv::putText(canvas, s.label, {plot.x + plot.width - 150, legend_y},
                cv::FONT_HERSHEY_SIMPLEX, 0.5, s.color, 1, cv::LINE_AA);
    legend_y += 18;
  }

  if (!cv::imwrite(path.string(), canvas)) {
    throw Error("cannot write plot: " + path.string());
  }
}

}  // namespace

void save_loss_curves(const TrainReport& report,
                      const std::filesystem::path& path) {
  Series train{{}, cv::Scalar(180, 80, 0), "train loss"};
  Series val{{}, cv::Scalar(0, 80, 200), "val loss"};
  for (const auto& e : report.epochs) {
    train.values.push_back(e.train_loss);
    val.values.push_back(e.val_loss);
  }
  draw_chart({train, val}, "Loss vs epoch", path);
}

void save_accuracy_curves(const TrainReport& report,
                          const std::filesystem::path& path) {
  Series train{{}, cv::Scalar(180, 80, 0), "train acc"};
  Series val{{}, cv::Scalar(0, 80, 200), "val acc"};
  for (const auto& e : report.epochs) {
    train.values.push_back(e.train_acc);
    val.values.push_back(e.val_acc);
  }
  draw_chart({train, val}, "Accuracy vs epoch", path);
}

void save_confusion_heatmap(const std::vector<std::vector<int>>& confusion,
                            const std::filesystem::path& path) {
  const int n = static_cast<int>(confusion.size());
  if (n == 0) throw Error("empty confusion matrix");
  int max_count = 1;
  for (const auto& row : confusion) {
    for (int v : row) max_count = std::max(max_count, v);
  }
  const int cell = std::max(12, 720 / n);
  const int margin = 40;
  cv::Mat canvas(margin + n * cell + 10, margin + n * cell + 10, CV_8UC3,
                 cv::Scalar(255, 255, 255));
  for (int t = 0; t < n; ++t) {
    for (int p = 0; p < n; ++p) {
      double f = static_cast<double>(confusion[t][p]) / max_count;
      // white -> blue ramp
      cv::Scalar color(255, 255 - f * 160, 255 - f * 220);
      cv::Rect r(margin + p * cell, margin + t * cell, cell, cell);
      cv::rectangle(canvas, r, color, cv::FILLED);
      cv::rectangle(canvas, r, cv::Scalar(210, 210, 210));
      if (confusion[t][p] > 0 && cell >= 18) {
        cv::putText(canvas, std::to_string(confusion[t][p]),
                    {r.x + 2, r.y + cell - 5}, cv::FONT_HERSHEY_SIMPLEX,
                    0.35, cv::Scalar(40, 40, 40), 1, cv::LINE_AA);
      }
    }
  }
  cv::putText(canvas, "predicted ->", {margin, margin - 12},
              cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0), 1,
              cv::LINE_AA);
  if (!cv::imwrite(path.string(), canvas)) {
    throw Error("cannot write heatmap: " + path.string());
  }
}

}  // namespace path24
