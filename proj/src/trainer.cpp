#include "path24/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "path24/loss.hpp"

namespace path24 {

using nlohmann::json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (epochs < 1) throw ConfigError("train.epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
}

std::string TrainReport::to_json() const {
  json j;
  j["schema"] = "path24-train-report/1";
  json epochs_json = json::array();
  for (const EpochStats& e : epochs) {
    epochs_json.push_back({{"epoch", e.epoch},
                           {"train_loss", e.train_loss},
                           {"train_acc", e.train_acc},
                           {"val_loss", e.val_loss},
                           {"val_acc", e.val_acc}});
  }
  j["epochs"] = epochs_json;
  j["wall_time_s"] = wall_time_s;
  j["best_epoch"] = best_epoch;
  return j.dump(2);
}

TrainReport TrainReport::from_json(const std::string& text) {
  json j = json::parse(text);
  TrainReport report;
  for (const json& e : j.at("epochs")) {
    report.epochs.push_back(EpochStats{
        e.at("epoch").get<int>(), e.at("train_loss").get<double>(),
        e.at("train_acc").get<double>(), e.at("val_loss").get<double>(),
        e.at("val_acc").get<double>()});
  }
  report.wall_time_s = j.at("wall_time_s").get<double>();
  report.best_epoch = j.at("best_epoch").get<int>();
  return report;
}

void TrainReport::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write train report: " + path.string());
  out << to_json() << '\n';
}

TrainReport TrainReport::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read train report: " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return from_json(text);
}

namespace {

int argmax_row(const Matrix& m, Eigen::Index row) {
  int best = 0;
  double best_v = m(row, 0);
  for (Eigen::Index c = 1; c < m.cols(); ++c) {
    if (m(row, c) > best_v) {
      best = static_cast<int>(c);
      best_v = m(row, c);
    }
  }
  return best;
}

std::pair<double, double> eval_features(ClassifierModel& model,
                                        const Matrix& features,
                                        const std::vector<int>& labels) {
  // Mirror forward_features' eval path but keep logits for the loss.
  Matrix logits = model.head().forward(features, /*training=*/false);
  double loss = cross_entropy(logits, labels);
  int correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (argmax_row(logits, i) == labels[i]) ++correct;
  }
  return {loss, static_cast<double>(correct) /
                    static_cast<double>(logits.rows())};
}

void check_set(const LabeledImages& set, const char* name) {
  if (set.images.empty()) {
    throw TrainingError(std::string(name) + " set is empty");
  }
  if (set.images.size() != set.labels.size()) {
    throw TrainingError(std::string(name) +
                        " set images/labels size mismatch");
  }
}

}  // namespace

TrainReport train(ClassifierModel& model, const LabeledImages& train_set,
                  const LabeledImages& val_set, const TrainConfig& config,
                  const TrainPaths& paths) {
  config.validate();
  if (config.device == Device::kAccelerator) {
    throw TrainingError("accelerator device is not available in this build");
  }
  check_set(train_set, "train");
  check_set(val_set, "val");
  if (model.base_trainable()) {
    throw TrainingError("base must be frozen before training (freeze_base)");
  }

  const auto start = std::chrono::steady_clock::now();

  // Base is frozen, so features are computed once.
  Matrix train_features = model.backbone().extract(train_set.images);
  Matrix val_features = model.backbone().extract(val_set.images);

  auto optimizer = make_optimizer(config.optimizer, config.learning_rate,
                                  config.optimizer_params);
  auto params = model.head().parameters();
  model.head().set_dropout_seed(config.seed ^ 0x5eedULL);

  const auto n = static_cast<int>(train_set.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainReport report;
  double best_val_acc = -1.0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(config.seed * 0x9e3779b97f4a7c15ULL +
                                static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    double loss_sum = 0.0;
    int correct = 0;
    int batch_index = 0;
    for (int begin = 0; begin < n; begin += config.batch_size, ++batch_index) {
      const int end = std::min(begin + config.batch_size, n);
      const int b = end - begin;
      Matrix batch(b, train_features.cols());
      std::vector<int> labels(b);
      for (int i = 0; i < b; ++i) {
        batch.row(i) = train_features.row(order[begin + i]);
        labels[i] = train_set.labels[order[begin + i]];
      }

      Matrix logits = model.forward_features(batch, ForwardMode::kTrain);
      Matrix dlogits;
      double loss = cross_entropy_with_grad(logits, labels, dlogits);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " +
                            std::to_string(epoch) + ", batch " +
                            std::to_string(batch_index));
      }
      loss_sum += loss * b;
      for (int i = 0; i < b; ++i) {
        if (argmax_row(logits, i) == labels[i]) ++correct;
      }
      model.head().backward(dlogits);
      optimizer->step(params);
    }

    auto [val_loss, val_acc] =
        eval_features(model, val_features, val_set.labels);
    EpochStats stats{epoch, loss_sum / n,
                     static_cast<double>(correct) / static_cast<double>(n),
                     val_loss, val_acc};
    report.epochs.push_back(stats);

    if (val_acc > best_val_acc) {
      best_val_acc = val_acc;
      report.best_epoch = epoch;
      if (!paths.best_checkpoint.empty()) {
        model.save_checkpoint(paths.best_checkpoint);
      }
    }
  }

  if (!paths.final_checkpoint.empty()) {
    model.save_checkpoint(paths.final_checkpoint);
  }
  report.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

std::pair<double, double> evaluate_split(ClassifierModel& model,
                                         const LabeledImages& split) {
  check_set(split, "eval");
  Matrix features = model.backbone().extract(split.images);
  return eval_features(model, features, split.labels);
}

}  // namespace path24
