#include <doctest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "path24/hash.hpp"
#include "path24/loss.hpp"
#include "path24/trainer.hpp"
#include "test_support.hpp"

using namespace path24;
using namespace test_support;

namespace {

ClassifierModel small_model(int num_classes, std::uint64_t seed = 1) {
  BackboneSpec spec = make_backbone_spec("resnet50", false);
  HeadConfig head;
  head.num_classes = num_classes;
  PreprocessConfig preprocess;
  preprocess.target_size = 32;
  return build_classifier(spec, head, preprocess, BuildOptions{{}, seed});
}

cv::Mat preprocessed_solid(float r, float g, float b, int size = 32) {
  return cv::Mat(size, size, CV_32FC3, cv::Scalar(r, g, b));
}

// 3 separable classes of solid colors, with slight per-sample jitter.
LabeledImages separable_set(int per_class, std::uint64_t seed) {
  std::mt19937 rng(static_cast<unsigned>(seed));
  std::uniform_real_distribution<float> jitter(-0.05f, 0.05f);
  const float colors[3][3] = {{1.5f, -1.0f, -1.0f},
                              {-1.0f, 1.5f, -1.0f},
                              {-1.0f, -1.0f, 1.5f}};
  LabeledImages set;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < per_class; ++i) {
      set.images.push_back(preprocessed_solid(colors[c][0] + jitter(rng),
                                              colors[c][1] + jitter(rng),
                                              colors[c][2] + jitter(rng)));
      set.labels.push_back(c);
    }
  }
  return set;
}

std::uint64_t head_hash(const ClassifierModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Tensor* t : model.head().parameters()) {
    h = hash_matrix(t->value, h);
  }
  return h;
}

}  // namespace

TEST_CASE("cross entropy values") {
  SUBCASE("all-zero logits over 24 classes give ln(24)") {
    Matrix logits = Matrix::Zero(3, 24);
    CHECK(cross_entropy(logits, {0, 5, 23}) ==
          doctest::Approx(std::log(24.0)).epsilon(1e-12));
  }
  SUBCASE("huge true-class logit is finite and ~0") {
    Matrix logits = Matrix::Zero(1, 24);
    logits(0, 3) = 1000.0;
    double loss = cross_entropy(logits, {3});
    CHECK(std::isfinite(loss));
    CHECK(loss == doctest::Approx(0.0).epsilon(1e-9));
  }
  SUBCASE("hand-computed 2x3 case") {
    Matrix logits(2, 3);
    logits << 1, 2, 3, 3, 2, 1;
    // lse(1,2,3) = 3.40760596..., -log p = 0.40760596 for both rows
    CHECK(cross_entropy(logits, {2, 0}) ==
          doctest::Approx(0.40760596444).epsilon(1e-9));
  }
  SUBCASE("label out of range") {
    Matrix logits = Matrix::Zero(1, 3);
    CHECK_THROWS_AS(cross_entropy(logits, {3}), Error);
    CHECK_THROWS_AS(cross_entropy(logits, {-1}), Error);
  }
  SUBCASE("shift invariance per row") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> dist(0.0, 5.0);
    for (int it = 0; it < 50; ++it) {
      Matrix logits(4, 6);
      for (Eigen::Index i = 0; i < logits.size(); ++i) logits(i) = dist(rng);
      std::vector<int> labels = {0, 5, 2, 3};
      Matrix shifted = logits;
      for (Eigen::Index r = 0; r < shifted.rows(); ++r) {
        shifted.row(r).array() += dist(rng);
      }
      CHECK(cross_entropy(shifted, labels) ==
            doctest::Approx(cross_entropy(logits, labels)).epsilon(1e-6));
    }
  }
}

TEST_CASE("evaluate_split") {
  auto model = small_model(3);
  LabeledImages set = separable_set(4, 42);

  SUBCASE("uniform-output model on a 24-class split") {
    auto uniform = small_model(24);
    auto params = uniform.head().parameters();
    params[6]->value.setZero();
    params[7]->value.setZero();
    LabeledImages split;
    std::mt19937 rng(4);
    for (int i = 0; i < 24; ++i) {
      split.images.push_back(preprocessed_solid(float(i) * 0.1f, 0.0f, 0.0f));
      split.labels.push_back(i);
    }
    auto [loss, acc] = evaluate_split(uniform, split);
    CHECK(loss == doctest::Approx(std::log(24.0)).epsilon(1e-9));
    CHECK(acc == doctest::Approx(1.0 / 24.0).epsilon(1e-9));
  }

  SUBCASE("empty split errors") {
    LabeledImages empty;
    CHECK_THROWS_AS(evaluate_split(model, empty), TrainingError);
  }

  SUBCASE("never mutates weights") {
    std::uint64_t before = head_hash(model);
    evaluate_split(model, set);
    CHECK(head_hash(model) == before);
  }
}

TEST_CASE("train loop arithmetic") {
  auto model = small_model(3);
  LabeledImages set = separable_set(4, 7);  // 12 samples
  TrainConfig config;
  config.epochs = 1;
  config.batch_size = 12;  // exactly one step
  config.seed = 9;
  TrainReport report = train(model, set, set, config);
  CHECK(report.epochs.size() == 1);
  CHECK(report.best_epoch == 1);
  for (const auto& e : report.epochs) {
    CHECK(e.train_acc >= 0.0);
    CHECK(e.train_acc <= 1.0);
    CHECK(e.val_acc >= 0.0);
    CHECK(e.val_acc <= 1.0);
  }
}

TEST_CASE("training errors") {
  auto model = small_model(3);
  LabeledImages set = separable_set(2, 1);
  TrainConfig config;
  config.epochs = 1;
  SUBCASE("empty train set") {
    LabeledImages empty;
    CHECK_THROWS_AS(train(model, empty, set, config), TrainingError);
  }
  SUBCASE("invalid config") {
    config.epochs = 0;
    CHECK_THROWS_AS(train(model, set, set, config), ConfigError);
  }
  SUBCASE("accelerator device unavailable") {
    config.device = Device::kAccelerator;
    CHECK_THROWS_AS(train(model, set, set, config), TrainingError);
  }
  SUBCASE("unfrozen base rejected") {
    model.set_base_trainable(true);
    CHECK_THROWS_AS(train(model, set, set, config), TrainingError);
  }
}

TEST_CASE("overfit sanity on separable colors with published hyperparameters") {
  auto model = small_model(3, 11);
  LabeledImages train_set = separable_set(20, 5);  // 60 images
  TrainConfig config;                              // lr 1e-3, rmsprop,
  config.epochs = 20;                              // dropout 0.25/0.50
  config.seed = 13;
  TrainReport report = train(model, train_set, train_set, config);
  CHECK(report.epochs.back().train_acc >= 0.95);
  // loss descent on easy data
  CHECK(report.epochs.back().train_loss < report.epochs.front().train_loss);
}

TEST_CASE("frozen base invariance across a full train call") {
  auto model = small_model(3);
  std::uint64_t backbone_before = model.backbone().weight_hash();
  std::uint64_t head_before = head_hash(model);
  LabeledImages set = separable_set(10, 3);
  TrainConfig config;
  config.epochs = 5;
  train(model, set, set, config);
  CHECK(model.backbone().weight_hash() == backbone_before);
  CHECK(head_hash(model) != head_before);
}

TEST_CASE("training is deterministic in config and seed") {
  TempDir tmp("trdet");
  auto run = [&](const fs::path& ckpt) {
    auto model = small_model(3, 21);
    LabeledImages train_set = separable_set(8, 2);
    LabeledImages val_set = separable_set(3, 17);
    TrainConfig config;
    config.epochs = 6;
    config.batch_size = 8;
    config.seed = 33;
    TrainPaths paths{{}, ckpt};
    return train(model, train_set, val_set, config, paths);
  };
  TrainReport a = run(tmp.path() / "a.json");
  TrainReport b = run(tmp.path() / "b.json");
  a.wall_time_s = b.wall_time_s = 0.0;  // wall time is physical, not seeded
  CHECK(a.to_json() == b.to_json());

  std::ifstream fa(tmp.path() / "a.json", std::ios::binary);
  std::ifstream fb(tmp.path() / "b.json", std::ios::binary);
  std::string ca((std::istreambuf_iterator<char>(fa)),
                 std::istreambuf_iterator<char>());
  std::string cb((std::istreambuf_iterator<char>(fb)),
                 std::istreambuf_iterator<char>());
  CHECK(ca == cb);
}

TEST_CASE("train report JSON round trip and schema fields") {
  TrainReport report;
  report.epochs = {{1, 1.5, 0.3, 1.6, 0.25}, {2, 1.2, 0.5, 1.3, 0.45}};
  report.wall_time_s = 12.5;
  report.best_epoch = 2;
  std::string text = report.to_json();
  for (const char* field : {"\"schema\"", "\"epochs\"", "\"wall_time_s\"",
                            "\"best_epoch\"", "\"train_loss\"", "\"val_acc\""}) {
    CHECK(text.find(field) != std::string::npos);
  }
  TrainReport loaded = TrainReport::from_json(text);
  CHECK(loaded.to_json() == text);
}

TEST_CASE("best checkpoint tracks validation accuracy") {
  TempDir tmp("best");
  auto model = small_model(3, 2);
  LabeledImages train_set = separable_set(10, 4);
  LabeledImages val_set = separable_set(4, 6);
  TrainConfig config;
  config.epochs = 10;
  config.seed = 3;
  TrainPaths paths{tmp.path() / "best.json", tmp.path() / "final.json"};
  TrainReport report = train(model, train_set, val_set, config, paths);
  CHECK(fs::exists(paths.best_checkpoint));
  CHECK(fs::exists(paths.final_checkpoint));
  REQUIRE(report.best_epoch >= 1);
  REQUIRE(report.best_epoch <= 10);
  double best_acc = report.epochs[report.best_epoch - 1].val_acc;
  for (const auto& e : report.epochs) CHECK(e.val_acc <= best_acc);
}
