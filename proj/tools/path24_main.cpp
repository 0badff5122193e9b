#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "path24/manifest.hpp"
#include "path24/metrics.hpp"
#include "path24/plots.hpp"
#include "path24/run_config.hpp"
#include "path24/tiler.hpp"
#include "path24/trainer.hpp"

namespace fs = std::filesystem;
using namespace path24;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIngest = 2;
constexpr int kExitTrain = 3;
constexpr int kExitEval = 4;
constexpr int kExitUsage = 64;

std::string default_data_root() {
  const char* env = std::getenv("PATH24_DATA_ROOT");
  return env ? env : "";
}

// Unique run directory: <output>/<UTCstamp>_s<seed>[-k]. Existing run
// directories are never reused.
fs::path make_run_dir(const fs::path& output_dir, std::uint64_t seed) {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", std::gmtime(&t));
  fs::path base = output_dir / (std::string(stamp) + "_s" +
                                std::to_string(seed));
  fs::path run_dir = base;
  for (int k = 1; fs::exists(run_dir); ++k) {
    run_dir = base;
    run_dir += "-" + std::to_string(k);
  }
  fs::create_directories(run_dir);
  return run_dir;
}

void print_summary(const DatasetManifest& manifest) {
  std::cout << "split counts: train=" << manifest.count(Split::kTrain)
            << " val=" << manifest.count(Split::kVal)
            << " test=" << manifest.count(Split::kTest) << "\n";
  std::cout << "class  train  val  test\n";
  auto train = manifest.per_class_counts(Split::kTrain);
  auto val = manifest.per_class_counts(Split::kVal);
  auto test = manifest.per_class_counts(Split::kTest);
  for (int k = 0; k < kNumScans; ++k) {
    if (!train.count(k) && !val.count(k) && !test.count(k)) continue;
    std::cout << "s" << k << "\t" << train[k] << "\t" << val[k] << "\t"
              << test[k] << "\n";
  }
}

LabeledImages load_split(const DatasetManifest& manifest, Split split,
                         const PreprocessConfig& preprocess) {
  LabeledImages set;
  for (const auto& record : manifest.records) {
    if (record.split != split) continue;
    set.images.push_back(load_patch(record, preprocess));
    set.labels.push_back(record.label.value());
  }
  return set;
}

RunConfig load_run_config(const std::string& config_file,
                          const std::vector<std::string>& overrides) {
  RunConfig config;
  if (!config_file.empty()) config = RunConfig::from_file(config_file);
  for (const auto& kv : overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("override must be key=value, got '" + kv + "'");
    }
    config.apply_pair(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (config.dataset_root.empty()) config.dataset_root = default_data_root();
  return config;
}

int cmd_ingest(const std::string& root, const std::string& out_manifest,
               const std::string& color_mode) {
  try {
    DatasetManifest manifest =
        build_manifest(root, parse_color_mode(color_mode));
    save_manifest(manifest, out_manifest);
    std::cout << "wrote " << out_manifest << " (" << manifest.records.size()
              << " records)\n";
    print_summary(manifest);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "ingest error: " << e.what() << "\n";
    return kExitIngest;
  }
}

int cmd_split(const std::string& manifest_path, double val_fraction,
              std::uint64_t seed) {
  try {
    DatasetManifest manifest =
        load_manifest(manifest_path, ColorMode::kRgb);
    manifest = stratified_split(manifest, val_fraction, seed);
    save_manifest(manifest, manifest_path);
    std::cout << "re-wrote " << manifest_path << "\n";
    print_summary(manifest);
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "split error: " << e.what() << "\n";
    return kExitIngest;
  }
}

int cmd_train(const std::string& config_file,
              const std::vector<std::string>& overrides) {
  RunConfig config;
  try {
    config = load_run_config(config_file, overrides);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  }
  try {
    DatasetManifest manifest =
        load_manifest(config.manifest_path, config.color_mode);
    if (manifest.count(Split::kVal) == 0) {
      manifest =
          stratified_split(manifest, config.val_fraction, config.train.seed);
    }

    BackboneSpec spec =
        make_backbone_spec(config.backbone, config.backbone_pretrained);
    BuildOptions options{config.backbone_weights, config.train.seed};
    ClassifierModel model =
        build_classifier(spec, config.head, config.preprocess, options);

    fs::path run_dir = make_run_dir(config.output_dir, config.train.seed);
    config.save_snapshot(run_dir / "config.snapshot");

    LabeledImages train_set =
        load_split(manifest, Split::kTrain, config.preprocess);
    LabeledImages val_set =
        load_split(manifest, Split::kVal, config.preprocess);
    if (val_set.size() == 0) {
      // classes too small for the fraction; monitor on the train split
      std::cerr << "warning: empty validation split, monitoring on train\n";
      val_set = train_set;
    }

    TrainPaths paths{run_dir / "checkpoint_best.json",
                     run_dir / "checkpoint_final.json"};
    TrainReport report = train(model, train_set, val_set, config.train, paths);
    report.save(run_dir / "train_report.json");
    save_loss_curves(report, run_dir / "loss.png");
    save_accuracy_curves(report, run_dir / "accuracy.png");

    const auto& last = report.epochs.back();
    std::cout << "run dir: " << run_dir.string() << "\n"
              << "best epoch " << report.best_epoch << " (val_acc "
              << report.epochs[report.best_epoch - 1].val_acc << ")\n"
              << "final: train_acc " << last.train_acc << " val_acc "
              << last.val_acc << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "training error: " << e.what() << "\n";
    return kExitTrain;
  }
}

int cmd_evaluate(const std::string& checkpoint, const std::string& manifest_path,
                 const std::string& out_dir) {
  try {
    ClassifierModel model = ClassifierModel::load_checkpoint(checkpoint);
    DatasetManifest manifest =
        load_manifest(manifest_path, model.preprocess_config().color_mode);
    EvalResult result = evaluate_test_set(model, manifest);

    fs::path out = out_dir.empty() ? fs::path(checkpoint).parent_path()
                                   : fs::path(out_dir);
    if (!out.empty()) fs::create_directories(out);
    {
      std::ofstream json_out(out / "eval_result.json", std::ios::binary);
      json_out << result.to_json() << "\n";
    }
    save_confusion_heatmap(result.confusion, out / "confusion.png");
    std::cout << result.to_table();
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "evaluation error: " << e.what() << "\n";
    return kExitEval;
  }
}

int cmd_predict(const std::string& checkpoint, const std::string& input,
                const std::string& out_csv, int tile, int stride) {
  try {
    ClassifierModel model = ClassifierModel::load_checkpoint(checkpoint);

    std::vector<fs::path> files;
    if (fs::is_directory(input)) {
      for (const auto& entry : fs::directory_iterator(input)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
    } else {
      files.push_back(input);
    }

    std::ostream* out = &std::cout;
    std::ofstream file_out;
    if (!out_csv.empty()) {
      file_out.open(out_csv, std::ios::binary);
      if (!file_out) throw Error("cannot write " + out_csv);
      out = &file_out;
    }
    *out << "path,scan_id,confidence\n";

    int failures = 0, successes = 0;
    for (const auto& file : files) {
      try {
        cv::Mat bgr = cv::imread(file.string(), cv::IMREAD_COLOR);
        if (bgr.empty()) throw LoadError("cannot decode " + file.string());
        if (tile > 0) {
          TilerOptions options;
          options.patch_size = tile;
          options.stride = stride > 0 ? stride : tile;
          for (const Tile& t : tile_wsi(bgr, options)) {
            cv::Mat patch =
                preprocess_image(t.patch, model.preprocess_config());
            auto [label, confidence] = model.predict(patch);
            *out << file.generic_string() << "#x" << t.x << "y" << t.y << ","
                 << label << "," << confidence << "\n";
            ++successes;
          }
        } else {
          cv::Mat patch = preprocess_image(bgr, model.preprocess_config());
          auto [label, confidence] = model.predict(patch);
          *out << file.generic_string() << "," << label << "," << confidence
               << "\n";
          ++successes;
        }
      } catch (const std::exception& e) {
        *out << file.generic_string() << ",error," << '"' << e.what() << '"'
             << "\n";
        ++failures;
      }
    }
    if (successes == 0 && failures > 0) {
      std::cerr << "predict: all inputs failed\n";
      return kExitEval;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "predict error: " << e.what() << "\n";
    return kExitEval;
  }
}

int cmd_report(const std::string& train_report, const std::string& eval_json,
               const std::string& out_dir) {
  try {
    fs::path out = out_dir;
    fs::create_directories(out);
    if (!train_report.empty()) {
      TrainReport report = TrainReport::load(train_report);
      save_loss_curves(report, out / "loss.png");
      save_accuracy_curves(report, out / "accuracy.png");
      std::cout << "wrote loss.png and accuracy.png under " << out.string()
                << "\n";
    }
    if (!eval_json.empty()) {
      std::ifstream in(eval_json, std::ios::binary);
      if (!in) throw Error("cannot read " + eval_json);
      nlohmann::json j;
      in >> j;
      auto confusion = j.at("confusion").get<std::vector<std::vector<int>>>();
      save_confusion_heatmap(confusion, out / "confusion.png");
      std::cout << "eta_p=" << round_percent(j.at("eta_p").get<double>())
                << "% eta_w=" << round_percent(j.at("eta_w").get<double>())
                << "% eta_total="
                << round_percent(j.at("eta_total").get<double>()) << "%\n";
      std::cout << "wrote confusion.png under " << out.string() << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "report error: " << e.what() << "\n";
    return kExitEval;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kimia Path24 patch classification toolkit"};
  app.require_subcommand(1);

  std::string root = default_data_root(), manifest_out, color_mode = "rgb";
  auto* ingest = app.add_subcommand(
      "ingest", "Build a manifest CSV from a dataset directory tree");
  ingest->add_option("--root", root, "dataset root (or $PATH24_DATA_ROOT)");
  ingest->add_option("--out", manifest_out, "output manifest CSV")
      ->required();
  ingest->add_option("--color-mode", color_mode, "rgb or grayscale");

  std::string manifest_path;
  double val_fraction = 0.2;
  std::uint64_t seed = 0;
  auto* split = app.add_subcommand(
      "split", "Stratified train/val split of a manifest (in place)");
  split->add_option("--manifest", manifest_path)->required();
  split->add_option("--val-fraction", val_fraction);
  split->add_option("--seed", seed);

  std::string config_file;
  std::vector<std::string> overrides;
  auto* train_cmd =
      app.add_subcommand("train", "Train a classifier head per a run config");
  train_cmd->add_option("--config", config_file, "flat key=value config file");
  train_cmd->add_option("--set", overrides,
                        "config override, key=value (repeatable)");

  std::string checkpoint, out_dir;
  auto* evaluate = app.add_subcommand(
      "evaluate", "Evaluate a checkpoint on a manifest's test split");
  evaluate->add_option("--checkpoint", checkpoint)->required();
  evaluate->add_option("--manifest", manifest_path)->required();
  evaluate->add_option("--out-dir", out_dir);

  std::string input, out_csv;
  int tile = 0, stride = 0;
  auto* predict =
      app.add_subcommand("predict", "Classify patches or tiled large images");
  predict->add_option("--checkpoint", checkpoint)->required();
  predict->add_option("input", input, "image file or directory")->required();
  predict->add_option("--out", out_csv, "output CSV (default stdout)");
  predict->add_option("--tile", tile, "tile large inputs to this patch size");
  predict->add_option("--stride", stride, "tiling stride (default --tile)");

  std::string train_report_path, eval_json_path;
  auto* report_cmd = app.add_subcommand(
      "report", "Render tables and plots from stored JSON results");
  report_cmd->add_option("--train-report", train_report_path);
  report_cmd->add_option("--eval-json", eval_json_path);
  report_cmd->add_option("--out-dir", out_dir, "output directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (ingest->parsed()) return cmd_ingest(root, manifest_out, color_mode);
  if (split->parsed()) return cmd_split(manifest_path, val_fraction, seed);
  if (train_cmd->parsed()) return cmd_train(config_file, overrides);
  if (evaluate->parsed())
    return cmd_evaluate(checkpoint, manifest_path, out_dir);
  if (predict->parsed())
    return cmd_predict(checkpoint, input, out_csv, tile, stride);
  if (report_cmd->parsed())
    return cmd_report(train_report_path, eval_json_path, out_dir);
  return kExitUsage;
}
