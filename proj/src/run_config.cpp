#include "path24/run_config.hpp"

#include <fstream>
#include <sstream>
#include <vector>

namespace path24 {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected boolean, got '" + v + "'");
}

std::array<float, 3> parse_float3(const std::string& v) {
  std::array<float, 3> out{};
  std::stringstream ss(v);
  std::string item;
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(ss, item, ';')) {
      throw ConfigError("expected three ';'-separated floats, got '" + v +
                        "'");
    }
    out[i] = std::stof(trim(item));
  }
  return out;
}

}  // namespace

std::map<std::string, std::string> parse_flat_config(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::map<std::string, std::string> pairs;
  std::vector<std::string> bad_lines;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    auto hash = stripped.find('#');
    if (hash != std::string::npos) stripped = trim(stripped.substr(0, hash));
    if (stripped.empty()) continue;
    auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      bad_lines.push_back("line " + std::to_string(lineno) + ": '" + line +
                          "'");
      continue;
    }
    pairs[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
  }
  if (!bad_lines.empty()) {
    std::string msg = "malformed config lines in " + path.string() + ":";
    for (const auto& l : bad_lines) msg += "\n  " + l;
    throw ConfigError(msg);
  }
  return pairs;
}

void RunConfig::apply_pair(const std::string& key, const std::string& value) {
  if (key == "dataset.root") dataset_root = value;
  else if (key == "dataset.manifest") manifest_path = value;
  else if (key == "dataset.color_mode") {
    color_mode = parse_color_mode(value);
    preprocess.color_mode = color_mode;
  } else if (key == "dataset.val_fraction") val_fraction = std::stod(value);
  else if (key == "backbone.name") backbone = value;
  else if (key == "backbone.pretrained") backbone_pretrained = parse_bool(value);
  else if (key == "backbone.weights_path") backbone_weights = value;
  else if (key == "head.hidden_width") head.hidden_width = std::stoi(value);
  else if (key == "head.dropout1") head.dropout1 = std::stod(value);
  else if (key == "head.dropout2") head.dropout2 = std::stod(value);
  else if (key == "head.bn_momentum") head.bn_momentum = std::stod(value);
  else if (key == "head.bn_epsilon") head.bn_epsilon = std::stod(value);
  else if (key == "head.num_classes") head.num_classes = std::stoi(value);
  else if (key == "train.learning_rate") train.learning_rate = std::stod(value);
  else if (key == "train.epochs") train.epochs = std::stoi(value);
  else if (key == "train.batch_size") train.batch_size = std::stoi(value);
  else if (key == "train.optimizer") train.optimizer = parse_optimizer(value);
  else if (key == "train.rmsprop_smoothing") {
    train.optimizer_params.rmsprop_smoothing = std::stod(value);
  } else if (key == "train.rmsprop_epsilon") {
    train.optimizer_params.rmsprop_epsilon = std::stod(value);
  } else if (key == "train.momentum") {
    train.optimizer_params.momentum = std::stod(value);
  } else if (key == "train.seed") train.seed = std::stoull(value);
  else if (key == "train.device") {
    if (value == "cpu") train.device = Device::kCpu;
    else if (value == "accelerator") train.device = Device::kAccelerator;
    else throw ConfigError("unknown device '" + value + "'");
  } else if (key == "preprocess.target_size") {
    preprocess.target_size = std::stoi(value);
  } else if (key == "preprocess.channel_mean") {
    preprocess.channel_mean = parse_float3(value);
  } else if (key == "preprocess.channel_std") {
    preprocess.channel_std = parse_float3(value);
  } else if (key == "output.dir") output_dir = value;
  else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::from_pairs(
    const std::map<std::string, std::string>& pairs) {
  RunConfig config;
  std::vector<std::string> errors;
  for (const auto& [key, value] : pairs) {
    try {
      config.apply_pair(key, value);
    } catch (const std::exception& e) {
      errors.push_back(key + ": " + e.what());
    }
  }
  if (!errors.empty()) {
    std::string msg = "config errors:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return config;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  return from_pairs(parse_flat_config(path));
}

std::string RunConfig::snapshot() const {
  std::ostringstream out;
  out.precision(17);
  out << "dataset.root = " << dataset_root.generic_string() << '\n'
      << "dataset.manifest = " << manifest_path.generic_string() << '\n'
      << "dataset.color_mode = " << to_string(color_mode) << '\n'
      << "dataset.val_fraction = " << val_fraction << '\n'
      << "backbone.name = " << backbone << '\n'
      << "backbone.pretrained = " << (backbone_pretrained ? "true" : "false")
      << '\n'
      << "backbone.weights_path = " << backbone_weights.generic_string()
      << '\n'
      << "head.hidden_width = " << head.hidden_width << '\n'
      << "head.dropout1 = " << head.dropout1 << '\n'
      << "head.dropout2 = " << head.dropout2 << '\n'
      << "head.bn_momentum = " << head.bn_momentum << '\n'
      << "head.bn_epsilon = " << head.bn_epsilon << '\n'
      << "head.num_classes = " << head.num_classes << '\n'
      << "train.learning_rate = " << train.learning_rate << '\n'
      << "train.epochs = " << train.epochs << '\n'
      << "train.batch_size = " << train.batch_size << '\n'
      << "train.optimizer = " << to_string(train.optimizer) << '\n'
      << "train.rmsprop_smoothing = "
      << train.optimizer_params.rmsprop_smoothing << '\n'
      << "train.rmsprop_epsilon = " << train.optimizer_params.rmsprop_epsilon
      << '\n'
      << "train.momentum = " << train.optimizer_params.momentum << '\n'
      << "train.seed = " << train.seed << '\n'
      << "train.device = "
      << (train.device == Device::kCpu ? "cpu" : "accelerator") << '\n'
      << "preprocess.target_size = " << preprocess.target_size << '\n'
      << "preprocess.channel_mean = " << preprocess.channel_mean[0] << "; "
      << preprocess.channel_mean[1] << "; " << preprocess.channel_mean[2]
      << '\n'
      << "preprocess.channel_std = " << preprocess.channel_std[0] << "; "
      << preprocess.channel_std[1] << "; " << preprocess.channel_std[2]
      << '\n'
      << "output.dir = " << output_dir.generic_string() << '\n';
  return out.str();
}

void RunConfig::save_snapshot(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write config snapshot: " + path.string());
  out << snapshot();
}

}  // namespace path24
