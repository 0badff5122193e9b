#include "path24/classifier.hpp"

#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "path24/loss.hpp"

namespace path24 {

using nlohmann::json;

void HeadConfig::validate() const {
  if (num_classes < 0) throw ConfigError("head.num_classes must be >= 0");
  if (num_classes > 0 && hidden_width < 1) {
    throw ConfigError("head.hidden_width must be >= 1");
  }
  for (double r : {dropout1, dropout2}) {
    if (r < 0.0 || r >= 1.0) {
      throw ConfigError("dropout rates must be in [0,1)");
    }
  }
  if (!(bn_epsilon > 0.0)) throw ConfigError("head.bn_epsilon must be > 0");
  if (bn_momentum < 0.0 || bn_momentum > 1.0) {
    throw ConfigError("head.bn_momentum must be in [0,1]");
  }
}

Head::Head(int feature_dim, const HeadConfig& config, std::uint64_t init_seed)
    : config_(config), dropout_rng_(init_seed ^ 0xd1f0u) {
  config.validate();
  if (config.num_classes == 0) return;  // disabled head, zero parameters
  std::mt19937_64 rng(init_seed);
  bn1_.emplace(feature_dim, config.bn_momentum, config.bn_epsilon, "bn1");
  drop1_.emplace(config.dropout1);
  fc1_.emplace(feature_dim, config.hidden_width, "fc1", rng);
  bn2_.emplace(config.hidden_width, config.bn_momentum, config.bn_epsilon,
               "bn2");
  drop2_.emplace(config.dropout2);
  fc2_.emplace(config.hidden_width, config.num_classes, "fc2", rng);
}

Matrix Head::forward(const Matrix& features, bool training) {
  if (empty()) throw Error("forward on disabled head (num_classes == 0)");
  Matrix x = bn1_->forward(features, training);
  x = drop1_->forward(x, training, dropout_rng_);
  x = fc1_->forward(x);
  x = bn2_->forward(x, training);
  x = drop2_->forward(x, training, dropout_rng_);
  return fc2_->forward(x);
}

Matrix Head::backward(const Matrix& dlogits) {
  if (empty()) throw Error("backward on disabled head");
  Matrix d = fc2_->backward(dlogits);
  d = drop2_->backward(d);
  d = bn2_->backward(d);
  d = fc1_->backward(d);
  d = drop1_->backward(d);
  return bn1_->backward(d);
}

std::vector<Tensor*> Head::parameters() {
  if (empty()) return {};
  return {&bn1_->gamma, &bn1_->beta, &fc1_->weight, &fc1_->bias,
          &bn2_->gamma, &bn2_->beta, &fc2_->weight, &fc2_->bias};
}

std::vector<const Tensor*> Head::parameters() const {
  if (empty()) return {};
  return {&bn1_->gamma, &bn1_->beta, &fc1_->weight, &fc1_->bias,
          &bn2_->gamma, &bn2_->beta, &fc2_->weight, &fc2_->bias};
}

long Head::parameter_count() const {
  long n = 0;
  for (const Tensor* t : parameters()) n += static_cast<long>(t->size());
  return n;
}

ClassifierModel::ClassifierModel(std::shared_ptr<const Backbone> backbone,
                                 HeadConfig head_config,
                                 PreprocessConfig preprocess,
                                 std::uint64_t seed)
    : backbone_(std::move(backbone)),
      head_config_(head_config),
      preprocess_(preprocess),
      head_(backbone_->spec().feature_dim, head_config, seed),
      seed_(seed) {}

Matrix ClassifierModel::forward(const std::vector<cv::Mat>& batch,
                                ForwardMode mode) {
  for (const cv::Mat& img : batch) {
    if (img.rows != preprocess_.target_size ||
        img.cols != preprocess_.target_size || img.type() != CV_32FC3) {
      throw Error("forward: expected " +
                  std::to_string(preprocess_.target_size) + "x" +
                  std::to_string(preprocess_.target_size) +
                  "x3 float input, got " + std::to_string(img.cols) + "x" +
                  std::to_string(img.rows) + "x" +
                  std::to_string(img.channels()));
    }
  }
  return forward_features(backbone_->extract(batch), mode);
}

Matrix ClassifierModel::forward_features(const Matrix& features,
                                         ForwardMode mode) {
  Matrix logits = head_.forward(features, mode == ForwardMode::kTrain);
  if (mode == ForwardMode::kEval) return softmax_rows(logits);
  return logits;
}

std::pair<int, double> ClassifierModel::predict(const cv::Mat& image) {
  Matrix probs = forward({image}, ForwardMode::kEval);
  int best = 0;
  double best_p = probs(0, 0);
  for (Eigen::Index c = 1; c < probs.cols(); ++c) {
    if (probs(0, c) > best_p) {  // strict: ties keep the lowest index
      best = static_cast<int>(c);
      best_p = probs(0, c);
    }
  }
  return {best, best_p};
}

long ClassifierModel::trainable_parameter_count() const {
  long n = head_.parameter_count();
  if (base_trainable_) {
    n += static_cast<long>(backbone_->weight().size() +
                           backbone_->bias().size());
  }
  return n;
}

namespace {

constexpr const char* kCheckpointFormat = "path24-checkpoint";
constexpr int kCheckpointVersion = 1;

const char kB64Chars[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string b64_encode(const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::string out;
  out.reserve((n + 2) / 3 * 4);
  for (std::size_t i = 0; i < n; i += 3) {
    unsigned v = p[i] << 16;
    if (i + 1 < n) v |= p[i + 1] << 8;
    if (i + 2 < n) v |= p[i + 2];
    out.push_back(kB64Chars[(v >> 18) & 63]);
    out.push_back(kB64Chars[(v >> 12) & 63]);
    out.push_back(i + 1 < n ? kB64Chars[(v >> 6) & 63] : '=');
    out.push_back(i + 2 < n ? kB64Chars[v & 63] : '=');
  }
  return out;
}

std::vector<unsigned char> b64_decode(const std::string& text) {
  auto value_of = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::vector<unsigned char> out;
  int buffer = 0, bits = 0;
  for (char c : text) {
    if (c == '=') break;
    int v = value_of(c);
    if (v < 0) throw CheckpointError("invalid base64 payload");
    buffer = (buffer << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out.push_back(static_cast<unsigned char>((buffer >> bits) & 0xff));
    }
  }
  return out;
}

json matrix_to_json(const Matrix& m) {
  return json{{"rows", m.rows()},
              {"cols", m.cols()},
              {"data", b64_encode(m.data(), sizeof(double) * m.size())}};
}

Matrix matrix_from_json(const json& j) {
  Matrix m(j.at("rows").get<Eigen::Index>(), j.at("cols").get<Eigen::Index>());
  auto bytes = b64_decode(j.at("data").get<std::string>());
  if (bytes.size() != sizeof(double) * static_cast<std::size_t>(m.size())) {
    throw CheckpointError("weight blob size mismatch");
  }
  std::memcpy(m.data(), bytes.data(), bytes.size());
  return m;
}

json vector_to_json(const Vector& v) {
  Matrix m = v;
  return matrix_to_json(m);
}

Vector vector_from_json(const json& j) {
  Matrix m = matrix_from_json(j);
  return Vector(m.col(0));
}

}  // namespace

void ClassifierModel::save_checkpoint(
    const std::filesystem::path& path) const {
  json j;
  j["format"] = kCheckpointFormat;
  j["version"] = kCheckpointVersion;
  j["seed"] = seed_;
  j["backbone"] = {{"name", backbone_->spec().name},
                   {"feature_dim", backbone_->spec().feature_dim},
                   {"pretrained", backbone_->spec().pretrained},
                   {"weight", matrix_to_json(backbone_->weight())},
                   {"bias", vector_to_json(backbone_->bias())}};
  j["head_config"] = {{"hidden_width", head_config_.hidden_width},
                      {"dropout1", head_config_.dropout1},
                      {"dropout2", head_config_.dropout2},
                      {"bn_momentum", head_config_.bn_momentum},
                      {"bn_epsilon", head_config_.bn_epsilon},
                      {"num_classes", head_config_.num_classes}};
  j["preprocess"] = {
      {"color_mode", to_string(preprocess_.color_mode)},
      {"target_size", preprocess_.target_size},
      {"channel_mean", preprocess_.channel_mean},
      {"channel_std", preprocess_.channel_std}};
  json tensors = json::array();
  for (const Tensor* t : head_.parameters()) {
    json entry = matrix_to_json(t->value);
    entry["name"] = t->name;
    tensors.push_back(entry);
  }
  j["head_tensors"] = tensors;
  if (!head_.empty()) {
    j["head_running"] = {
        {"bn1_mean", vector_to_json(head_.bn1().running_mean)},
        {"bn1_var", vector_to_json(head_.bn1().running_var)},
        {"bn2_mean", vector_to_json(head_.bn2().running_mean)},
        {"bn2_var", vector_to_json(head_.bn2().running_var)}};
  }

  // Write-temp-then-rename so readers never see a partial checkpoint.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) {
      throw CheckpointError("cannot write checkpoint: " + path.string());
    }
    out << j.dump();
  }
  std::filesystem::rename(tmp, path);
}

ClassifierModel ClassifierModel::load_checkpoint(
    const std::filesystem::path& path,
    const std::optional<std::string>& expected_backbone) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError("checkpoint not found: " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " +
                          e.what());
  }
  try {
    if (j.at("format") != kCheckpointFormat ||
        j.at("version").get<int>() != kCheckpointVersion) {
      throw CheckpointError("unsupported checkpoint format in " +
                            path.string());
    }
    const json& jb = j.at("backbone");
    BackboneSpec spec{jb.at("name").get<std::string>(),
                      jb.at("feature_dim").get<int>(),
                      jb.at("pretrained").get<bool>()};
    if (expected_backbone && spec.name != *expected_backbone) {
      throw CheckpointError("checkpoint backbone '" + spec.name +
                            "' does not match requested '" +
                            *expected_backbone + "'");
    }
    auto backbone = std::make_shared<Backbone>(
        spec, matrix_from_json(jb.at("weight")),
        vector_from_json(jb.at("bias")));

    const json& jh = j.at("head_config");
    HeadConfig head_config{jh.at("hidden_width").get<int>(),
                           jh.at("dropout1").get<double>(),
                           jh.at("dropout2").get<double>(),
                           jh.at("bn_momentum").get<double>(),
                           jh.at("bn_epsilon").get<double>(),
                           jh.at("num_classes").get<int>()};

    const json& jp = j.at("preprocess");
    PreprocessConfig preprocess;
    preprocess.color_mode =
        parse_color_mode(jp.at("color_mode").get<std::string>());
    preprocess.target_size = jp.at("target_size").get<int>();
    preprocess.channel_mean = jp.at("channel_mean").get<std::array<float, 3>>();
    preprocess.channel_std = jp.at("channel_std").get<std::array<float, 3>>();

    ClassifierModel model(backbone, head_config, preprocess,
                          j.at("seed").get<std::uint64_t>());
    auto params = model.head().parameters();
    const json& tensors = j.at("head_tensors");
    if (tensors.size() != params.size()) {
      throw CheckpointError("head tensor count mismatch in " + path.string());
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Matrix value = matrix_from_json(tensors[i]);
      if (value.rows() != params[i]->value.rows() ||
          value.cols() != params[i]->value.cols()) {
        throw CheckpointError("head tensor shape mismatch for " +
                              params[i]->name);
      }
      params[i]->value = value;
    }
    if (!model.head().empty()) {
      const json& jr = j.at("head_running");
      model.head().bn1().running_mean = vector_from_json(jr.at("bn1_mean"));
      model.head().bn1().running_var = vector_from_json(jr.at("bn1_var"));
      model.head().bn2().running_mean = vector_from_json(jr.at("bn2_mean"));
      model.head().bn2().running_var = vector_from_json(jr.at("bn2_var"));
    }
    return model;
  } catch (const json::exception& e) {
    throw CheckpointError("corrupt checkpoint " + path.string() + ": " +
                          e.what());
  }
}

ClassifierModel build_classifier(const BackboneSpec& spec,
                                 const HeadConfig& head_config,
                                 const PreprocessConfig& preprocess,
                                 const BuildOptions& options) {
  head_config.validate();
  preprocess.validate();
  if (spec.feature_dim != backbone_feature_dim(spec.name)) {
    throw Error("backbone spec feature_dim " +
                std::to_string(spec.feature_dim) +
                " does not match registry entry for '" + spec.name + "'");
  }
  std::shared_ptr<const Backbone> backbone;
  if (spec.pretrained) {
    if (options.backbone_weights.empty()) {
      throw LoadError("pretrained backbone '" + spec.name +
                      "' requested but no weights path given");
    }
    backbone = std::make_shared<Backbone>(
        Backbone::from_file(spec, options.backbone_weights));
  } else {
    backbone =
        std::make_shared<Backbone>(Backbone::random(spec, options.seed));
  }
  ClassifierModel model(backbone, head_config, preprocess, options.seed);
  model.freeze_base();
  return model;
}

}  // namespace path24
