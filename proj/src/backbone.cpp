#include "path24/backbone.hpp"

#include <cmath>
#include <fstream>
#include <mutex>
#include <random>

#include "path24/hash.hpp"

namespace path24 {

namespace {

std::map<std::string, int>& registry() {
  static std::map<std::string, int> table = {{"resnet50", 2048},
                                             {"densenet161", 2208}};
  return table;
}
std::mutex registry_mutex;

constexpr char kWeightsMagic[4] = {'P', '2', '4', 'W'};
constexpr std::uint32_t kWeightsVersion = 1;

}  // namespace

int backbone_feature_dim(const std::string& name) {
  std::lock_guard lock(registry_mutex);
  auto it = registry().find(name);
  if (it == registry().end()) {
    throw Error("unknown backbone '" + name + "'; registered: " +
                [] {
                  std::string s;
                  for (const auto& [n, d] : registry()) {
                    if (!s.empty()) s += ", ";
                    s += n;
                  }
                  return s;
                }());
  }
  return it->second;
}

void register_backbone(const std::string& name, int feature_dim) {
  if (feature_dim < 1) throw Error("backbone feature_dim must be positive");
  std::lock_guard lock(registry_mutex);
  registry()[name] = feature_dim;
}

std::vector<std::string> registered_backbones() {
  std::lock_guard lock(registry_mutex);
  std::vector<std::string> names;
  for (const auto& [n, d] : registry()) names.push_back(n);
  return names;
}

BackboneSpec make_backbone_spec(const std::string& name, bool pretrained) {
  return BackboneSpec{name, backbone_feature_dim(name), pretrained};
}

Backbone::Backbone(BackboneSpec spec, Matrix weight, Vector bias)
    : spec_(std::move(spec)), weight_(std::move(weight)),
      bias_(std::move(bias)) {
  if (weight_.rows() != spec_.feature_dim || weight_.cols() != kInputDim ||
      bias_.size() != spec_.feature_dim) {
    throw Error("backbone weight shape does not match spec");
  }
}

Backbone Backbone::random(const BackboneSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ fnv1a(spec.name.data(), spec.name.size()));
  std::normal_distribution<double> dist(0.0,
                                        1.0 / std::sqrt(double(kInputDim)));
  Matrix w(spec.feature_dim, kInputDim);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  }
  Vector b = Vector::Zero(spec.feature_dim);
  return Backbone(spec, std::move(w), std::move(b));
}

Backbone Backbone::from_file(const BackboneSpec& spec,
                             const std::filesystem::path& weights_path) {
  std::ifstream in(weights_path, std::ios::binary);
  if (!in) {
    throw LoadError("backbone weights file not found: " +
                    weights_path.string());
  }
  char magic[4];
  std::uint32_t version = 0, name_len = 0;
  in.read(magic, 4);
  in.read(reinterpret_cast<char*>(&version), 4);
  if (!in || std::memcmp(magic, kWeightsMagic, 4) != 0 ||
      version != kWeightsVersion) {
    throw LoadError("not a backbone weights file: " + weights_path.string());
  }
  in.read(reinterpret_cast<char*>(&name_len), 4);
  std::string name(name_len, '\0');
  in.read(name.data(), name_len);
  std::int32_t feature_dim = 0, input_dim = 0;
  in.read(reinterpret_cast<char*>(&feature_dim), 4);
  in.read(reinterpret_cast<char*>(&input_dim), 4);
  if (!in || name != spec.name || feature_dim != spec.feature_dim ||
      input_dim != kInputDim) {
    throw LoadError("backbone weights file " + weights_path.string() +
                    " does not match backbone '" + spec.name + "'");
  }
  Matrix w(feature_dim, kInputDim);
  Vector b(feature_dim);
  in.read(reinterpret_cast<char*>(w.data()), sizeof(double) * w.size());
  in.read(reinterpret_cast<char*>(b.data()), sizeof(double) * b.size());
  if (!in) {
    throw LoadError("truncated backbone weights file: " +
                    weights_path.string());
  }
  return Backbone(spec, std::move(w), std::move(b));
}

void Backbone::save(const std::filesystem::path& weights_path) const {
  std::ofstream out(weights_path, std::ios::binary);
  if (!out) {
    throw Error("cannot write backbone weights: " + weights_path.string());
  }
  out.write(kWeightsMagic, 4);
  out.write(reinterpret_cast<const char*>(&kWeightsVersion), 4);
  auto name_len = static_cast<std::uint32_t>(spec_.name.size());
  out.write(reinterpret_cast<const char*>(&name_len), 4);
  out.write(spec_.name.data(), name_len);
  std::int32_t feature_dim = spec_.feature_dim, input_dim = kInputDim;
  out.write(reinterpret_cast<const char*>(&feature_dim), 4);
  out.write(reinterpret_cast<const char*>(&input_dim), 4);
  out.write(reinterpret_cast<const char*>(weight_.data()),
            sizeof(double) * weight_.size());
  out.write(reinterpret_cast<const char*>(bias_.data()),
            sizeof(double) * bias_.size());
}

Vector Backbone::pool(const cv::Mat& image) const {
  if (image.type() != CV_32FC3) {
    throw Error("backbone expects CV_32FC3 input (preprocessed patch)");
  }
  if (image.rows < kPoolGrid || image.cols < kPoolGrid) {
    throw Error("backbone input smaller than pooling grid");
  }
  Vector pooled = Vector::Zero(kInputDim);
  for (int gy = 0; gy < kPoolGrid; ++gy) {
    int y0 = gy * image.rows / kPoolGrid;
    int y1 = (gy + 1) * image.rows / kPoolGrid;
    for (int gx = 0; gx < kPoolGrid; ++gx) {
      int x0 = gx * image.cols / kPoolGrid;
      int x1 = (gx + 1) * image.cols / kPoolGrid;
      double sum[3] = {0, 0, 0};
      for (int y = y0; y < y1; ++y) {
        const auto* row = image.ptr<cv::Vec3f>(y);
        for (int x = x0; x < x1; ++x) {
          for (int c = 0; c < 3; ++c) sum[c] += row[x][c];
        }
      }
      const double area = double(y1 - y0) * double(x1 - x0);
      for (int c = 0; c < 3; ++c) {
        pooled[(c * kPoolGrid + gy) * kPoolGrid + gx] = sum[c] / area;
      }
    }
  }
  return pooled;
}

Vector Backbone::extract_one(const cv::Mat& image) const {
  return weight_ * pool(image) + bias_;
}

Matrix Backbone::extract(const std::vector<cv::Mat>& batch) const {
  Matrix features(batch.size(), spec_.feature_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    features.row(i) = extract_one(batch[i]).transpose();
  }
  return features;
}

std::uint64_t Backbone::weight_hash() const {
  std::uint64_t h = hash_matrix(weight_);
  return fnv1a(bias_.data(), sizeof(double) * bias_.size(), h);
}

}  // namespace path24
