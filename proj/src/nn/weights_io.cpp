#include "oscphase/nn/weights_io.hpp"

#include <fstream>

#include "oscphase/errors.hpp"

namespace oscphase::nn {

namespace {
constexpr const char* kFormat = "oscphase-weights";
constexpr int kVersion = 1;
}  // namespace

void save_weights(const std::string& path,
                  const std::vector<std::pair<std::string, Eigen::MatrixXd>>& layers,
                  const nlohmann::json& meta) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["meta"] = meta;
  nlohmann::json layer_list = nlohmann::json::array();
  for (const auto& [name, matrix] : layers) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["rows"] = matrix.rows();
    entry["cols"] = matrix.cols();
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(matrix.size()));
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
      for (Eigen::Index c = 0; c < matrix.cols(); ++c) data.push_back(matrix(r, c));
    }
    entry["data"] = std::move(data);
    layer_list.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layer_list);

  std::ofstream out(path);
  if (!out) throw IoError("save_weights: cannot open '" + path + "' for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("save_weights: write failed for '" + path + "'");
}

LoadedWeights load_weights(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("load_weights: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("load_weights: malformed JSON in '" + path + "': " + e.what());
  }
  if (doc.value("format", "") != kFormat || doc.value("version", -1) != kVersion) {
    throw InvalidConfig("load_weights: unsupported weights format in '" + path + "'");
  }
  LoadedWeights result;
  result.meta = doc.value("meta", nlohmann::json::object());
  for (const auto& entry : doc.at("layers")) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    const auto& data = entry.at("data");
    if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw InvalidConfig("load_weights: data length does not match shape for layer '" +
                          entry.at("name").get<std::string>() + "'");
    }
    Eigen::MatrixXd matrix(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) matrix(r, c) = data[k++].get<double>();
    }
    result.layers.emplace(entry.at("name").get<std::string>(), std::move(matrix));
  }
  return result;
}

}  // namespace oscphase::nn
