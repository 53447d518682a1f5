#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace oscphase::nn {

// Versioned JSON weights file: named layers with shapes and row-major values.
// Doubles survive the round trip exactly.
void save_weights(const std::string& path,
                  const std::vector<std::pair<std::string, Eigen::MatrixXd>>& layers,
                  const nlohmann::json& meta = nlohmann::json::object());

struct LoadedWeights {
  std::map<std::string, Eigen::MatrixXd> layers;
  nlohmann::json meta;
};

LoadedWeights load_weights(const std::string& path);

}  // namespace oscphase::nn
