#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "oscphase/dataset.hpp"
#include "oscphase/kuramoto.hpp"
#include "oscphase/trajectory.hpp"

namespace oscphase {

// Shortest-exact decimal for a double (round-trips bit-for-bit).
std::string format_double(double value);

// Trajectory CSV: header `t,x,y,z`, one row per sample.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& path, const std::string& id = "");

// Phase CSV: header `t,theta`.
void write_phase_csv(const std::string& path, const Eigen::Ref<const Eigen::VectorXd>& t,
                     const Eigen::Ref<const Eigen::VectorXd>& theta);
std::pair<Eigen::VectorXd, Eigen::VectorXd> read_phase_csv(const std::string& path);

// Simulation trace CSV: `t,theta_0..theta_{M-1},r`.
void write_sim_trace_csv(const std::string& path, const SimTrace& trace);

struct ManifestEntry {
  std::string id;
  std::string traj_path;
  std::string label_path;
  std::string split;  // train | val | test
  int group = 0;
};

struct Manifest {
  std::vector<ManifestEntry> entries;

  std::vector<const ManifestEntry*> by_split(const std::string& split) const;
  const ManifestEntry& by_id(const std::string& id) const;
};

void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

void write_error_report(const std::string& path, const ErrorReport& report);

// Flat `key = value` configuration with dotted section prefixes and '#'
// comments.
std::map<std::string, std::string> read_config_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
void write_json_file(const std::string& path, const nlohmann::json& doc);
nlohmann::json read_json_file(const std::string& path);

}  // namespace oscphase
