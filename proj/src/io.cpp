#include "oscphase/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace oscphase {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  return fields;
}

double parse_double(const std::string& text, const std::string& context) {
  try {
    std::size_t used = 0;
    const double value = std::stod(text, &used);
    while (used < text.size() && std::isspace(static_cast<unsigned char>(text[used]))) ++used;
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return value;
  } catch (const std::exception&) {
    throw IoError(context + ": cannot parse number '" + text + "'");
  }
}

std::string strip(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "t,x,y,z\n";
  for (Eigen::Index i = 0; i < traj.size(); ++i) {
    out << format_double(traj.t[i]) << ',' << format_double(traj.pos(i, 0)) << ','
        << format_double(traj.pos(i, 1)) << ',' << format_double(traj.pos(i, 2)) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

Trajectory read_trajectory_csv(const std::string& path, const std::string& id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trajectory CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || strip(line) != "t,x,y,z") {
    throw IoError("trajectory CSV '" + path + "': expected header 't,x,y,z'");
  }
  std::vector<double> ts;
  std::vector<Eigen::Vector3d> points;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) throw IoError("trajectory CSV '" + path + "': expected 4 columns");
    ts.push_back(parse_double(fields[0], path));
    points.emplace_back(parse_double(fields[1], path), parse_double(fields[2], path),
                        parse_double(fields[3], path));
  }
  if (ts.size() < 2) throw TooShort("trajectory CSV '" + path + "': needs at least 2 samples");

  Trajectory traj;
  traj.id = id.empty() ? path : id;
  traj.t = Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  traj.pos.resize(static_cast<Eigen::Index>(points.size()), 3);
  for (std::size_t i = 0; i < points.size(); ++i) {
    traj.pos.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
  }
  traj.rate = 1.0 / (ts[1] - ts[0]);
  traj.validate();
  return traj;
}

void write_phase_csv(const std::string& path, const Eigen::Ref<const Eigen::VectorXd>& t,
                     const Eigen::Ref<const Eigen::VectorXd>& theta) {
  if (t.size() != theta.size()) throw ShapeMismatch("write_phase_csv: t/theta length mismatch");
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << "t,theta\n";
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    out << format_double(t[i]) << ',' << format_double(theta[i]) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> read_phase_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open phase CSV '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || strip(line) != "t,theta") {
    throw IoError("phase CSV '" + path + "': expected header 't,theta'");
  }
  std::vector<double> ts;
  std::vector<double> thetas;
  while (std::getline(in, line)) {
    if (strip(line).empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 2) throw IoError("phase CSV '" + path + "': expected 2 columns");
    ts.push_back(parse_double(fields[0], path));
    thetas.push_back(parse_double(fields[1], path));
  }
  Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(ts.data(), static_cast<Eigen::Index>(ts.size()));
  Eigen::VectorXd theta =
      Eigen::Map<Eigen::VectorXd>(thetas.data(), static_cast<Eigen::Index>(thetas.size()));
  return {std::move(t), std::move(theta)};
}

void write_sim_trace_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << 't';
  for (Eigen::Index i = 0; i < trace.phases.cols(); ++i) out << ",theta_" << i;
  out << ",r\n";
  for (Eigen::Index k = 0; k < trace.t.size(); ++k) {
    out << format_double(trace.t[k]);
    for (Eigen::Index i = 0; i < trace.phases.cols(); ++i) {
      out << ',' << format_double(trace.phases(k, i));
    }
    out << ',' << format_double(trace.r[k]) << '\n';
  }
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<const ManifestEntry*> Manifest::by_split(const std::string& split) const {
  std::vector<const ManifestEntry*> out;
  for (const ManifestEntry& entry : entries) {
    if (entry.split == split) out.push_back(&entry);
  }
  return out;
}

const ManifestEntry& Manifest::by_id(const std::string& id) const {
  for (const ManifestEntry& entry : entries) {
    if (entry.id == id) return entry;
  }
  throw InvalidManifest("manifest: unknown trajectory id '" + id + "'");
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  nlohmann::json doc;
  doc["format"] = "oscphase-manifest";
  doc["version"] = 1;
  nlohmann::json list = nlohmann::json::array();
  for (const ManifestEntry& entry : manifest.entries) {
    list.push_back({{"id", entry.id},
                    {"trajectory", entry.traj_path},
                    {"labels", entry.label_path},
                    {"split", entry.split},
                    {"group", entry.group}});
  }
  doc["trajectories"] = std::move(list);
  write_json_file(path, doc);
}

Manifest read_manifest(const std::string& path) {
  const nlohmann::json doc = read_json_file(path);
  if (doc.value("format", "") != "oscphase-manifest") {
    throw InvalidManifest("manifest '" + path + "': unrecognized format");
  }
  Manifest manifest;
  for (const auto& item : doc.at("trajectories")) {
    ManifestEntry entry;
    entry.id = item.at("id").get<std::string>();
    entry.traj_path = item.at("trajectory").get<std::string>();
    entry.label_path = item.value("labels", "");
    entry.split = item.value("split", "");
    entry.group = item.value("group", 0);
    manifest.entries.push_back(std::move(entry));
  }
  return manifest;
}

void write_error_report(const std::string& path, const ErrorReport& report) {
  nlohmann::json doc;
  doc["aggregate"] = {{"mean", report.aggregate_mean},
                      {"std", report.aggregate_std},
                      {"count", report.per_trajectory.size()}};
  nlohmann::json per = nlohmann::json::array();
  for (const auto& entry : report.per_trajectory) {
    per.push_back({{"id", entry.id}, {"mean_error", entry.mean_error}});
  }
  doc["per_trajectory"] = std::move(per);
  write_json_file(path, doc);
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidConfig("config '" + path + "' line " + std::to_string(line_no) +
                          ": expected 'key = value'");
    }
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (key.empty()) {
      throw InvalidConfig("config '" + path + "' line " + std::to_string(line_no) + ": empty key");
    }
    values[key] = value;
  }
  return values;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

void write_json_file(const std::string& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << doc.dump(1) << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    nlohmann::json doc;
    in >> doc;
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("malformed JSON in '" + path + "': " + e.what());
  }
}

}  // namespace oscphase
