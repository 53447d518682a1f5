#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oscphase/io.hpp"
#include "oscphase/rng.hpp"

using namespace oscphase;

namespace {

std::string tmp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("trajectory csv: exact round trip") {
  Rng rng(1);
  Points pos(50, 3);
  for (Eigen::Index i = 0; i < pos.size(); ++i) pos.data()[i] = rng.gaussian();
  const Trajectory traj = make_trajectory("roundtrip", pos, 100.0);

  const std::string path = tmp_path("oscphase_traj.csv");
  write_trajectory_csv(path, traj);
  const Trajectory loaded = read_trajectory_csv(path, "roundtrip");
  CHECK(loaded.rate == doctest::Approx(100.0).epsilon(1e-9));
  CHECK((loaded.pos - traj.pos).cwiseAbs().maxCoeff() == 0.0);
  CHECK((loaded.t - traj.t).cwiseAbs().maxCoeff() == 0.0);

  // Writing the loaded trajectory again is byte-identical.
  const std::string path2 = tmp_path("oscphase_traj2.csv");
  write_trajectory_csv(path2, loaded);
  CHECK(slurp(path) == slurp(path2));
}

TEST_CASE("trajectory csv: malformed inputs rejected") {
  const std::string path = tmp_path("oscphase_bad.csv");
  {
    std::ofstream out(path);
    out << "a,b,c,d\n1,2,3,4\n";
  }
  CHECK_THROWS_AS(read_trajectory_csv(path), IoError);
  {
    std::ofstream out(path);
    out << "t,x,y,z\n0.0,1,2\n";
  }
  CHECK_THROWS_AS(read_trajectory_csv(path), IoError);
  {
    std::ofstream out(path);
    out << "t,x,y,z\n0.0,1,2,3\n";
  }
  CHECK_THROWS_AS(read_trajectory_csv(path), TooShort);
  CHECK_THROWS_AS(read_trajectory_csv(tmp_path("missing_file.csv")), IoError);
}

TEST_CASE("phase csv: round trip") {
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(20, 0.0, 0.19);
  Eigen::VectorXd theta(20);
  Rng rng(2);
  for (int i = 0; i < 20; ++i) theta[i] = rng.uniform(-M_PI, M_PI);
  const std::string path = tmp_path("oscphase_phase.csv");
  write_phase_csv(path, t, theta);
  const auto [t2, theta2] = read_phase_csv(path);
  CHECK((t2 - t).cwiseAbs().maxCoeff() == 0.0);
  CHECK((theta2 - theta).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("manifest: round trip and lookups") {
  Manifest manifest;
  manifest.entries = {{"a", "data/a.csv", "labels/a.csv", "train", 1},
                      {"b", "data/b.csv", "labels/b.csv", "val", 1},
                      {"c", "data/c.csv", "labels/c.csv", "test", 4}};
  const std::string path = tmp_path("oscphase_manifest.json");
  write_manifest(path, manifest);
  const Manifest loaded = read_manifest(path);
  REQUIRE(loaded.entries.size() == 3);
  CHECK(loaded.by_split("train").size() == 1);
  CHECK(loaded.by_split("val").size() == 1);
  CHECK(loaded.by_id("c").group == 4);
  CHECK_THROWS_AS(loaded.by_id("zzz"), InvalidManifest);
}

TEST_CASE("config file: sections, comments, bad lines") {
  const std::string path = tmp_path("oscphase_config.txt");
  {
    std::ofstream out(path);
    out << "# comment line\n";
    out << "seed = 7\n";
    out << "dataset.count = 12   # trailing comment\n";
    out << "\n";
    out << "kuramoto.coupling = 0.25\n";
  }
  const auto values = read_config_file(path);
  CHECK(values.at("seed") == "7");
  CHECK(values.at("dataset.count") == "12");
  CHECK(values.at("kuramoto.coupling") == "0.25");

  {
    std::ofstream out(path);
    out << "not a key value pair\n";
  }
  CHECK_THROWS_AS(read_config_file(path), InvalidConfig);
}

TEST_CASE("format_double: shortest exact round trip") {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.gaussian() * std::pow(10.0, rng.uniform(-12, 12));
    const double parsed = std::stod(format_double(x));
    CHECK(parsed == x);
  }
}
