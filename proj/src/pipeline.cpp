#include "oscphase/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "oscphase/calibration.hpp"
#include "oscphase/circular.hpp"
#include "oscphase/hilbert.hpp"
#include "oscphase/nn/weights_io.hpp"
#include "oscphase/parallel.hpp"

namespace oscphase {

namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

constexpr std::uint64_t kGenGroupTag = 0xD000;
constexpr std::uint64_t kGenSimTag = 0xC000;
constexpr std::uint64_t kRlTrainEnvTag = 0xB100;
constexpr std::uint64_t kRlEvalEnvTag = 0xB200;

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

double to_double(const std::string& value, const std::string& key) {
  try {
    return std::stod(value);
  } catch (const std::exception&) {
    throw InvalidConfig("config key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

long to_long(const std::string& value, const std::string& key) {
  try {
    return std::stol(value);
  } catch (const std::exception&) {
    throw InvalidConfig("config key '" + key + "': cannot parse '" + value + "' as an integer");
  }
}

void write_run_manifest(const ExperimentConfig& config, const std::string& command,
                        const std::vector<std::string>& artifacts, double seconds,
                        const std::string& tag = "") {
  for (const std::string& path : artifacts) {
    if (!fs::exists(path)) {
      throw MissingArtifacts("run manifest: artifact '" + path + "' does not exist");
    }
  }
  nlohmann::json doc;
  doc["command"] = command;
  doc["seed"] = config.seed;
  doc["config"] = config.snapshot();
  doc["artifacts"] = artifacts;
  doc["timings"] = {{"wall_seconds", seconds}};
  const std::string name = tag.empty() ? command : command + "_" + tag;
  write_json_file((fs::path(config.out_dir) / ("run_" + name + ".json")).string(), doc);
}

}  // namespace

ExperimentConfig ExperimentConfig::from_values(const std::map<std::string, std::string>& values) {
  ExperimentConfig config;
  for (const auto& [key, value] : values) {
    if (key == "seed") {
      config.seed = static_cast<std::uint64_t>(to_long(value, key));
    } else if (key == "out") {
      config.out_dir = value;
    } else if (key == "threads") {
      config.threads = static_cast<int>(to_long(value, key));
    } else if (key == "dataset.groups") {
      config.dataset.groups = static_cast<int>(to_long(value, key));
    } else if (key == "dataset.count") {
      config.dataset.total_trajectories = static_cast<int>(to_long(value, key));
    } else if (key == "dataset.trainval_groups") {
      config.dataset.trainval_groups = static_cast<int>(to_long(value, key));
    } else if (key == "dataset.train_fraction") {
      config.dataset.train_fraction = to_double(value, key);
    } else if (key == "dataset.duration_s") {
      config.dataset.duration_s = to_double(value, key);
    } else if (key == "dataset.rate_hz") {
      config.dataset.rate_hz = to_double(value, key);
    } else if (key == "dataset.noise_sigma") {
      config.dataset.noise_sigma = to_double(value, key);
    } else if (key == "dataset.beta_jitter") {
      config.dataset.beta_jitter = to_double(value, key);
    } else if (key == "dataset.reference") {
      config.dataset.reference_csv = value;
    } else if (key == "estimator.window") {
      config.estimator.window = to_long(value, key);
    } else if (key == "estimator.hidden") {
      config.estimator.hidden = to_long(value, key);
    } else if (key == "estimator.dropout") {
      config.estimator.dropout_rate = to_double(value, key);
    } else if (key == "estimator.epochs") {
      config.estimator.epochs = static_cast<int>(to_long(value, key));
    } else if (key == "estimator.batch") {
      config.estimator.batch_size = to_long(value, key);
    } else if (key == "estimator.lr") {
      config.estimator.learning_rate = to_double(value, key);
    } else if (key == "kuramoto.oscillators") {
      config.kuramoto.oscillators = to_long(value, key);
    } else if (key == "kuramoto.coupling") {
      config.kuramoto.coupling = to_double(value, key);
    } else if (key == "kuramoto.mu_omega") {
      config.kuramoto.mu_omega = to_double(value, key);
    } else if (key == "kuramoto.sigma_omega") {
      config.kuramoto.sigma_omega = to_double(value, key);
    } else if (key == "kuramoto.dt") {
      config.kuramoto.dt = to_double(value, key);
    } else if (key == "kuramoto.horizon_s") {
      config.kuramoto.horizon_s = to_double(value, key);
    } else if (key == "kuramoto.controlled_index") {
      config.kuramoto.controlled_index = to_long(value, key);
    } else if (key == "agent.actions") {
      config.agent.actions = to_long(value, key);
    } else if (key == "agent.span_sigmas") {
      config.agent.action_span_sigmas = to_double(value, key);
    } else if (key == "agent.gamma") {
      config.agent.gamma = to_double(value, key);
    } else if (key == "agent.eps_start") {
      config.agent.eps_start = to_double(value, key);
    } else if (key == "agent.eps_end") {
      config.agent.eps_end = to_double(value, key);
    } else if (key == "agent.eps_decay_steps") {
      config.agent.eps_decay_steps = to_long(value, key);
    } else if (key == "agent.replay") {
      config.agent.replay_capacity = to_long(value, key);
    } else if (key == "agent.batch") {
      config.agent.batch_size = to_long(value, key);
    } else if (key == "agent.target_sync") {
      config.agent.target_sync_interval = to_long(value, key);
    } else if (key == "agent.episodes") {
      config.agent.episodes = static_cast<int>(to_long(value, key));
    } else if (key == "agent.lr") {
      config.agent.learning_rate = to_double(value, key);
    } else if (key == "agent.hidden") {
      config.agent.hidden = to_long(value, key);
    } else if (key == "preset") {
      config.preset = value;
    } else if (key == "eval.trials") {
      config.eval_trials = static_cast<int>(to_long(value, key));
    } else if (key == "eval.buffer") {
      config.eval_buffer = to_long(value, key);
    } else if (key == "eval.noise_sigma") {
      config.eval_noise_sigma = to_double(value, key);
    } else {
      throw InvalidConfig("unknown config key '" + key + "'");
    }
  }
  return config;
}

nlohmann::json ExperimentConfig::snapshot() const {
  nlohmann::json doc;
  doc["seed"] = seed;
  doc["out"] = out_dir;
  doc["threads"] = threads;
  doc["dataset"] = {{"groups", dataset.groups},
                    {"count", dataset.total_trajectories},
                    {"trainval_groups", dataset.trainval_groups},
                    {"train_fraction", dataset.train_fraction},
                    {"duration_s", dataset.duration_s},
                    {"rate_hz", dataset.rate_hz},
                    {"noise_sigma", dataset.noise_sigma},
                    {"beta_jitter", dataset.beta_jitter},
                    {"reference", dataset.reference_csv}};
  doc["estimator"] = {{"window", estimator.window},     {"features", estimator.features},
                      {"hidden", estimator.hidden},     {"dropout", estimator.dropout_rate},
                      {"epochs", estimator.epochs},     {"batch", estimator.batch_size},
                      {"lr", estimator.learning_rate}};
  doc["kuramoto"] = {{"oscillators", kuramoto.oscillators},
                     {"coupling", kuramoto.coupling},
                     {"mu_omega", kuramoto.mu_omega},
                     {"sigma_omega", kuramoto.sigma_omega},
                     {"dt", kuramoto.dt},
                     {"horizon_s", kuramoto.horizon_s},
                     {"controlled_index", kuramoto.controlled_index}};
  doc["agent"] = {{"actions", agent.actions},
                  {"span_sigmas", agent.action_span_sigmas},
                  {"gamma", agent.gamma},
                  {"eps_start", agent.eps_start},
                  {"eps_end", agent.eps_end},
                  {"eps_decay_steps", agent.eps_decay_steps},
                  {"replay", agent.replay_capacity},
                  {"batch", agent.batch_size},
                  {"target_sync", agent.target_sync_interval},
                  {"episodes", agent.episodes},
                  {"lr", agent.learning_rate},
                  {"hidden", agent.hidden}};
  doc["preset"] = preset;
  doc["eval"] = {{"trials", eval_trials},
                 {"buffer", eval_buffer},
                 {"noise_sigma", eval_noise_sigma}};
  return doc;
}

KuramotoConfig apply_preset(KuramotoConfig config, const std::string& preset) {
  if (preset.empty() || preset == "none") return config;
  if (preset == "group1") {
    config.coupling = 0.05;
    config.sigma_omega = 0.5;
  } else if (preset == "group2") {
    config.coupling = 0.015;
    config.sigma_omega = 0.5;
  } else {
    throw InvalidConfig("unknown kuramoto preset '" + preset + "' (use group1, group2, none)");
  }
  return config;
}

GenResult cmd_gen_dataset(const ExperimentConfig& config) {
  StageTimer timer;
  const DatasetGenConfig& ds = config.dataset;
  if (ds.groups < 1 || ds.total_trajectories < 1) {
    throw InvalidConfig("gen: groups and count must be positive");
  }
  if (ds.trainval_groups < 1 || ds.trainval_groups >= ds.groups) {
    throw InvalidConfig("gen: trainval_groups must lie in [1, groups)");
  }
  const fs::path out(config.out_dir);
  fs::create_directories(out / "data");
  fs::create_directories(out / "labels");

  const Points reference = ds.reference_csv.empty()
                               ? reference_exemplar()
                               : Points(read_trajectory_csv(ds.reference_csv).pos);
  const MotionSynthParams base_params = fit_synth_params(reference, ds.noise_sigma, 0);

  // Round-robin group assignment; groups 1..trainval_groups are the
  // train/val pool, the rest are held out.
  std::vector<std::vector<int>> group_members(static_cast<std::size_t>(ds.groups));
  for (int j = 0; j < ds.total_trajectories; ++j) {
    group_members[static_cast<std::size_t>(j % ds.groups)].push_back(j);
  }

  KuramotoConfig sim_config = config.kuramoto;
  sim_config.dt = 1.0 / ds.rate_hz;
  sim_config.horizon_s = ds.duration_s;
  const auto steps = static_cast<Eigen::Index>(std::ceil(sim_config.horizon_s / sim_config.dt));

  Manifest manifest;
  std::vector<std::string> trainval_ids;

  for (int g = 0; g < ds.groups; ++g) {
    const auto& members = group_members[static_cast<std::size_t>(g)];
    if (members.empty()) continue;
    Rng group_rng = Rng(config.seed).fork(kGenGroupTag + static_cast<std::uint64_t>(g));

    // Inter-group variability: amplitude jitter standing in for
    // inter-individual differences.
    MotionSynthParams group_params = base_params;
    group_params.beta_x *= 1.0 + group_rng.uniform(-ds.beta_jitter, ds.beta_jitter);
    group_params.beta_y *= 1.0 + group_rng.uniform(-ds.beta_jitter, ds.beta_jitter);

    const Eigen::Index per_sim = sim_config.oscillators;
    std::size_t produced = 0;
    int sim_index = 0;
    while (produced < members.size()) {
      KuramotoConfig run_config = sim_config;
      run_config.seed = derive_seed(config.seed, kGenSimTag + static_cast<std::uint64_t>(g) * 1024 +
                                                     static_cast<std::uint64_t>(sim_index));
      const auto [trace, metrics] = run(run_config);
      (void)metrics;
      for (Eigen::Index osc = 0; osc < per_sim && produced < members.size(); ++osc, ++produced) {
        char name[32];
        std::snprintf(name, sizeof(name), "g%d_t%03zu", g + 1, produced);
        const std::string id = name;
        const Eigen::VectorXd phases = trace.phases.col(osc).segment(1, steps);
        Rng synth_rng = group_rng.fork(0xE000 + static_cast<std::uint64_t>(produced));
        const Trajectory traj =
            synthesize_trajectory(phases, group_params, ds.rate_hz, id, synth_rng);

        const auto [calibrated, transform] = calibrate(traj.pos);
        (void)transform;
        const PhaseSeries labels = phase_labels(calibrated);

        ManifestEntry entry;
        entry.id = id;
        entry.traj_path = (out / "data" / (id + ".csv")).string();
        entry.label_path = (out / "labels" / (id + ".csv")).string();
        entry.group = g + 1;
        write_trajectory_csv(entry.traj_path, traj);
        write_phase_csv(entry.label_path, traj.t, labels.values);
        if (g < ds.trainval_groups) {
          trainval_ids.push_back(id);
          entry.split = "train";  // refined below
        } else {
          entry.split = "test";
        }
        manifest.entries.push_back(std::move(entry));
      }
      ++sim_index;
    }
  }

  if (!trainval_ids.empty()) {
    const DatasetSplit split = split_dataset(trainval_ids, ds.train_fraction, config.seed);
    for (ManifestEntry& entry : manifest.entries) {
      if (entry.split != "train") continue;
      const bool in_val =
          std::find(split.val_ids.begin(), split.val_ids.end(), entry.id) != split.val_ids.end();
      if (in_val) entry.split = "val";
    }
  }

  GenResult result;
  result.manifest = manifest;
  result.manifest_path = (out / "manifest.json").string();
  write_manifest(result.manifest_path, manifest);

  std::vector<std::string> artifacts{result.manifest_path};
  for (const ManifestEntry& entry : manifest.entries) {
    artifacts.push_back(entry.traj_path);
    artifacts.push_back(entry.label_path);
  }
  write_run_manifest(config, "gen", artifacts, timer.seconds());
  return result;
}

namespace {

struct LoadedTrajectory {
  std::string id;
  Trajectory traj;
  Points calibrated;
  PhaseSeries labels;
};

std::vector<LoadedTrajectory> load_split(const Manifest& manifest, const std::string& split,
                                         int threads, std::optional<Eigen::Index> buffer) {
  const auto entries = manifest.by_split(split);
  std::vector<LoadedTrajectory> loaded(entries.size());
  parallel_tasks(static_cast<int>(entries.size()), threads, [&](int i) {
    const ManifestEntry& entry = *entries[static_cast<std::size_t>(i)];
    LoadedTrajectory& slot = loaded[static_cast<std::size_t>(i)];
    slot.id = entry.id;
    slot.traj = read_trajectory_csv(entry.traj_path, entry.id);
    if (entry.label_path.empty()) {
      throw InvalidManifest("manifest entry '" + entry.id + "' has no labels");
    }
    auto [t, theta] = read_phase_csv(entry.label_path);
    if (theta.size() != slot.traj.size()) {
      throw InvalidManifest("labels for '" + entry.id + "' do not match the trajectory length");
    }
    slot.labels.values = std::move(theta);
    slot.calibrated = buffer ? streaming_calibrate_all(slot.traj.pos, *buffer).first
                             : calibrate(slot.traj.pos).first;
  });
  return loaded;
}

}  // namespace

void save_estimator(const std::string& path, const LstmModel& model, const MinMaxScaler& scaler) {
  nlohmann::json meta;
  meta["kind"] = "lstm-phase-estimator";
  meta["estimator"] = {{"window", model.config.window},   {"features", model.config.features},
                       {"hidden", model.config.hidden},   {"dropout", model.config.dropout_rate},
                       {"epochs", model.config.epochs},   {"batch", model.config.batch_size},
                       {"lr", model.config.learning_rate}, {"seed", model.config.seed}};
  meta["scaler"] = {{"min", {scaler.min.x(), scaler.min.y(), scaler.min.z()}},
                    {"max", {scaler.max.x(), scaler.max.y(), scaler.max.z()}}};
  nn::save_weights(path,
                   {{"lstm.w_x", model.cell.w_x},
                    {"lstm.w_h", model.cell.w_h},
                    {"lstm.b", model.cell.b},
                    {"head.w", model.head.w},
                    {"head.b", model.head.b}},
                   meta);
}

EstimatorBundle load_estimator(const std::string& path) {
  nn::LoadedWeights loaded = nn::load_weights(path);
  if (loaded.meta.value("kind", "") != "lstm-phase-estimator") {
    throw InvalidConfig("'" + path + "' is not an estimator weights file");
  }
  EstimatorBundle bundle;
  bundle.model.cell.w_x = loaded.layers.at("lstm.w_x");
  bundle.model.cell.w_h = loaded.layers.at("lstm.w_h");
  bundle.model.cell.b = loaded.layers.at("lstm.b");
  bundle.model.head.w = loaded.layers.at("head.w");
  bundle.model.head.b = loaded.layers.at("head.b");
  const auto& est = loaded.meta.at("estimator");
  bundle.model.config.window = est.at("window").get<Eigen::Index>();
  bundle.model.config.features = est.at("features").get<Eigen::Index>();
  bundle.model.config.hidden = est.at("hidden").get<Eigen::Index>();
  bundle.model.config.dropout_rate = est.at("dropout").get<double>();
  bundle.model.config.epochs = est.at("epochs").get<int>();
  bundle.model.config.batch_size = est.at("batch").get<Eigen::Index>();
  bundle.model.config.learning_rate = est.at("lr").get<double>();
  bundle.model.config.seed = est.at("seed").get<std::uint64_t>();
  const auto& sc = loaded.meta.at("scaler");
  for (int axis = 0; axis < 3; ++axis) {
    bundle.scaler.min[axis] = sc.at("min").at(axis).get<double>();
    bundle.scaler.max[axis] = sc.at("max").at(axis).get<double>();
  }
  return bundle;
}

TrainResult cmd_train(const ExperimentConfig& config, const std::string& manifest_path) {
  StageTimer timer;
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  const Manifest manifest = read_manifest(manifest_path);

  auto train_set = load_split(manifest, "train", config.threads, std::nullopt);
  auto val_set = load_split(manifest, "val", config.threads, std::nullopt);
  if (train_set.empty()) throw InvalidManifest("train: manifest has no training trajectories");

  std::vector<const Points*> pool;
  for (const auto& item : train_set) pool.push_back(&item.calibrated);
  for (const auto& item : val_set) pool.push_back(&item.calibrated);
  const MinMaxScaler scaler = minmax_fit(pool);

  EstimatorConfig est_config = config.estimator;
  est_config.seed = config.seed;

  std::vector<TrainingSample> train_samples;
  std::vector<TrainingSample> val_samples;
  for (const auto& item : train_set) {
    auto windows = make_windows(item.calibrated, item.labels, scaler, est_config, item.traj.rate);
    train_samples.insert(train_samples.end(), std::make_move_iterator(windows.begin()),
                         std::make_move_iterator(windows.end()));
  }
  for (const auto& item : val_set) {
    auto windows = make_windows(item.calibrated, item.labels, scaler, est_config, item.traj.rate);
    val_samples.insert(val_samples.end(), std::make_move_iterator(windows.begin()),
                       std::make_move_iterator(windows.end()));
  }

  TrainResult result;
  result.scaler = scaler;
  result.model =
      train_estimator(train_samples, val_samples, est_config, &result.history, config.threads);

  result.weights_path = (out / "weights.json").string();
  save_estimator(result.weights_path, result.model, scaler);

  std::string history_csv = "epoch,train_loss,val_error\n";
  for (std::size_t e = 0; e < result.history.epochs.size(); ++e) {
    history_csv += std::to_string(e + 1) + ',' +
                   format_double(result.history.epochs[e].train_loss) + ',' +
                   format_double(result.history.epochs[e].val_error) + '\n';
  }
  result.history_path = (out / "history.csv").string();
  write_text_file(result.history_path, history_csv);

  write_run_manifest(config, "train", {result.weights_path, result.history_path}, timer.seconds());
  return result;
}

ErrorReport cmd_evaluate(const ExperimentConfig& config, const std::string& weights_path,
                         const std::string& manifest_path, const EvaluateOptions& options) {
  StageTimer timer;
  const fs::path out(config.out_dir);
  fs::create_directories(out);
  const EstimatorBundle bundle = load_estimator(weights_path);
  const Manifest manifest = read_manifest(manifest_path);

  const auto loaded = load_split(manifest, options.split, config.threads, options.buffer);
  if (loaded.empty()) {
    throw InvalidManifest("evaluate: no trajectories in split '" + options.split + "'");
  }

  const Eigen::Index window = bundle.model.config.window;
  std::vector<ErrorReport::Entry> entries(loaded.size());
  std::vector<Eigen::VectorXd> estimates(loaded.size());
  parallel_tasks(static_cast<int>(loaded.size()), config.threads, [&](int i) {
    const LoadedTrajectory& item = loaded[static_cast<std::size_t>(i)];
    const auto samples =
        make_windows(item.calibrated, item.labels, bundle.scaler, bundle.model.config,
                     item.traj.rate);
    const Eigen::VectorXd predicted = estimate_phases_batched(bundle.model, samples);
    // Errors count from the first sample past both warmups (window, buffer).
    const Eigen::Index first_sample =
        options.buffer ? std::max(*options.buffer, window) - 1 : window - 1;
    const Eigen::Index skip = first_sample - (window - 1);
    double err_sum = 0.0;
    Eigen::Index counted = 0;
    for (Eigen::Index k = skip; k < predicted.size(); ++k) {
      err_sum += circular_error(item.labels.values[window - 1 + k], predicted[k]);
      ++counted;
    }
    if (counted == 0) throw TooShort("evaluate: trajectory shorter than the warmup");
    entries[static_cast<std::size_t>(i)] = {item.id, err_sum / static_cast<double>(counted)};
    estimates[static_cast<std::size_t>(i)] = predicted;
  });

  const ErrorReport report = ErrorReport::from_entries(std::move(entries));
  const std::string suffix = options.tag.empty() ? "" : "_" + options.tag;
  const std::string report_path = (out / ("eval_report" + suffix + ".json")).string();
  write_error_report(report_path, report);

  std::vector<std::string> artifacts{report_path};
  if (options.write_trace) {
    const LoadedTrajectory& item = loaded.front();
    const Eigen::VectorXd& predicted = estimates.front();
    std::string csv = "t,theta_true,theta_est,delta_theta\n";
    for (Eigen::Index k = 0; k < predicted.size(); ++k) {
      const Eigen::Index sample = window - 1 + k;
      csv += format_double(item.traj.t[sample]) + ',' +
             format_double(item.labels.values[sample]) + ',' + format_double(predicted[k]) + ',' +
             format_double(circular_error(item.labels.values[sample], predicted[k])) + '\n';
    }
    const std::string trace_path = (out / ("eval_trace" + suffix + ".csv")).string();
    write_text_file(trace_path, csv);
    artifacts.push_back(trace_path);
  }
  write_run_manifest(config, "evaluate", artifacts, timer.seconds(), options.tag);
  return report;
}

void save_qnetwork(const std::string& path, const QNetwork& net, const nlohmann::json& meta) {
  nlohmann::json full_meta = meta;
  full_meta["kind"] = "dqn-qnetwork";
  nn::save_weights(path,
                   {{"layer1.w", net.layer1.w},
                    {"layer1.b", net.layer1.b},
                    {"layer2.w", net.layer2.w},
                    {"layer2.b", net.layer2.b},
                    {"output.w", net.output.w},
                    {"output.b", net.output.b}},
                   full_meta);
}

QNetwork load_qnetwork(const std::string& path) {
  nn::LoadedWeights loaded = nn::load_weights(path);
  if (loaded.meta.value("kind", "") != "dqn-qnetwork") {
    throw InvalidConfig("'" + path + "' is not a Q-network weights file");
  }
  QNetwork net;
  net.layer1.w = loaded.layers.at("layer1.w");
  net.layer1.b = loaded.layers.at("layer1.b");
  net.layer2.w = loaded.layers.at("layer2.w");
  net.layer2.b = loaded.layers.at("layer2.b");
  net.output.w = loaded.layers.at("output.w");
  net.output.b = loaded.layers.at("output.b");
  return net;
}

RlTrainResult cmd_rl_train(const ExperimentConfig& config) {
  StageTimer timer;
  const fs::path out(config.out_dir);
  fs::create_directories(out);

  KuramotoConfig kuramoto = apply_preset(config.kuramoto, config.preset);
  kuramoto.seed = derive_seed(config.seed, kRlTrainEnvTag);
  AgentConfig agent = config.agent;
  agent.seed = config.seed;

  RlTrainResult result;
  result.net = train_dqn(kuramoto, agent, &result.stats);

  result.weights_path = (out / "qweights.json").string();
  nlohmann::json meta;
  meta["preset"] = config.preset;
  meta["kuramoto"] = config.snapshot()["kuramoto"];
  meta["agent"] = config.snapshot()["agent"];
  save_qnetwork(result.weights_path, result.net, meta);

  std::string curve = "episode,mean_r\n";
  for (std::size_t e = 0; e < result.stats.episode_mean_r.size(); ++e) {
    curve += std::to_string(e + 1) + ',' + format_double(result.stats.episode_mean_r[e]) + '\n';
  }
  const std::string curve_path = (out / "reward_curve.csv").string();
  write_text_file(curve_path, curve);

  write_run_manifest(config, "rl_train", {result.weights_path, curve_path}, timer.seconds());
  return result;
}

ClosedLoopReport cmd_rl_eval(const ExperimentConfig& config, const std::string& q_weights_path,
                             const std::string& lstm_weights_path, const std::string& mode,
                             int trials) {
  StageTimer timer;
  const fs::path out(config.out_dir);
  fs::create_directories(out);

  const QNetwork net = load_qnetwork(q_weights_path);
  KuramotoConfig kuramoto = apply_preset(config.kuramoto, config.preset);
  kuramoto.seed = derive_seed(config.seed, kRlEvalEnvTag);
  AgentConfig agent = config.agent;
  agent.seed = config.seed;

  PhaseMode phase_mode;
  if (mode == "true") {
    phase_mode = PhaseMode::perfect_stub;
  } else if (mode == "estimated" || mode == "both") {
    phase_mode = PhaseMode::estimated_phase;
  } else {
    throw InvalidConfig("rl-eval: mode must be true, estimated, or both");
  }

  std::optional<EstimatorBundle> bundle;
  EstimatorArtifacts artifacts;
  if (phase_mode == PhaseMode::estimated_phase) {
    if (lstm_weights_path.empty()) {
      throw InvalidConfig("rl-eval: estimated mode needs estimator weights");
    }
    bundle = load_estimator(lstm_weights_path);
    artifacts.model = &bundle->model;
    artifacts.scaler = bundle->scaler;
    artifacts.calibration_buffer = config.eval_buffer;
    const Points reference = config.dataset.reference_csv.empty()
                                 ? reference_exemplar()
                                 : Points(read_trajectory_csv(config.dataset.reference_csv).pos);
    artifacts.synth = fit_synth_params(reference, config.eval_noise_sigma, 0);
  }

  const ClosedLoopReport report = closed_loop_eval(
      net, kuramoto, agent, trials, bundle ? &artifacts : nullptr, phase_mode);

  // Numbers.
  nlohmann::json doc;
  doc["mode"] = mode;
  doc["trials"] = trials;
  nlohmann::json per_trial = nlohmann::json::array();
  for (const ClosedLoopTrial& trial : report.trials) {
    per_trial.push_back({{"mean_r_true", trial.mean_r_true},
                         {"mean_r_est", trial.mean_r_est},
                         {"phase_error", trial.per_osc_error.mean()}});
  }
  doc["per_trial"] = std::move(per_trial);
  doc["r_true"] = {{"mean", report.mean_r_true_avg}, {"std", report.mean_r_true_std}};
  doc["r_est"] = {{"mean", report.mean_r_est_avg}, {"std", report.mean_r_est_std}};
  doc["ttest"] = {{"t", report.ttest.t}, {"p", report.ttest.p}, {"dof", report.ttest.dof}};
  doc["phase_error"] = {{"mean", report.phase_error_avg}, {"std", report.phase_error_std}};
  const std::string report_path = (out / "rl_eval_report.json").string();
  write_json_file(report_path, doc);
  std::vector<std::string> artifact_paths{report_path};

  // Plot-ready traces from the last trial.
  {
    std::string csv = "t,r_true,r_est,diff\n";
    for (Eigen::Index k = 0; k < report.trace_true.t.size(); ++k) {
      csv += format_double(report.trace_true.t[k]) + ',' + format_double(report.trace_true.r[k]) +
             ',' + format_double(report.trace_est.r[k]) + ',' +
             format_double(report.trace_true.r[k] - report.trace_est.r[k]) + '\n';
    }
    const std::string path = (out / "rl_eval_r.csv").string();
    write_text_file(path, csv);
    artifact_paths.push_back(path);
  }
  {
    std::string csv = "t,omega_true,omega_est\n";
    for (Eigen::Index k = 1; k < report.trace_true.t.size(); ++k) {
      csv += format_double(report.trace_true.t[k]) + ',' +
             format_double(report.trace_true.control[k]) + ',' +
             format_double(report.trace_est.control[k]) + '\n';
    }
    const std::string path = (out / "rl_eval_control.csv").string();
    write_text_file(path, csv);
    artifact_paths.push_back(path);
  }
  if (phase_mode == PhaseMode::estimated_phase) {
    {
      std::string csv = "t";
      for (Eigen::Index i = 0; i < report.est_error_trace.cols(); ++i) {
        csv += ",err_" + std::to_string(i);
      }
      csv += '\n';
      for (Eigen::Index k = 0; k < report.est_error_trace.rows(); ++k) {
        csv += format_double(report.trace_true.t[k]);
        for (Eigen::Index i = 0; i < report.est_error_trace.cols(); ++i) {
          csv += ',' + format_double(report.est_error_trace(k, i));
        }
        csv += '\n';
      }
      const std::string path = (out / "rl_eval_errors.csv").string();
      write_text_file(path, csv);
      artifact_paths.push_back(path);
    }
    {
      std::string csv = "t";
      for (Eigen::Index i = 0; i < report.est_phase_trace.cols(); ++i) {
        csv += ",theta_hat_" + std::to_string(i);
      }
      csv += '\n';
      for (Eigen::Index k = 0; k < report.est_phase_trace.rows(); ++k) {
        csv += format_double(report.trace_true.t[k]);
        for (Eigen::Index i = 0; i < report.est_phase_trace.cols(); ++i) {
          csv += ',' + format_double(report.est_phase_trace(k, i));
        }
        csv += '\n';
      }
      const std::string path = (out / "rl_eval_est_phases.csv").string();
      write_text_file(path, csv);
      artifact_paths.push_back(path);
    }
    {
      std::string csv = "t,x,y,z\n";
      for (Eigen::Index k = 0; k < report.synthesized_example.rows(); ++k) {
        csv += format_double(report.trace_true.t[k]) + ',' +
               format_double(report.synthesized_example(k, 0)) + ',' +
               format_double(report.synthesized_example(k, 1)) + ',' +
               format_double(report.synthesized_example(k, 2)) + '\n';
      }
      const std::string path = (out / "rl_eval_synth.csv").string();
      write_text_file(path, csv);
      artifact_paths.push_back(path);
    }
  }
  write_run_manifest(config, "rl_eval", artifact_paths, timer.seconds());
  return report;
}

void cmd_report(const ExperimentConfig& config) {
  StageTimer timer;
  const fs::path out(config.out_dir);
  const fs::path report_dir = out / "report";

  const auto copy_artifact = [&](const fs::path& src, const fs::path& dst) {
    std::ifstream in(src, std::ios::binary);
    if (!in) throw MissingArtifacts("report: missing artifact '" + src.string() + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    write_text_file(dst.string(), data);
  };

  const bool has_eval = fs::exists(out / "run_evaluate.json");
  const bool has_rl = fs::exists(out / "run_rl_eval.json");
  if (!has_eval && !has_rl) {
    throw MissingArtifacts("report: no completed runs in '" + out.string() + "'");
  }
  fs::create_directories(report_dir);

  nlohmann::json summary;
  summary["stages"] = nlohmann::json::array();

  if (has_eval) {
    summary["stages"].push_back("evaluate");
    copy_artifact(out / "eval_trace.csv", report_dir / "fig_phase_trace.csv");
    const nlohmann::json eval_report = read_json_file((out / "eval_report.json").string());
    summary["estimator_error"] = eval_report["aggregate"];
  }
  if (has_rl) {
    summary["stages"].push_back("rl_eval");
    const nlohmann::json rl_report = read_json_file((out / "rl_eval_report.json").string());
    copy_artifact(out / "rl_eval_r.csv", report_dir / "fig_r_diff.csv");
    copy_artifact(out / "rl_eval_control.csv", report_dir / "fig_control.csv");
    if (rl_report.value("mode", "") != "true") {
      copy_artifact(out / "rl_eval_errors.csv", report_dir / "fig_osc_errors.csv");
      copy_artifact(out / "rl_eval_synth.csv", report_dir / "fig_reconstructed.csv");
    }
    nlohmann::json comparison;
    comparison["r_true"] = rl_report["r_true"];
    comparison["r_est"] = rl_report["r_est"];
    comparison["ttest"] = rl_report["ttest"];
    comparison["phase_error"] = rl_report["phase_error"];
    comparison["trials"] = rl_report["trials"];
    write_json_file((report_dir / "comparison.json").string(), comparison);
    summary["closed_loop"] = std::move(comparison);
  }

  write_json_file((report_dir / "report.json").string(), summary);
  write_run_manifest(config, "report", {(report_dir / "report.json").string()}, timer.seconds());
}

}  // namespace oscphase
