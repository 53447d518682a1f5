// Command-line front end: dataset synthesis, calibration, labeling, training,
// online evaluation, Kuramoto simulation, RL training and the closed-loop
// comparison. See README.md for the config schema.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "oscphase/calibration.hpp"
#include "oscphase/hilbert.hpp"
#include "oscphase/io.hpp"
#include "oscphase/pipeline.hpp"

namespace {

using namespace oscphase;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const InvalidConfig*>(&e) || dynamic_cast<const InvalidInput*>(&e)) return 2;
  if (dynamic_cast<const ShapeMismatch*>(&e)) return 3;
  if (dynamic_cast<const DegenerateAxis*>(&e) || dynamic_cast<const DegenerateTrajectory*>(&e) ||
      dynamic_cast<const DegenerateSignal*>(&e) || dynamic_cast<const DegeneratePhase*>(&e) ||
      dynamic_cast<const DegenerateReference*>(&e)) {
    return 4;
  }
  if (dynamic_cast<const TooShort*>(&e)) return 5;
  if (dynamic_cast<const IoError*>(&e)) return 6;
  if (dynamic_cast<const InvalidManifest*>(&e) || dynamic_cast<const MissingArtifacts*>(&e)) return 7;
  return 1;
}

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> threads;
};

ExperimentConfig resolve_config(const GlobalOptions& options) {
  ExperimentConfig config;
  if (!options.config_path.empty()) {
    config = ExperimentConfig::from_values(read_config_file(options.config_path));
  }
  if (options.seed) config.seed = *options.seed;
  if (!options.out_dir.empty()) config.out_dir = options.out_dir;
  if (options.threads) config.threads = *options.threads;
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"oscphase: online phase estimation for 3D oscillatory motion"};
  app.require_subcommand(1);

  GlobalOptions global;
  app.add_option("--config", global.config_path, "Config file (flat key = value)");
  std::uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "Global seed");
  app.add_option("--out", global.out_dir, "Output directory");
  int threads_value = 0;
  auto* threads_opt = app.add_option("--threads", threads_value, "Worker threads");

  // gen
  auto* gen = app.add_subcommand("gen", "Generate the synthetic dataset and phase labels");
  int gen_count = -1;
  gen->add_option("--count", gen_count, "Total trajectory count (default 288)");

  // calibrate
  auto* calib = app.add_subcommand("calibrate", "Center and axis-align a trajectory CSV");
  std::string calib_in, calib_out, calib_transform;
  Eigen::Index calib_buffer = 0;
  calib->add_option("input", calib_in, "Input trajectory CSV")->required();
  calib->add_option("output", calib_out, "Output trajectory CSV")->required();
  calib->add_option("--transform", calib_transform, "Write the fitted transform JSON here");
  calib->add_option("--buffer", calib_buffer, "Streaming mode: fit on the first N samples");

  // label
  auto* label = app.add_subcommand("label", "Compute offline phase labels");
  std::string label_in, label_out, label_manifest;
  label->add_option("input", label_in, "Trajectory CSV (omit with --manifest)");
  label->add_option("output", label_out, "Output phase CSV");
  label->add_option("--manifest", label_manifest, "Label every trajectory in a manifest");

  // train
  auto* train = app.add_subcommand("train", "Train the windowed phase estimator");
  std::string train_manifest;
  train->add_option("--manifest", train_manifest, "Dataset manifest JSON")->required();

  // infer
  auto* infer = app.add_subcommand("infer", "Estimate phases for a trajectory CSV");
  std::string infer_weights, infer_in, infer_out;
  bool infer_online = false;
  bool infer_no_calibrate = false;
  Eigen::Index infer_buffer = 0;
  infer->add_option("--weights", infer_weights, "Estimator weights JSON")->required();
  infer->add_option("input", infer_in, "Trajectory CSV")->required();
  infer->add_option("output", infer_out, "Output phase CSV")->required();
  infer->add_flag("--online", infer_online, "Stream sample by sample");
  infer->add_flag("--no-calibrate", infer_no_calibrate, "Input is already calibrated");
  infer->add_option("--buffer", infer_buffer, "Streaming calibration buffer (samples)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Online evaluation against labels");
  std::string eval_weights, eval_manifest, eval_split = "test", eval_tag;
  Eigen::Index eval_buffer = 0;
  evaluate->add_option("--weights", eval_weights, "Estimator weights JSON")->required();
  evaluate->add_option("--manifest", eval_manifest, "Dataset manifest JSON")->required();
  evaluate->add_option("--split", eval_split, "Split to evaluate (train|val|test)");
  evaluate->add_option("--buffer", eval_buffer, "Streaming calibration buffer (samples)");
  evaluate->add_option("--tag", eval_tag, "Suffix for the output files");

  // synth
  auto* synth = app.add_subcommand("synth", "Map a phase CSV to a 3D trajectory");
  std::string synth_phases, synth_out, synth_reference;
  double synth_sigma = 0.1;
  std::uint64_t synth_seed = 0;
  synth->add_option("phases", synth_phases, "Phase CSV (t,theta)")->required();
  synth->add_option("output", synth_out, "Output trajectory CSV")->required();
  synth->add_option("--reference", synth_reference, "Reference trajectory CSV for the map");
  synth->add_option("--sigma", synth_sigma, "Noise standard deviation (meters)");
  synth->add_option("--synth-seed", synth_seed, "Noise seed");

  // sim
  auto* sim = app.add_subcommand("sim", "Run an uncontrolled Kuramoto simulation");
  std::string sim_out;
  sim->add_option("output", sim_out, "Output trace CSV")->required();

  // rl-train
  auto* rl_train = app.add_subcommand("rl-train", "Train the DQN controller (true phases)");

  // rl-eval
  auto* rl_eval = app.add_subcommand("rl-eval", "Closed-loop comparison: true vs estimated phase");
  std::string rle_q, rle_lstm, rle_mode = "both";
  int rle_trials = 5;
  rl_eval->add_option("--q-weights", rle_q, "Q-network weights JSON")->required();
  rl_eval->add_option("--weights", rle_lstm, "Estimator weights JSON");
  rl_eval->add_option("--mode", rle_mode, "true | estimated | both");
  rl_eval->add_option("--trials", rle_trials, "Number of paired trials");

  // report
  auto* report = app.add_subcommand("report", "Consolidate run artifacts into plot-ready files");

  // Global flags may appear after the subcommand name.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);
  if (*seed_opt) global.seed = seed_value;
  if (*threads_opt) global.threads = threads_value;

  try {
    ExperimentConfig config = resolve_config(global);

    if (gen->parsed()) {
      if (gen_count > 0) config.dataset.total_trajectories = gen_count;
      const GenResult result = cmd_gen_dataset(config);
      std::cout << "wrote " << result.manifest.entries.size() << " trajectories to "
                << config.out_dir << "\n";
    } else if (calib->parsed()) {
      const Trajectory traj = read_trajectory_csv(calib_in);
      CalibrationTransform transform;
      Points aligned;
      if (calib_buffer > 0) {
        std::tie(aligned, transform) = streaming_calibrate_all(traj.pos, calib_buffer);
      } else {
        std::tie(aligned, transform) = calibrate(traj.pos);
      }
      Trajectory out_traj = traj;
      out_traj.pos = aligned;
      write_trajectory_csv(calib_out, out_traj);
      if (!calib_transform.empty()) {
        nlohmann::json doc;
        doc["mean"] = {transform.mean_offset.x(), transform.mean_offset.y(),
                       transform.mean_offset.z()};
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < 3; ++r) {
          rows.push_back({transform.rotation(r, 0), transform.rotation(r, 1),
                          transform.rotation(r, 2)});
        }
        doc["rotation_row_major"] = std::move(rows);
        write_json_file(calib_transform, doc);
      }
      std::cout << "calibrated " << calib_in << " -> " << calib_out << "\n";
    } else if (label->parsed()) {
      if (!label_manifest.empty()) {
        const Manifest manifest = read_manifest(label_manifest);
        for (const ManifestEntry& entry : manifest.entries) {
          const Trajectory traj = read_trajectory_csv(entry.traj_path, entry.id);
          const auto [calibrated, transform] = calibrate(traj.pos);
          (void)transform;
          const PhaseSeries labels = phase_labels(calibrated);
          write_phase_csv(entry.label_path, traj.t, labels.values);
        }
        std::cout << "labeled " << manifest.entries.size() << " trajectories\n";
      } else {
        if (label_in.empty() || label_out.empty()) {
          throw InvalidInput("label: need input and output paths (or --manifest)");
        }
        const Trajectory traj = read_trajectory_csv(label_in);
        const auto [calibrated, transform] = calibrate(traj.pos);
        (void)transform;
        const PhaseSeries labels = phase_labels(calibrated);
        write_phase_csv(label_out, traj.t, labels.values);
        std::cout << "labeled " << label_in << " -> " << label_out << "\n";
      }
    } else if (train->parsed()) {
      const TrainResult result = cmd_train(config, train_manifest);
      std::cout << "trained estimator -> " << result.weights_path << "\n";
      if (!result.history.epochs.empty()) {
        std::cout << "final epoch: train_loss=" << result.history.epochs.back().train_loss
                  << " val_error=" << result.history.epochs.back().val_error << " rad\n";
      }
    } else if (infer->parsed()) {
      const EstimatorBundle bundle = load_estimator(infer_weights);
      const Trajectory traj = read_trajectory_csv(infer_in);
      std::optional<Eigen::Index> buffer;
      if (infer_buffer > 0) buffer = infer_buffer;

      Points stream;
      if (infer_no_calibrate) {
        stream = traj.pos;
      } else if (buffer) {
        stream = traj.pos;  // calibration happens inside the online estimator
      } else {
        stream = calibrate(traj.pos).first;
      }

      std::vector<double> ts;
      std::vector<double> phases;
      if (infer_online || buffer) {
        OnlineEstimator online(bundle.model, bundle.scaler, traj.rate, buffer);
        for (Eigen::Index i = 0; i < stream.rows(); ++i) {
          if (const auto phase = online.push(stream.row(i).transpose())) {
            ts.push_back(traj.t[i]);
            phases.push_back(*phase);
          }
        }
      } else {
        PhaseSeries dummy;
        dummy.values = Eigen::VectorXd::Zero(stream.rows());
        const auto samples =
            make_windows(stream, dummy, bundle.scaler, bundle.model.config, traj.rate);
        const Eigen::VectorXd predicted = estimate_phases_batched(bundle.model, samples);
        for (Eigen::Index k = 0; k < predicted.size(); ++k) {
          ts.push_back(traj.t[bundle.model.config.window - 1 + k]);
          phases.push_back(predicted[k]);
        }
      }
      const Eigen::Map<Eigen::VectorXd> t_map(ts.data(), static_cast<Eigen::Index>(ts.size()));
      const Eigen::Map<Eigen::VectorXd> phase_map(phases.data(),
                                                  static_cast<Eigen::Index>(phases.size()));
      write_phase_csv(infer_out, t_map, phase_map);
      std::cout << "wrote " << phases.size() << " phase estimates to " << infer_out << "\n";
    } else if (evaluate->parsed()) {
      EvaluateOptions options;
      options.split = eval_split;
      options.tag = eval_tag;
      if (eval_buffer > 0) options.buffer = eval_buffer;
      const ErrorReport result = cmd_evaluate(config, eval_weights, eval_manifest, options);
      std::cout << "split=" << eval_split << " mean_error=" << result.aggregate_mean
                << " rad (std " << result.aggregate_std << ", n="
                << result.per_trajectory.size() << ")\n";
    } else if (synth->parsed()) {
      const auto [t, theta] = read_phase_csv(synth_phases);
      if (t.size() < 2) throw TooShort("synth: need at least 2 phase samples");
      const Points reference = synth_reference.empty()
                                   ? reference_exemplar()
                                   : Points(read_trajectory_csv(synth_reference).pos);
      const MotionSynthParams params = fit_synth_params(reference, synth_sigma, synth_seed);
      Rng rng(synth_seed);
      const double rate = 1.0 / (t[1] - t[0]);
      const Trajectory traj = synthesize_trajectory(theta, params, rate, "synth", rng);
      write_trajectory_csv(synth_out, traj);
      std::cout << "synthesized " << traj.size() << " samples -> " << synth_out << "\n";
    } else if (sim->parsed()) {
      KuramotoConfig kuramoto = apply_preset(config.kuramoto, config.preset);
      kuramoto.seed = config.seed;
      const auto [trace, metrics] = run(kuramoto);
      write_sim_trace_csv(sim_out, trace);
      std::cout << "mean order parameter <r> = " << metrics.mean_r << "\n";
    } else if (rl_train->parsed()) {
      const RlTrainResult result = cmd_rl_train(config);
      std::cout << "trained DQN -> " << result.weights_path << "\n";
      if (!result.stats.episode_mean_r.empty()) {
        std::cout << "last-episode mean r = " << result.stats.episode_mean_r.back() << "\n";
      }
    } else if (rl_eval->parsed()) {
      const ClosedLoopReport result = cmd_rl_eval(config, rle_q, rle_lstm, rle_mode, rle_trials);
      std::cout << "<r> true = " << result.mean_r_true_avg << " +/- " << result.mean_r_true_std
                << ", est = " << result.mean_r_est_avg << " +/- " << result.mean_r_est_std
                << ", p = " << result.ttest.p << ", phase error = " << result.phase_error_avg
                << " rad\n";
    } else if (report->parsed()) {
      cmd_report(config);
      std::cout << "report written to " << config.out_dir << "/report\n";
    }
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  }
}
