#pragma once

#include <chrono>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bwpred/control.hpp"
#include "bwpred/eval.hpp"
#include "bwpred/manifest.hpp"
#include "bwpred/plot.hpp"

namespace bwpred {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cli_detail {

inline nlohmann::json load_config(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  try {
    return nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
}

inline Topology topology_from(const std::string& path) {
  return path.empty() ? default_topology() : load_topology_file(path);
}

inline TrafficParams profile_from(const std::string& name) {
  if (name == "paper") return paper_profile();
  if (name == "congested") return congested_profile();
  if (!std::filesystem::exists(name))
    throw UsageError("unknown traffic profile '" + name +
                     "' (expected paper, congested, or a JSON file)");
  return traffic_params_from_json(nlohmann::json::parse(read_file(name)));
}

inline TelemetryNoise noise_from(const nlohmann::json& cfg) {
  TelemetryNoise n;
  if (cfg.contains("noise")) {
    const auto& j = cfg["noise"];
    n.cpu = j.value("cpu", n.cpu);
    n.mem = j.value("mem", n.mem);
    n.rate = j.value("rate", n.rate);
    n.misc = j.value("misc", n.misc);
  }
  return n;
}

inline TrainConfig train_config_from(const nlohmann::json& cfg) {
  TrainConfig t;
  if (cfg.contains("train")) {
    const auto& j = cfg["train"];
    t.batch = j.value("batch", t.batch);
    t.epochs = j.value("epochs", t.epochs);
    t.adam.lr = j.value("lr", t.adam.lr);
    t.lstm_window = j.value("lstm_window", t.lstm_window);
    t.lstm_stride = j.value("lstm_stride", t.lstm_stride);
    t.clip_norm = j.value("clip_norm", t.clip_norm);
  }
  return t;
}

inline PolicyConfig policy_config_from(const nlohmann::json& cfg) {
  PolicyConfig p;
  if (cfg.contains("policy")) {
    const auto& j = cfg["policy"];
    p.block_threshold = j.value("block_threshold", p.block_threshold);
    p.balance_threshold = j.value("balance_threshold", p.balance_threshold);
    p.release_margin = j.value("release_margin", p.release_margin);
    p.release_ticks = j.value("release_ticks", p.release_ticks);
  }
  return p;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t pos = s.find(',', start);
    if (pos == std::string::npos) {
      if (start < s.size()) out.push_back(s.substr(start));
      break;
    }
    if (pos > start) out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

struct DatasetDir {
  std::vector<InterfaceDataset> datasets;
};

inline DatasetDir load_datasets(const std::string& dir, const std::vector<std::string>& only) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw UsageError("not a dataset directory: " + dir);
  std::vector<std::string> ids;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::string name = e.path().filename().string();
    if (name.size() > 4 && name.ends_with(".csv") && !name.ends_with(".meta.json"))
      ids.push_back(name.substr(0, name.size() - 4));
  }
  std::sort(ids.begin(), ids.end());
  if (!only.empty()) {
    std::vector<std::string> keep;
    for (const std::string& want : only) {
      if (std::find(ids.begin(), ids.end(), want) == ids.end())
        throw UsageError("no dataset for interface " + want + " in " + dir);
      keep.push_back(want);
    }
    ids = keep;
  }
  DatasetDir out;
  for (const std::string& id : ids) {
    fs::path csv = fs::path(dir) / (id + ".csv");
    fs::path meta = fs::path(dir) / (id + ".meta.json");
    out.datasets.push_back(read_dataset(csv.string(), meta.string()));
  }
  if (out.datasets.empty()) throw UsageError("no datasets found in " + dir);
  return out;
}

inline std::int64_t elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                               start)
      .count();
}

}  // namespace cli_detail

/// Runs one CLI invocation; argv excludes the program name.
/// Exit codes: 0 success, 1 validation/usage error, 2 runtime failure.
inline int run_cli(std::vector<std::string> args) {
  using namespace cli_detail;
  CLI::App app{"bandwidth utilization prediction workbench"};
  app.require_subcommand(1);

  std::string config_path, topology_path, out_dir, data_dir;
  std::uint64_t seed = 1;
  double interval_secs = 3.0;
  int offset = 5;
  std::string interfaces_csv;

  auto add_shared = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--seed", seed, "master random seed")->capture_default_str();
    sub->add_option("--config", config_path, "JSON config overriding defaults");
    if (with_out) sub->add_option("--out", out_dir, "output directory")->required();
  };

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "run the traffic simulation, write telemetry");
  std::string profile = "congested";
  double hours = 4.5;
  sim_cmd->add_option("--profile", profile, "paper | congested | <file.json>")
      ->capture_default_str();
  sim_cmd->add_option("--hours", hours, "simulated hours")->capture_default_str();
  sim_cmd->add_option("--interval-secs", interval_secs, "sampling interval")
      ->capture_default_str();
  sim_cmd->add_option("--topology", topology_path, "topology JSON (default: bundled)");
  sim_cmd->add_option("--interfaces", interfaces_csv, "comma list of interfaces to monitor");
  add_shared(sim_cmd, true);

  // featurize
  auto* feat_cmd = app.add_subcommand("featurize", "telemetry directory -> labeled datasets");
  feat_cmd->add_option("--data", data_dir, "telemetry directory from simulate")->required();
  feat_cmd->add_option("--offset", offset, "label shift in samples")
      ->check(CLI::Range(1, 40))
      ->capture_default_str();
  feat_cmd->add_option("--interval-secs", interval_secs, "sampling interval")
      ->capture_default_str();
  feat_cmd->add_option("--topology", topology_path, "topology JSON (default: bundled)");
  add_shared(feat_cmd, true);

  // train
  auto* train_cmd = app.add_subcommand("train", "train one model on a dataset directory");
  std::string model_arg = "lstm";
  int epochs_flag = -1, batch_flag = -1, window_flag = -1, stride_flag = -1;
  train_cmd->add_option("--model", model_arg, "arima | mlp | lstm")->capture_default_str();
  train_cmd->add_option("--data", data_dir, "dataset directory from featurize")->required();
  train_cmd->add_option("--epochs", epochs_flag, "training epochs (default 10)");
  train_cmd->add_option("--batch", batch_flag, "batch size (default 128)");
  train_cmd->add_option("--lstm-window", window_flag, "LSTM window length (default 10)");
  train_cmd->add_option("--lstm-stride", stride_flag, "LSTM window stride (default 10)");
  train_cmd->add_option("--interfaces", interfaces_csv, "train on a subset of interfaces");
  add_shared(train_cmd, true);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "k-fold cross-validation scores");
  std::string eval_model = "all";
  eval_cmd->add_option("--model", eval_model, "arima | mlp | lstm | all")->capture_default_str();
  eval_cmd->add_option("--data", data_dir, "dataset directory from featurize")->required();
  eval_cmd->add_option("--epochs", epochs_flag, "training epochs (default 10)");
  eval_cmd->add_option("--batch", batch_flag, "batch size (default 128)");
  eval_cmd->add_option("--lstm-window", window_flag, "LSTM window length (default 10)");
  eval_cmd->add_option("--lstm-stride", stride_flag, "LSTM window stride (default 10)");
  eval_cmd->add_option("--interfaces", interfaces_csv, "evaluate on a subset of interfaces");
  eval_cmd->add_option("--seed", seed, "master random seed")->capture_default_str();
  eval_cmd->add_option("--config", config_path, "JSON config overriding defaults");
  eval_cmd->add_option("--out", out_dir, "directory for report.csv (optional)");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "emit a prediction-vs-actual trace");
  std::string ckpt_path, dataset_csv;
  bool svg = false;
  pred_cmd->add_option("--checkpoint", ckpt_path, "model checkpoint")->required();
  pred_cmd->add_option("--data", dataset_csv, "one interface dataset CSV")->required();
  pred_cmd->add_flag("--svg", svg, "also render the trace as SVG");
  add_shared(pred_cmd, true);

  // control
  auto* ctl_cmd = app.add_subcommand("control", "closed-loop reaction simulation");
  std::string policy_arg = "block";
  double block_thr = -1, balance_thr = -1, release_margin = -1;
  int release_ticks = -1;
  ctl_cmd->add_option("--policy", policy_arg, "none | block | balance")->capture_default_str();
  ctl_cmd->add_option("--checkpoint", ckpt_path, "trained model checkpoint");
  ctl_cmd->add_option("--profile", profile, "paper | congested | <file.json>")
      ->capture_default_str();
  ctl_cmd->add_option("--hours", hours, "simulated hours")->capture_default_str();
  ctl_cmd->add_option("--interval-secs", interval_secs, "sampling interval")
      ->capture_default_str();
  ctl_cmd->add_option("--offset", offset, "prediction offset in samples")
      ->check(CLI::Range(1, 40))
      ->capture_default_str();
  ctl_cmd->add_option("--topology", topology_path, "topology JSON (default: bundled)");
  ctl_cmd->add_option("--interfaces", interfaces_csv, "comma list of interfaces to monitor");
  ctl_cmd->add_option("--block-threshold", block_thr, "engage blocking above this prediction");
  ctl_cmd->add_option("--balance-threshold", balance_thr, "engage balancing above this");
  ctl_cmd->add_option("--release-margin", release_margin, "release below threshold - margin");
  ctl_cmd->add_option("--release-ticks", release_ticks, "ticks below margin before release");
  add_shared(ctl_cmd, true);

  // plot-trace
  auto* plot_cmd = app.add_subcommand("plot-trace", "render a trace CSV as SVG");
  std::string trace_path;
  plot_cmd->add_option("--trace", trace_path, "trace CSV from predict")->required();
  plot_cmd->add_option("--out", out_dir, "output SVG path")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "run with --help for usage\n";
    return 1;
  }

  auto started = std::chrono::steady_clock::now();
  try {
    nlohmann::json cfg = load_config(config_path);
    std::int64_t epoch_base = cfg.value("epoch_base", std::int64_t(1500000000));
    TelemetryNoise noise = noise_from(cfg);
    TrainConfig tcfg = train_config_from(cfg);
    tcfg.seed = seed;
    if (epochs_flag > 0) tcfg.epochs = epochs_flag;
    if (batch_flag > 0) tcfg.batch = batch_flag;
    if (window_flag > 0) tcfg.lstm_window = window_flag;
    if (stride_flag > 0) tcfg.lstm_stride = stride_flag;
    std::vector<std::string> iface_list = split_list(interfaces_csv);

    if (sim_cmd->parsed()) {
      Topology topo = topology_from(topology_path);
      TrafficParams traffic = profile_from(profile);
      SimConfig sc;
      sc.duration_s = hours * 3600.0;
      sc.sample_interval_s = interval_secs;
      sc.epoch_base = epoch_base;
      sc.monitored = iface_list;
      Simulator sim(topo, traffic, seed, sc);
      TelemetryWriter writer(out_dir, seed, noise);
      sim.run([&](Simulator& s, std::int64_t tick, double t) { writer.on_tick(s, tick, t); });

      RunManifest m;
      m.command = "simulate";
      m.argv = args;
      m.seed = seed;
      m.config = {{"profile", traffic_params_to_json(traffic)},
                  {"hours", hours},
                  {"interval_secs", interval_secs},
                  {"epoch_base", epoch_base},
                  {"interfaces", iface_list},
                  {"topology", topology_path.empty() ? "builtin" : topology_path}};
      for (const Interface& it : sim.interfaces()) m.outputs.push_back(it.id);
      m.wall_ms = elapsed_ms(started);
      write_manifest(out_dir, m);
      std::cout << "simulated " << hours << " h on " << sim.interfaces().size()
                << " interfaces: " << sim.stats().flows_started << " flows started, "
                << sim.stats().flows_ended << " ended\n";
      return 0;
    }

    if (feat_cmd->parsed()) {
      Topology topo = topology_from(topology_path);
      namespace fs = std::filesystem;
      if (!fs::is_directory(data_dir)) throw UsageError("not a telemetry directory: " + data_dir);
      std::vector<std::string> ids;
      for (const auto& e : fs::directory_iterator(data_dir))
        if (e.is_directory() && fs::exists(e.path() / "system.csv"))
          ids.push_back(e.path().filename().string());
      std::sort(ids.begin(), ids.end());
      if (ids.empty()) throw UsageError("no interface telemetry under " + data_dir);

      fs::create_directories(out_dir);
      JoinReport total;
      RunManifest m;
      for (const std::string& id : ids) {
        JoinReport jr;
        std::vector<InterfaceSample> samples = read_interface_samples(
            (fs::path(data_dir) / id).string(), capacity_of_interface(topo, id), jr);
        InterfaceDataset ds = label_and_shift(id, samples, offset, interval_secs);
        write_dataset(ds, (fs::path(out_dir) / (id + ".csv")).string(),
                      (fs::path(out_dir) / (id + ".meta.json")).string());
        total.joined += jr.joined;
        total.dropped += jr.dropped;
        m.outputs.push_back(id + ".csv");
        std::cout << id << ": " << ds.rows() << " rows\n";
      }
      std::cout << "joined " << total.joined << " ticks, dropped " << total.dropped << "\n";
      m.command = "featurize";
      m.argv = args;
      m.seed = seed;
      m.config = {{"offset", offset},
                  {"interval_secs", interval_secs},
                  {"schema_hash", dataset_schema_hash()}};
      m.wall_ms = elapsed_ms(started);
      write_manifest(out_dir, m);
      return 0;
    }

    if (train_cmd->parsed()) {
      DatasetDir dd = load_datasets(data_dir, iface_list);
      std::vector<const InterfaceDataset*> all;
      for (const InterfaceDataset& ds : dd.datasets) all.push_back(&ds);
      Scaler scaler = Scaler::fit(all);
      ModelKind kind = model_kind_from(model_arg);
      std::filesystem::create_directories(out_dir);
      std::string ckpt_file =
          (std::filesystem::path(out_dir) / ("model_" + model_arg + ".ckpt")).string();

      std::vector<double> curve;
      if (kind == ModelKind::Mlp) {
        std::vector<double> x, y;
        for (const InterfaceDataset* ds : all) {
          std::vector<double> xs = scaler.transform(ds->x);
          x.insert(x.end(), xs.begin(), xs.end());
          y.insert(y.end(), ds->y.begin(), ds->y.end());
        }
        MlpFit fit = fit_mlp(x, y, tcfg);
        curve = fit.epoch_mse;
        write_file(ckpt_file, checkpoint_from_mlp(fit.model, scaler));
      } else if (kind == ModelKind::Lstm) {
        std::vector<std::vector<double>> xs(all.size());
        std::vector<SeriesView> views;
        for (std::size_t i = 0; i < all.size(); ++i) {
          xs[i] = scaler.transform(all[i]->x);
          views.push_back({xs[i].data(), all[i]->y.data(), all[i]->rows()});
        }
        LstmFit fit = fit_lstm(views, tcfg);
        curve = fit.epoch_mse;
        write_file(ckpt_file, checkpoint_from_lstm(fit.model, scaler));
      } else {
        std::vector<double> series;
        for (const InterfaceDataset* ds : all) {
          std::vector<double> s = eval_detail::max_bitrate_series(*ds);
          series.insert(series.end(), s.begin(), s.end());
        }
        ArimaModel model = arima_fit(series);
        write_file(ckpt_file, checkpoint_from_arima(model, scaler));
        std::cout << "arima order (" << model.p << "," << model.d << "," << model.q << ")\n";
      }
      if (!curve.empty()) {
        std::cout << "epoch mse:";
        for (double v : curve) std::cout << ' ' << format_double(v);
        std::cout << "\n";
      }
      RunManifest m;
      m.command = "train";
      m.argv = args;
      m.seed = seed;
      m.config = {{"model", model_arg},
                  {"batch", tcfg.batch},
                  {"epochs", tcfg.epochs},
                  {"lr", tcfg.adam.lr},
                  {"lstm_window", tcfg.lstm_window},
                  {"lstm_stride", tcfg.lstm_stride},
                  {"interfaces", iface_list}};
      m.outputs.push_back(ckpt_file);
      m.wall_ms = elapsed_ms(started);
      write_manifest(out_dir, m);
      std::cout << "wrote " << ckpt_file << "\n";
      return 0;
    }

    if (eval_cmd->parsed()) {
      DatasetDir dd = load_datasets(data_dir, iface_list);
      std::vector<ModelKind> kinds;
      if (eval_model == "all")
        kinds = {ModelKind::Arima, ModelKind::Mlp, ModelKind::Lstm};
      else
        kinds = {model_kind_from(eval_model)};
      std::vector<MetricsReport> reports;
      for (ModelKind k : kinds) {
        MetricsReport rep = cross_validate(k, dd.datasets, tcfg, seed);
        print_report(rep);
        reports.push_back(std::move(rep));
      }
      print_summary_table(reports);
      if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        write_report_csv(reports,
                         (std::filesystem::path(out_dir) / "report.csv").string());
        RunManifest m;
        m.command = "evaluate";
        m.argv = args;
        m.seed = seed;
        m.config = {{"model", eval_model},
                    {"batch", tcfg.batch},
                    {"epochs", tcfg.epochs},
                    {"interfaces", iface_list}};
        m.outputs.push_back("report.csv");
        m.wall_ms = elapsed_ms(started);
        write_manifest(out_dir, m);
      }
      return 0;
    }

    if (pred_cmd->parsed()) {
      std::string meta = dataset_csv;
      if (meta.ends_with(".csv")) meta = meta.substr(0, meta.size() - 4);
      meta += ".meta.json";
      InterfaceDataset ds = read_dataset(dataset_csv, meta);
      Checkpoint ckpt = load_checkpoint(read_file(ckpt_path));

      std::vector<double> preds;
      if (ckpt.kind == "mlp") {
        MlpModel model = mlp_from_checkpoint(ckpt);
        std::vector<double> x = ckpt.scaler.transform(ds.x);
        preds = mlp_predict(model, x.data(), static_cast<int>(ds.rows()));
      } else if (ckpt.kind == "lstm") {
        LstmModel model = lstm_from_checkpoint(ckpt);
        std::vector<double> x = ckpt.scaler.transform(ds.x);
        preds = lstm_predict_series(model, x.data(), ds.rows());
      } else {
        ArimaModel model = arima_from_checkpoint(ckpt);
        ArimaWalk walk(model);
        for (std::size_t r = 0; r < ds.rows(); ++r) {
          walk.push(ds.row(r)[kInputFeatures - 1]);
          preds.push_back(std::clamp(walk.predict(ds.offset), 0.0, 1.0));
        }
      }
      std::filesystem::create_directories(out_dir);
      std::string trace_file =
          (std::filesystem::path(out_dir) / (ds.interface + ".trace.csv")).string();
      emit_trace(ds.timestamps, ds.y, preds, trace_file);
      Metrics metr = compute_metrics(preds, ds.y);
      std::cout << ds.interface << ": bias " << format_double(metr.bias) << "  mae "
                << format_double(metr.mae) << "  rmse " << format_double(metr.rmse) << "\n";
      RunManifest m;
      m.command = "predict";
      m.argv = args;
      m.seed = seed;
      m.config = {{"checkpoint", ckpt_path}, {"model", ckpt.kind}};
      m.outputs.push_back(trace_file);
      if (svg) {
        std::string svg_file =
            (std::filesystem::path(out_dir) / (ds.interface + ".trace.svg")).string();
        write_trace_svg(svg_file, ds.y, preds, ckpt.kind + " predictions on " + ds.interface);
        m.outputs.push_back(svg_file);
      }
      m.wall_ms = elapsed_ms(started);
      write_manifest(out_dir, m);
      return 0;
    }

    if (ctl_cmd->parsed()) {
      Topology topo = topology_from(topology_path);
      TrafficParams traffic = profile_from(profile);
      PolicyConfig pol = policy_config_from(cfg);
      pol.kind = policy_kind_from(policy_arg);
      if (block_thr > 0) pol.block_threshold = block_thr;
      if (balance_thr > 0) pol.balance_threshold = balance_thr;
      if (release_margin >= 0) pol.release_margin = release_margin;
      if (release_ticks > 0) pol.release_ticks = release_ticks;

      SimConfig sc;
      sc.duration_s = hours * 3600.0;
      sc.sample_interval_s = interval_secs;
      sc.epoch_base = epoch_base;
      sc.monitored = iface_list;

      std::optional<Checkpoint> ckpt;
      if (!ckpt_path.empty()) ckpt = load_checkpoint(read_file(ckpt_path));
      if (pol.kind != PolicyKind::None && !ckpt)
        throw UsageError("control with an active policy needs --checkpoint");

      ControlledRunReport run = run_control(topo, traffic, seed, sc,
                                            ckpt ? &*ckpt : nullptr, pol, offset, noise);
      std::filesystem::create_directories(out_dir);
      write_actions_csv(run, (std::filesystem::path(out_dir) / "actions.csv").string());
      write_control_report_csv(run,
                               (std::filesystem::path(out_dir) / "report.csv").string());

      RunManifest m;
      m.command = "control";
      m.argv = args;
      m.seed = seed;
      m.config = {{"policy", policy_arg},
                  {"block_threshold", pol.block_threshold},
                  {"balance_threshold", pol.balance_threshold},
                  {"release_margin", pol.release_margin},
                  {"release_ticks", pol.release_ticks},
                  {"hours", hours},
                  {"offset", offset},
                  {"profile", traffic_params_to_json(traffic)}};
      m.outputs = {"actions.csv", "report.csv"};

      if (pol.kind != PolicyKind::None) {
        PolicyConfig none = pol;
        none.kind = PolicyKind::None;
        ControlledRunReport base =
            run_control(topo, traffic, seed, sc, nullptr, none, offset, noise);
        write_control_report_csv(
            base, (std::filesystem::path(out_dir) / "baseline_report.csv").string());
        m.outputs.push_back("baseline_report.csv");
        bool prefix_ok = prefix_equal_until_first_action(run, base);
        double reduction =
            base.overload_ticks > 0
                ? 100.0 * (1.0 - static_cast<double>(run.overload_ticks) /
                                     static_cast<double>(base.overload_ticks))
                : 0.0;
        std::cout << "policy " << policy_arg << ": overload interface-ticks "
                  << run.overload_ticks << " vs baseline " << base.overload_ticks << " ("
                  << format_double(reduction) << "% reduction), dropped flows "
                  << run.dropped_flows << ", diverted " << run.diverted_flows
                  << ", prefix-equal until first action: " << (prefix_ok ? "yes" : "NO")
                  << "\n";
      } else {
        std::cout << "policy none: overload interface-ticks " << run.overload_ticks << " over "
                  << run.ticks << " ticks\n";
      }
      m.wall_ms = elapsed_ms(started);
      write_manifest(out_dir, m);
      return 0;
    }

    if (plot_cmd->parsed()) {
      CsvTable t = read_csv(trace_path);
      int ai = t.column("actual"), pi = t.column("predicted");
      std::vector<double> actual, predicted;
      for (const auto& row : t.rows) {
        actual.push_back(parse_double(row[static_cast<std::size_t>(ai)]));
        predicted.push_back(parse_double(row[static_cast<std::size_t>(pi)]));
      }
      write_trace_svg(out_dir, actual, predicted);
      std::cout << "wrote " << out_dir << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const TopologyError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace bwpred
