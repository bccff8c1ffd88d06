#pragma once

// Named experiment recipes fig1..fig7 behind the CLI: convergence accuracy
// and loss (fig1/fig2), the privacy-utility noise sweep (fig3), the
// poisoning/robustness grid (fig4), per-backend uplink overhead (fig5),
// planted-anomaly precision/recall (fig6), and wall-time scaling (fig7).
// Every recipe writes CSV artifacts plus the resolved config into one output
// directory; everything except the timing sidecar is byte-reproducible from
// (config, seed). run_report renders whatever artifacts it finds as SVGs and
// a text summary.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedgat/config.hpp"
#include "fedgat/fed.hpp"
#include "fedgat/graph_io.hpp"
#include "fedgat/svg.hpp"
#include "fedgat/synthgen.hpp"

namespace fedgat {

struct RecipeOutcome {
  std::vector<std::string> files;    // artifact names relative to out_dir
  std::vector<std::string> summary;  // human-readable result lines
};

namespace detail {

inline std::string fmt4(double v) { return fmt(v, "%.4f"); }

inline void require_out_dir(const ExperimentConfig& cfg) {
  if (cfg.out_dir.empty()) throw std::invalid_argument("recipe: out_dir must be set");
  std::filesystem::create_directories(cfg.out_dir);
}

inline std::ofstream open_artifact(const ExperimentConfig& cfg, const std::string& name,
                                   RecipeOutcome& out) {
  std::ofstream f(cfg.out_dir + "/" + name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for write: " + cfg.out_dir + "/" + name);
  out.files.push_back(name);
  return f;
}

// Full training run into out_dir: config.json, metrics.csv, timing.csv,
// model.bin checkpoint.
inline ExperimentResult train_to_dir(const ExperimentConfig& cfg,
                                     const std::vector<Graph>& graphs, RecipeOutcome& out) {
  require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  auto metrics = open_artifact(cfg, "metrics.csv", out);
  auto timing = open_artifact(cfg, "timing.csv", out);
  ExperimentResult res = run_experiment(cfg.fed, graphs, &metrics, &timing);
  write_text_file(cfg.out_dir + "/model.bin", serialize_model(res.final_params));
  out.files.push_back("model.bin");
  return res;
}

}  // namespace detail

// Desk-scale baseline shared by the figure recipes: a short horizon, no
// noise, no attack, plain backend. Graph size and texture come from the
// caller's config (default: 2000 fixed nodes per client).
inline void apply_desk_defaults(ExperimentConfig& cfg) {
  cfg.fed.rounds = 50;
  cfg.fed.dp.noise_multiplier = 0.0;
  cfg.fed.backend = BackendKind::kPlain;
  cfg.fed.robust_mode = RobustMode::kOff;
  cfg.fed.attack.malicious_fraction = 0.0;
}

// Pins each named recipe's knobs on top of the loaded config. Explicit CLI
// flags are applied after this, so they still win for non-swept fields.
inline void apply_recipe_preset(const std::string& name, ExperimentConfig& cfg, bool paper_scale) {
  if (name == "fig1" || name == "fig2" || name == "fig3") {
    apply_desk_defaults(cfg);
    if (paper_scale) apply_paper_scale(cfg);
  } else if (name == "fig4") {
    apply_desk_defaults(cfg);
    if (paper_scale) {  // robust rules need per-client updates: stay plain
      cfg.gen.num_nodes_min = 2000;
      cfg.gen.num_nodes_max = 10000;
      cfg.fed.rounds = 100;
      cfg.fed.dp.noise_multiplier = 1.1;
    }
    cfg.fed.attack.kind = AttackKind::kGradScale;
    cfg.fed.attack.scale = -10.0;
  } else if (name == "fig5") {
    apply_desk_defaults(cfg);
    cfg.gen.num_nodes = 300;  // payload sizes do not depend on graph size
    cfg.fed.rounds = 2;       // round 2 is steady state (no HELLO frames)
  } else if (name == "fig6") {
    apply_desk_defaults(cfg);
    if (paper_scale) apply_paper_scale(cfg);
    if (cfg.anomaly.plant_fraction <= 0.0) cfg.anomaly.plant_fraction = 0.05;
  } else if (name == "fig7") {
    apply_desk_defaults(cfg);
    cfg.fed.rounds = 5;
  } else {
    throw std::invalid_argument("unknown recipe: " + name);
  }
  resolve_config(cfg);
}

// fig1/fig2: one training run of the convergence configuration; fig1 reads
// the accuracy column, fig2 the loss column of the same metrics.csv.
inline RecipeOutcome run_training(const ExperimentConfig& cfg) {
  RecipeOutcome out;
  const auto graphs = generate_federation(cfg.gen, cfg.fed.num_clients);
  const ExperimentResult res = detail::train_to_dir(cfg, graphs, out);
  const RoundRecord& last = res.records.back();
  out.summary.push_back("rounds " + std::to_string(res.records.size()) + ", backend " +
                        last.backend + ", sigma " +
                        detail::fmt(cfg.fed.dp.noise_multiplier));
  out.summary.push_back("final test accuracy " + detail::fmt4(last.test_accuracy) +
                        ", final train loss " + detail::fmt4(last.train_loss_avg));
  return out;
}

// fig3: accuracy as the noise multiplier rises.
inline RecipeOutcome run_fig3(const ExperimentConfig& cfg) {
  RecipeOutcome out;
  detail::require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  const auto graphs = generate_federation(cfg.gen, cfg.fed.num_clients);
  auto csv = detail::open_artifact(cfg, "noise_sweep.csv", out);
  csv << "sigma,final_accuracy,final_loss,epsilon_round,epsilon_total\n";
  for (double sigma : {0.0, 0.5, 1.1, 1.5}) {
    ExperimentConfig point = cfg;
    point.fed.dp.noise_multiplier = sigma;
    const ExperimentResult res = run_experiment(point.fed, graphs);
    const RoundRecord& last = res.records.back();
    csv << detail::fmt(sigma) << ',' << detail::fmt(last.test_accuracy, "%.12g") << ','
        << detail::fmt(last.train_loss_avg, "%.12g") << ','
        << detail::fmt(epsilon_report(point.fed.dp, 1), "%.12g") << ','
        << detail::fmt(last.epsilon, "%.12g") << '\n';
    csv.flush();
    out.summary.push_back("sigma " + detail::fmt(sigma) + ": accuracy " +
                          detail::fmt4(last.test_accuracy) + ", epsilon/round " +
                          detail::fmt(epsilon_report(point.fed.dp, 1)));
  }
  return out;
}

// fig4: malicious fraction grid with the defense off and on.
inline RecipeOutcome run_fig4(const ExperimentConfig& cfg) {
  RecipeOutcome out;
  detail::require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  const auto graphs = generate_federation(cfg.gen, cfg.fed.num_clients);
  auto csv = detail::open_artifact(cfg, "attack_sweep.csv", out);
  csv << "malicious_fraction,defense,final_accuracy,final_loss\n";
  for (RobustMode mode : {RobustMode::kOff, RobustMode::kNormFilter}) {
    for (double fraction : {0.0, 0.1, 0.2}) {
      ExperimentConfig point = cfg;
      point.fed.attack.malicious_fraction = fraction;
      point.fed.robust_mode = mode;
      point.fed.backend = BackendKind::kPlain;
      const ExperimentResult res = run_experiment(point.fed, graphs);
      const RoundRecord& last = res.records.back();
      csv << detail::fmt(fraction) << ',' << to_string(mode) << ','
          << detail::fmt(last.test_accuracy, "%.12g") << ','
          << detail::fmt(last.train_loss_avg, "%.12g") << '\n';
      csv.flush();
      out.summary.push_back("malicious " + detail::fmt(fraction) + ", defense " + to_string(mode) +
                            ": accuracy " + detail::fmt4(last.test_accuracy));
    }
  }
  return out;
}

// fig5: steady-state uplink bytes per backend, with the overhead ratio taken
// against the plain backend (uplink only; the broadcast column is reported
// alongside, not folded in).
inline RecipeOutcome run_fig5(const ExperimentConfig& cfg) {
  RecipeOutcome out;
  detail::require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  const auto graphs = generate_federation(cfg.gen, cfg.fed.num_clients);
  struct Row {
    std::string backend;
    std::uint64_t up = 0, down = 0;
  };
  std::vector<Row> rows;
  for (BackendKind backend :
       {BackendKind::kPlain, BackendKind::kMasked, BackendKind::kPaillier}) {
    ExperimentConfig point = cfg;
    point.fed.backend = backend;
    point.fed.robust_mode = RobustMode::kOff;
    const ExperimentResult res = run_experiment(point.fed, graphs);
    const RoundRecord& steady = res.records.back();
    rows.push_back({to_string(backend), steady.bytes_up, steady.bytes_down});
  }
  auto csv = detail::open_artifact(cfg, "overhead.csv", out);
  csv << "backend,bytes_up_per_round,bytes_down_per_round,uplink_overhead_ratio\n";
  for (const auto& r : rows) {
    const double ratio = overhead_ratio(r.up, rows.front().up);
    csv << r.backend << ',' << r.up << ',' << r.down << ',' << detail::fmt(ratio, "%.6f")
        << '\n';
    out.summary.push_back(r.backend + ": " + std::to_string(r.up) + " bytes up per round (ratio " +
                          detail::fmt(ratio, "%.4f") + " vs plain)");
  }
  return out;
}

struct PooledAnomalyRun {
  std::vector<double> scores;        // pooled over clients, node-major
  std::vector<std::uint8_t> truth;   // pooled ground-truth indicator
  std::vector<std::size_t> flagged;  // pooled ids above threshold
  double threshold = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Shared by fig6 and the gen subcommand: plant feature-shift anomalies into
// every client graph. Per-client plant seeds derive from the master seed.
inline std::vector<PlantedAnomalies> plant_federation(const ExperimentConfig& cfg,
                                                      const std::vector<Graph>& graphs) {
  const double magnitude = cfg.anomaly.plant_magnitude * cfg.gen.class_separation;
  std::vector<PlantedAnomalies> out;
  out.reserve(graphs.size());
  for (std::size_t i = 0; i < graphs.size(); ++i)
    out.push_back(plant_anomalies(graphs[i], cfg.anomaly.plant_fraction, magnitude,
                                  mix64(cfg.master_seed, i)));
  return out;
}

// Scores every client's nodes with the model's pre-aggregation hidden states
// and pools scores, truth, and the threshold across the federation.
inline PooledAnomalyRun pooled_anomaly_scores(const ExperimentConfig& cfg,
                                              const std::vector<PlantedAnomalies>& planted,
                                              const ModelParams& params) {
  PooledAnomalyRun run;
  for (const auto& p : planted) {
    const ForwardTrace trace = model_forward(p.graph, params);
    const auto scores = anomaly_scores(trace.projections(), p.graph, cfg.anomaly.metric);
    const std::size_t offset = run.scores.size();
    run.scores.insert(run.scores.end(), scores.begin(), scores.end());
    run.truth.resize(run.scores.size(), 0);
    for (std::size_t v : p.truth) run.truth[offset + v] = 1;
  }
  run.threshold = cfg.anomaly.threshold_quantile >= 0.0
                      ? score_quantile(run.scores, cfg.anomaly.threshold_quantile)
                      : default_threshold(run.scores, cfg.anomaly.plant_fraction);
  run.flagged = flag(run.scores, run.threshold);
  std::vector<std::size_t> truth_ids;
  for (std::size_t v = 0; v < run.truth.size(); ++v)
    if (run.truth[v]) truth_ids.push_back(v);
  std::tie(run.precision, run.recall) = precision_recall(run.flagged, truth_ids);
  return run;
}

// fig6: train on the planted federation, then flag nodes whose hidden state
// deviates from their neighborhood mean.
inline RecipeOutcome run_fig6(const ExperimentConfig& cfg) {
  if (cfg.anomaly.plant_fraction <= 0.0)
    throw std::invalid_argument("fig6: anomaly.plant_fraction must be > 0");
  RecipeOutcome out;
  const auto clean = generate_federation(cfg.gen, cfg.fed.num_clients);
  const auto planted = plant_federation(cfg, clean);
  std::vector<Graph> graphs;
  graphs.reserve(planted.size());
  for (const auto& p : planted) graphs.push_back(p.graph);
  const ExperimentResult res = detail::train_to_dir(cfg, graphs, out);
  const PooledAnomalyRun run = pooled_anomaly_scores(cfg, planted, res.final_params);

  std::vector<std::uint8_t> flagged_mask(run.scores.size(), 0);
  for (std::size_t v : run.flagged) flagged_mask[v] = 1;
  auto report = detail::open_artifact(cfg, "anomaly_report.csv", out);
  report << "node_id,score,flagged,truth\n";
  for (std::size_t v = 0; v < run.scores.size(); ++v)
    report << v << ',' << detail::fmt(run.scores[v], "%.12g") << ','
           << static_cast<int>(flagged_mask[v]) << ',' << static_cast<int>(run.truth[v]) << '\n';

  std::vector<std::size_t> truth_ids;
  for (std::size_t v = 0; v < run.truth.size(); ++v)
    if (run.truth[v]) truth_ids.push_back(v);
  auto curve = detail::open_artifact(cfg, "pr_curve.csv", out);
  curve << "tau,precision,recall\n";
  for (const SweepPoint& p : threshold_sweep(run.scores, truth_ids, 101))
    curve << detail::fmt(p.tau, "%.12g") << ',' << detail::fmt(p.precision, "%.12g") << ','
          << detail::fmt(p.recall, "%.12g") << '\n';

  out.summary.push_back("planted " + std::to_string(truth_ids.size()) + " of " +
                        std::to_string(run.scores.size()) + " nodes, threshold " +
                        detail::fmt4(run.threshold));
  out.summary.push_back("precision " + detail::fmt4(run.precision) + ", recall " +
                        detail::fmt4(run.recall) + ", final accuracy " +
                        detail::fmt4(res.records.back().test_accuracy));
  return out;
}

struct ScalePoint {
  std::size_t num_nodes = 0;
  double wall_ms = 0.0;
};

// Fixed-round training runs at each per-client graph size; feeds the
// linearity check. Timing covers the rounds, not dataset generation.
inline std::vector<ScalePoint> scaling_run(const std::vector<std::size_t>& sizes,
                                           ExperimentConfig cfg) {
  if (sizes.size() < 3) throw std::invalid_argument("scaling_run: need at least 3 sizes");
  std::vector<ScalePoint> out;
  for (std::size_t n : sizes) {
    cfg.gen.num_nodes = n;
    cfg.gen.num_nodes_min = 0;
    cfg.gen.num_nodes_max = 0;
    resolve_config(cfg);
    const auto graphs = generate_federation(cfg.gen, cfg.fed.num_clients);
    const ExperimentResult res = run_experiment(cfg.fed, graphs);
    double total = 0.0;
    for (const RoundRecord& r : res.records) total += r.wall_ms;
    out.push_back({n, total});
  }
  return out;
}

// fig7: wall time against per-client graph size.
inline RecipeOutcome run_fig7(const ExperimentConfig& cfg, bool paper_scale) {
  RecipeOutcome out;
  detail::require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  const std::vector<std::size_t> sizes =
      paper_scale ? std::vector<std::size_t>{2000, 6000, 10000}
                  : std::vector<std::size_t>{1000, 2000, 4000};
  const auto points = scaling_run(sizes, cfg);
  auto csv = detail::open_artifact(cfg, "scaling.csv", out);
  csv << "num_nodes,rounds,wall_ms\n";
  std::vector<double> xs, ys;
  for (const auto& p : points) {
    char wall[64];
    std::snprintf(wall, sizeof wall, "%.3f", p.wall_ms);
    csv << p.num_nodes << ',' << cfg.fed.rounds << ',' << wall << '\n';
    xs.push_back(static_cast<double>(p.num_nodes));
    ys.push_back(p.wall_ms);
    out.summary.push_back(std::to_string(p.num_nodes) + " nodes/client: " + wall + " ms for " +
                          std::to_string(cfg.fed.rounds) + " rounds");
  }
  const LinearFit fit = linear_fit(xs, ys);
  out.summary.push_back("linear fit R^2 " + detail::fmt(fit.r_squared, "%.4f"));
  return out;
}

inline RecipeOutcome run_recipe(const std::string& name, const ExperimentConfig& cfg,
                                bool paper_scale) {
  if (name == "fig1" || name == "fig2") return run_training(cfg);
  if (name == "fig3") return run_fig3(cfg);
  if (name == "fig4") return run_fig4(cfg);
  if (name == "fig5") return run_fig5(cfg);
  if (name == "fig6") return run_fig6(cfg);
  if (name == "fig7") return run_fig7(cfg, paper_scale);
  throw std::invalid_argument("unknown recipe: " + name);
}

// gen subcommand: per-client graph files plus a manifest with seeds and
// ground-truth anomaly ids (empty when planting is off).
inline RecipeOutcome emit_federation(const ExperimentConfig& cfg) {
  RecipeOutcome out;
  detail::require_out_dir(cfg);
  save_config(cfg, cfg.out_dir + "/config.json");
  out.files.push_back("config.json");
  const auto clean = generate_federation(cfg.gen, cfg.fed.num_clients);
  std::vector<PlantedAnomalies> planted;
  if (cfg.anomaly.plant_fraction > 0.0) planted = plant_federation(cfg, clean);

  nlohmann::json manifest;
  manifest["schema_version"] = kConfigSchemaVersion;
  manifest["master_seed"] = cfg.master_seed;
  manifest["num_clients"] = cfg.fed.num_clients;
  manifest["plant_fraction"] = cfg.anomaly.plant_fraction;
  auto clients = nlohmann::json::array();
  for (std::size_t i = 0; i < clean.size(); ++i) {
    const Graph& g = planted.empty() ? clean[i] : planted[i].graph;
    char name[32];
    std::snprintf(name, sizeof name, "client_%03zu.json", i);
    save_graph_json(g, cfg.out_dir + "/" + name);
    out.files.push_back(name);
    nlohmann::json entry;
    entry["client_id"] = i;
    entry["file"] = name;
    entry["num_nodes"] = g.num_nodes;
    entry["gen_seed"] = mix64(cfg.gen.seed, mix64(stream::kGenerator, i));
    entry["plant_seed"] = mix64(cfg.master_seed, i);
    entry["anomalies"] =
        planted.empty() ? std::vector<std::size_t>{} : planted[i].truth;
    clients.push_back(std::move(entry));
  }
  manifest["clients"] = std::move(clients);
  write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  out.files.push_back("manifest.json");
  out.summary.push_back(std::to_string(clean.size()) + " client graphs written to " + cfg.out_dir);
  return out;
}

// ---- report: render whatever artifacts a run directory holds ----

namespace detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv: " + path);
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    row.resize(t.header.size());
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline std::size_t csv_col(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::runtime_error("csv column missing: " + name);
}

inline std::vector<std::pair<double, double>> csv_xy(const CsvTable& t, const std::string& xcol,
                                                     const std::string& ycol) {
  const std::size_t xi = csv_col(t, xcol), yi = csv_col(t, ycol);
  std::vector<std::pair<double, double>> out;
  for (const auto& row : t.rows) out.emplace_back(std::stod(row[xi]), std::stod(row[yi]));
  return out;
}

}  // namespace detail

inline RecipeOutcome run_report(const std::string& dir) {
  namespace fs = std::filesystem;
  RecipeOutcome out;
  std::vector<std::string> summary;
  auto have = [&dir](const char* name) { return fs::exists(fs::path(dir) / name); };
  auto emit_chart = [&](const char* name, const std::string& svg) {
    write_text_file(dir + "/" + name, svg);
    out.files.push_back(name);
  };

  if (have("metrics.csv")) {
    const auto t = detail::read_csv(dir + "/metrics.csv");
    if (!t.rows.empty()) {
      ChartSpec acc;
      acc.title = "Global test accuracy by round";
      acc.x_label = "round";
      acc.y_label = "accuracy";
      acc.series.push_back({"", detail::csv_xy(t, "round", "test_accuracy")});
      emit_chart("accuracy.svg", render_line_chart(acc));
      ChartSpec loss;
      loss.title = "Average training loss by round";
      loss.x_label = "round";
      loss.y_label = "loss";
      loss.series.push_back({"", detail::csv_xy(t, "round", "train_loss_avg")});
      emit_chart("loss.svg", render_line_chart(loss));
      const auto& last = t.rows.back();
      summary.push_back("training: " + std::to_string(t.rows.size()) + " rounds, final accuracy " +
                        t.rows.back()[detail::csv_col(t, "test_accuracy")] + ", final loss " +
                        last[detail::csv_col(t, "train_loss_avg")] + ", backend " +
                        last[detail::csv_col(t, "backend")]);
    }
  }
  if (have("noise_sweep.csv")) {
    const auto t = detail::read_csv(dir + "/noise_sweep.csv");
    ChartSpec c;
    c.title = "Accuracy under rising noise";
    c.x_label = "noise multiplier";
    c.y_label = "final accuracy";
    c.series.push_back({"", detail::csv_xy(t, "sigma", "final_accuracy")});
    emit_chart("noise_sweep.svg", render_line_chart(c));
    for (const auto& row : t.rows)
      summary.push_back("noise sweep: sigma " + row[detail::csv_col(t, "sigma")] + " -> accuracy " +
                        row[detail::csv_col(t, "final_accuracy")]);
  }
  if (have("attack_sweep.csv")) {
    const auto t = detail::read_csv(dir + "/attack_sweep.csv");
    const std::size_t defense = detail::csv_col(t, "defense");
    const std::size_t frac = detail::csv_col(t, "malicious_fraction");
    const std::size_t acc = detail::csv_col(t, "final_accuracy");
    ChartSpec c;
    c.title = "Accuracy under gradient poisoning";
    c.x_label = "malicious fraction";
    c.y_label = "final accuracy";
    for (const auto& row : t.rows) {
      Series* s = nullptr;
      for (auto& existing : c.series)
        if (existing.label == row[defense]) s = &existing;
      if (s == nullptr) {
        c.series.push_back({row[defense], {}});
        s = &c.series.back();
      }
      s->points.emplace_back(std::stod(row[frac]), std::stod(row[acc]));
      summary.push_back("attack sweep: fraction " + row[frac] + ", defense " + row[defense] +
                        " -> accuracy " + row[acc]);
    }
    emit_chart("attack_sweep.svg", render_line_chart(c));
  }
  if (have("overhead.csv")) {
    const auto t = detail::read_csv(dir + "/overhead.csv");
    std::vector<std::pair<std::string, double>> bars;
    for (const auto& row : t.rows) {
      bars.emplace_back(row[detail::csv_col(t, "backend")],
                        std::stod(row[detail::csv_col(t, "bytes_up_per_round")]));
      summary.push_back("overhead: " + row[detail::csv_col(t, "backend")] + " ratio " +
                        row[detail::csv_col(t, "uplink_overhead_ratio")]);
    }
    emit_chart("overhead.svg", render_bar_chart("Uplink bytes per round by backend",
                                                "bytes per round", bars));
  }
  if (have("pr_curve.csv")) {
    const auto t = detail::read_csv(dir + "/pr_curve.csv");
    ChartSpec c;
    c.title = "Anomaly precision-recall";
    c.x_label = "recall";
    c.y_label = "precision";
    c.series.push_back({"", detail::csv_xy(t, "recall", "precision")});
    emit_chart("pr_curve.svg", render_line_chart(c));
  }
  if (have("anomaly_report.csv")) {
    const auto t = detail::read_csv(dir + "/anomaly_report.csv");
    const std::size_t fcol = detail::csv_col(t, "flagged");
    const std::size_t tcol = detail::csv_col(t, "truth");
    std::size_t flagged = 0, truth = 0, hits = 0;
    for (const auto& row : t.rows) {
      const bool f = row[fcol] == "1", tr = row[tcol] == "1";
      flagged += f;
      truth += tr;
      hits += f && tr;
    }
    const double precision = flagged ? static_cast<double>(hits) / flagged : 1.0;
    const double recall = truth ? static_cast<double>(hits) / truth : 1.0;
    summary.push_back("anomaly: precision " + detail::fmt4(precision) + ", recall " +
                      detail::fmt4(recall) + " (" + std::to_string(flagged) + " flagged, " +
                      std::to_string(truth) + " planted)");
  }
  if (have("scaling.csv")) {
    const auto t = detail::read_csv(dir + "/scaling.csv");
    const auto pts = detail::csv_xy(t, "num_nodes", "wall_ms");
    ChartSpec c;
    c.title = "Wall time by per-client graph size";
    c.x_label = "nodes per client";
    c.y_label = "wall ms";
    c.series.push_back({"measured", pts});
    std::vector<double> xs, ys;
    for (const auto& [x, y] : pts) {
      xs.push_back(x);
      ys.push_back(y);
    }
    if (pts.size() >= 2) {
      const LinearFit fit = linear_fit(xs, ys);
      Series line{"fit", {}};
      for (const auto& [x, _] : pts) line.points.emplace_back(x, fit.intercept + fit.slope * x);
      c.series.push_back(std::move(line));
      summary.push_back("scaling: linear fit R^2 " + detail::fmt(fit.r_squared, "%.4f"));
    }
    emit_chart("scaling.svg", render_line_chart(c));
  }

  if (out.files.empty())
    throw std::invalid_argument("report: no recognized artifacts in " + dir);
  std::string text;
  for (const auto& line : summary) text += line + "\n";
  write_text_file(dir + "/summary.txt", text);
  out.files.push_back("summary.txt");
  out.summary = std::move(summary);
  return out;
}

}  // namespace fedgat
