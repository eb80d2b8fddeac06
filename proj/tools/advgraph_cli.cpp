// advgraph: attack, featurize and detect from the command line.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "advgraph.hpp"

namespace fs = std::filesystem;
using namespace advgraph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitEmpty = 3;

/// Raised when a stage produced nothing usable; maps to exit code 3.
struct EmptyResult : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

class Log {
 public:
  explicit Log(bool quiet) : quiet_(quiet) {}
  template <class... T>
  void operator()(const T&... parts) const {
    if (quiet_) return;
    (std::cerr << ... << parts) << '\n';
  }

 private:
  bool quiet_;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const nlohmann::json& j) { open_out(p) << j.dump(2) << '\n'; }

Graph load_source(const RunConfig& cfg) {
  if (cfg.dataset) return load_graph_files(cfg.dataset->edges, cfg.dataset->labels);
  return make_synthetic_graph(cfg.synthetic->spec);
}

/// Graph from --edges/--labels, else from the config's graph source.
Graph load_cli_graph(const std::string& edges, const std::string& labels, const Globals& g) {
  if (!edges.empty() || !labels.empty()) {
    if (edges.empty() || labels.empty()) throw ValidationError("--edges and --labels go together");
    return load_graph_files(edges, labels);
  }
  if (g.config.empty()) throw ValidationError("give --edges and --labels, or --config");
  return load_source(load_run_config(g.config));
}

NodeId dense_id(const Graph& g, std::int64_t original) {
  const auto ids = g.original_ids();
  const auto it = std::lower_bound(ids.begin(), ids.end(), original);
  if (it == ids.end() || *it != original) throw ValidationError("unknown node id " + std::to_string(original));
  return static_cast<NodeId>(it - ids.begin());
}

std::string metrics_csv_header() {
  return "dataset,attack,k,acc,auc,precision,acc_all,auc_all,precision_all,gain_acc,gain_auc,gain_precision,top_k";
}

std::string fmt(std::optional<double> v) {
  if (!v) return "";
  std::ostringstream s;
  s << std::setprecision(12) << *v;
  return s.str();
}

std::optional<double> safe_gain(std::optional<double> all, std::optional<double> top) {
  if (!all || !top || !(*top > 0.0)) return std::nullopt;
  return gain(*all, *top);
}

std::string metrics_csv_row(const std::string& dataset, AttackKind a, const MetricsReport& r) {
  std::string names;
  for (const auto& n : r.top_k_names) names += (names.empty() ? "" : ";") + n;
  std::ostringstream s;
  s << dataset << ',' << to_string(a) << ',' << r.k << ',' << fmt(r.top.acc) << ',' << fmt(r.top.auc) << ','
    << fmt(r.top.precision) << ',' << fmt(r.all.acc) << ',' << fmt(r.all.auc) << ',' << fmt(r.all.precision) << ','
    << fmt(safe_gain(r.all.acc, r.top.acc)) << ',' << fmt(safe_gain(r.all.auc, r.top.auc)) << ','
    << fmt(safe_gain(r.all.precision, r.top.precision)) << ',' << names;
  return s.str();
}

nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  if (c.dataset) j["dataset"] = {{"name", c.dataset->name}, {"edges", c.dataset->edges}, {"labels", c.dataset->labels}};
  if (c.synthetic) {
    const auto& s = c.synthetic->spec;
    j["synthetic"] = {{"name", c.synthetic->name},   {"model", to_string(s.model)}, {"nodes", s.nodes},
                      {"parameter", s.parameter},    {"classes", s.classes},        {"label_noise", s.label_noise},
                      {"seed", s.seed}};
  }
  j["attacks"] = nlohmann::json::array();
  for (const auto& a : c.attacks) {
    nlohmann::json e{{"name", to_string(a.kind)}};
    if (a.budget) e["budget"] = *a.budget;
    j["attacks"].push_back(e);
  }
  j["n_targets"] = c.n_targets;
  j["top_k"] = c.top_k;
  j["k_values"] = c.k_values;
  j["n_trees"] = c.n_trees;
  j["recognition_repeats"] = c.recognition_repeats;
  j["seed"] = c.seed;
  j["split_seed"] = c.effective_split_seed();
  j["output"] = c.output;
  return j;
}

// ---------------------------------------------------------------------------

int cmd_run(const Globals& g) {
  if (g.config.empty()) throw ValidationError("run needs --config");
  RunConfig cfg = load_run_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.out.empty()) cfg.output = g.out;
  cfg.validate();
  const Log log(g.quiet);

  const Graph graph = load_source(cfg);
  const std::string dataset = cfg.dataset_name();
  const fs::path root = fs::path(cfg.output);
  const fs::path data_dir = root / dataset;
  fs::create_directories(data_dir);
  write_json(root / "run_config.json", config_to_json(cfg));
  {
    auto e = open_out(data_dir / "graph.edges");
    write_edge_list(graph, e);
    auto f = open_out(data_dir / "graph.labels");
    write_labels(graph, f);
    auto m = open_out(data_dir / "node_map.csv");
    write_node_map(graph, m);
  }
  log("dataset ", dataset, ": ", graph.node_count(), " nodes, ", graph.edge_count(), " edges, ",
      graph.class_count(), " classes");

  ForestParams forest = default_forest_params(cfg.seed);
  forest.n_trees = cfg.n_trees;
  const auto ids = graph.original_ids();
  std::vector<std::string> empty_attacks;
  std::vector<DetectionSample> pooled;
  std::ofstream summary = open_out(root / "summary.csv");
  summary << metrics_csv_header() << '\n';

  for (const AttackSetting& setting : cfg.attacks) {
    const std::string name(to_string(setting.kind));
    const fs::path dir = data_dir / name;
    fs::create_directories(dir);
    BuildOptions opt;
    opt.n_targets = cfg.n_targets;
    opt.seed = cfg.seed;
    opt.dataset = dataset;
    opt.budget = setting.budget;
    const DetectionBuild build = build_detection_dataset(graph, setting.kind, opt);
    log(name, ": ", build.successes, "/", build.attempts.size(), " attacks succeeded");

    {
      auto plans = open_out(dir / "plans.txt");
      nlohmann::json attempts = nlohmann::json::array();
      for (const auto& rec : build.attempts) {
        write_plan_lines(plans, rec.plan, ids);
        attempts.push_back(plan_summary(rec.plan, rec.success, ids));
      }
      write_json(dir / "attempts.json", {{"attack", name},
                                         {"dataset", dataset},
                                         {"attempted", build.attempts.size()},
                                         {"successful", build.successes},
                                         {"success_rate", build.success_rate()},
                                         {"plans", attempts}});
      auto samples = open_out(dir / "samples.csv");
      write_samples_csv(samples, build.samples, ids);
    }
    if (build.successes == 0) {
      log("error: ", build.diagnostic);
      empty_attacks.push_back(name);
      continue;
    }
    if (build.successes < 10) {
      log("warning: ", name, ": only ", build.successes, " successful attacks, detector needs 10; skipped");
      continue;
    }

    const DetectorModels models = train_detector(build.samples, cfg.top_k, cfg.effective_split_seed(), forest);
    const MetricsReport& r = models.report;
    log(name, ": top-", r.k, " auc ", r.top.auc, ", all-attribute auc ", r.all.auc, ", top attributes ",
        nlohmann::json(r.top_k_names).dump());
    write_json(dir / "metrics.json", to_json(r));
    {
      auto csv = open_out(dir / "metrics.csv");
      csv << metrics_csv_header() << '\n' << metrics_csv_row(dataset, setting.kind, r) << '\n';
      summary << metrics_csv_row(dataset, setting.kind, r) << '\n';
      auto imp = open_out(dir / "importances.csv");
      write_importance_csv(imp, r.importances);
      auto hist = open_out(dir / "histograms.csv");
      write_histogram_csv(hist, attribute_histograms(build.samples));
      auto sweep = open_out(dir / "sweep.csv");
      sweep << "k,auc,attributes\n" << std::setprecision(12);
      for (const auto& row : top_k_sweep(build.samples, cfg.k_values, cfg.effective_split_seed(), forest)) {
        std::string names;
        for (const auto& n : row.names) names += (names.empty() ? "" : ";") + n;
        sweep << row.k << ',' << row.auc << ',' << names << '\n';
      }
    }
    write_json(dir / "detector_all.json", forest_to_json(models.all));
    write_json(dir / "detector_top.json", forest_to_json(models.top));
    for (const auto& s : build.samples) {
      if (s.label == kAdversarialLabel) pooled.push_back(s);
    }
  }

  std::size_t kinds = 0;
  for (AttackKind a : kAllAttacks) {
    kinds += std::any_of(pooled.begin(), pooled.end(), [&](const DetectionSample& s) { return s.attack == a; });
  }
  if (kinds >= 2) {
    const RecognitionReport rec = recognize_attack(pooled, cfg.effective_split_seed(), cfg.recognition_repeats, forest);
    write_json(data_dir / "recognition.json", to_json(rec));
    log("recognition: macro AUC ", rec.mean_auc, " +- ", rec.std_auc, " over ", rec.aucs.size(), " splits");
  } else {
    log("recognition skipped: fewer than two attacks with samples");
  }

  if (!empty_attacks.empty()) {
    std::string names;
    for (const auto& n : empty_attacks) names += (names.empty() ? "" : ", ") + n;
    throw EmptyResult("no successful attack for: " + names);
  }
  return kExitOk;
}

int cmd_attributes(const Globals& g, const std::string& edges, const std::string& labels,
                   const std::vector<std::int64_t>& nodes) {
  const Graph graph = load_cli_graph(edges, labels, g);
  std::vector<NodeId> targets;
  if (nodes.empty()) {
    for (NodeId v = 0; v < graph.node_count(); ++v) targets.push_back(v);
  } else {
    for (std::int64_t id : nodes) targets.push_back(dense_id(graph, id));
  }
  const AttributeExtractor<Graph> extract(graph);
  write_attribute_header(std::cout);
  for (NodeId v : targets) write_attribute_row(std::cout, graph.original_ids()[v], graph.label(v), extract(v));
  return kExitOk;
}

int cmd_attack(const Globals& g, const std::string& edges, const std::string& labels, const std::string& attack,
               std::int64_t target, std::optional<std::size_t> budget) {
  const auto kind = parse_attack(attack);
  if (!kind) throw ValidationError("unknown attack \"" + attack + "\" (expected nettack, meta or gradargmax)");
  const Graph graph = load_cli_graph(edges, labels, g);
  const NodeId t = dense_id(graph, target);
  const AttackPlan plan = run_attack(*kind, graph, t, budget);
  const bool success = attack_succeeded(graph, apply_flips(graph, plan.flips), t);
  write_plan_lines(std::cout, plan, graph.original_ids());
  const auto summary = plan_summary(plan, success, graph.original_ids());
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    auto f = open_out(fs::path(g.out) / "plan.txt");
    write_plan_lines(f, plan, graph.original_ids());
    write_json(fs::path(g.out) / "summary.json", summary);
  }
  Log(g.quiet)(summary.dump());
  return plan.empty() ? kExitEmpty : kExitOk;
}

int cmd_train(const Globals& g, const std::string& samples_path, std::size_t k, std::size_t n_trees) {
  std::ifstream in(samples_path);
  if (!in) throw std::runtime_error("cannot open samples file " + samples_path);
  const auto samples = read_samples_csv(in);
  if (samples.empty()) throw EmptyResult("no samples in " + samples_path);
  const std::uint64_t seed = g.seed.value_or(0);
  ForestParams forest = default_forest_params(seed);
  forest.n_trees = n_trees;
  const DetectorModels models = train_detector(samples, k, seed, forest);
  const auto report = to_json(models.report);
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_json(fs::path(g.out) / "metrics.json", report);
    write_json(fs::path(g.out) / "detector_all.json", forest_to_json(models.all));
    write_json(fs::path(g.out) / "detector_top.json", forest_to_json(models.top));
    auto imp = open_out(fs::path(g.out) / "importances.csv");
    write_importance_csv(imp, models.report.importances);
  }
  std::cout << report.dump(2) << '\n';
  return kExitOk;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return nlohmann::json::parse(in);
}

int cmd_report(const Globals& g) {
  const fs::path root = g.out.empty() ? fs::path("advgraph-out") : fs::path(g.out);
  if (!fs::is_directory(root)) throw std::runtime_error("no run directory at " + root.string());
  std::vector<fs::path> datasets;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) datasets.push_back(e.path());
  }
  std::sort(datasets.begin(), datasets.end());
  std::size_t rows = 0;
  std::cout << std::left << std::setw(24) << "dataset" << std::setw(12) << "attack" << std::setw(10) << "success"
            << std::setw(8) << "acc" << std::setw(8) << "auc" << std::setw(8) << "auc_all"
            << "top attributes\n";
  std::cout << std::fixed << std::setprecision(3);
  for (const auto& d : datasets) {
    for (AttackKind a : kAllAttacks) {
      const fs::path dir = d / std::string(to_string(a));
      if (!fs::exists(dir / "attempts.json")) continue;
      const auto attempts = read_json(dir / "attempts.json");
      std::cout << std::setw(24) << d.filename().string() << std::setw(12) << to_string(a) << std::setw(10)
                << attempts.at("success_rate").get<double>();
      if (fs::exists(dir / "metrics.json")) {
        const auto m = read_json(dir / "metrics.json");
        std::string names;
        for (const auto& n : m.at("top_k_names")) names += (names.empty() ? "" : ", ") + n.get<std::string>();
        std::cout << std::setw(8) << m.at("top_k").at("acc").get<double>() << std::setw(8)
                  << m.at("top_k").at("auc").get<double>() << std::setw(8) << m.at("all").at("auc").get<double>()
                  << names;
      } else {
        std::cout << "(no detector)";
      }
      std::cout << '\n';
      ++rows;
    }
    if (fs::exists(d / "recognition.json")) {
      const auto r = read_json(d / "recognition.json");
      std::cout << std::setw(24) << d.filename().string() << "recognition macro AUC "
                << r.at("mean_auc").get<double>() << " +- " << r.at("std_auc").get<double>() << '\n';
    }
  }
  if (rows == 0) throw EmptyResult("no attack results under " + root.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural adversarial attacks on node classification, and their detection"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON, comments allowed)");
  app.add_option("--seed", g.seed, "Override the configured seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--quiet", g.quiet, "No progress output on stderr");
  app.fallthrough();

  auto* run = app.add_subcommand("run", "Attack, featurize, train, evaluate, sweep and recognize");

  std::string edges, labels;
  auto* attributes = app.add_subcommand("attributes", "Print the 17 attributes of nodes as CSV");
  std::vector<std::int64_t> nodes;
  attributes->add_option("--edges", edges, "Edge list file");
  attributes->add_option("--labels", labels, "Node label file");
  attributes->add_option("nodes", nodes, "Node ids (default: all)");

  auto* attack = app.add_subcommand("attack", "Print one attack plan");
  std::string attack_name;
  std::int64_t target = 0;
  std::optional<std::size_t> budget;
  attack->add_option("--edges", edges, "Edge list file");
  attack->add_option("--labels", labels, "Node label file");
  attack->add_option("--attack", attack_name, "nettack, meta or gradargmax")->required();
  attack->add_option("--target", target, "Target node id")->required();
  attack->add_option("--budget", budget, "Flip budget (default depends on the attack)");

  auto* train = app.add_subcommand("train", "Train and evaluate a detector on a samples.csv");
  std::string samples;
  std::size_t k = 4, n_trees = 100;
  train->add_option("--samples", samples, "samples.csv written by run")->required();
  train->add_option("--k", k, "Number of top attributes")->capture_default_str();
  train->add_option("--trees", n_trees, "Trees per forest")->capture_default_str();

  auto* report = app.add_subcommand("report", "Summarize a run directory (--out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*run) return cmd_run(g);
    if (*attributes) return cmd_attributes(g, edges, labels, nodes);
    if (*attack) return cmd_attack(g, edges, labels, attack_name, target, budget);
    if (*train) return cmd_train(g, samples, k, n_trees);
    if (*report) return cmd_report(g);
  } catch (const EmptyResult& e) {
    std::cerr << "advgraph: " << e.what() << '\n';
    return kExitEmpty;
  } catch (const std::exception& e) {
    std::cerr << "advgraph: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
