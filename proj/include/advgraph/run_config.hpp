#pragma once

// Experiment configuration. JSON with // and /* */ comments allowed; every field is optional
// except the graph source. Unknown keys are rejected so typos do not silently fall back to
// defaults.
//
//   {
//     "synthetic": {"model": "erdos-renyi", "nodes": 500, "parameter": 4, "classes": 4,
//                   "label_noise": 0.0, "seed": 0},        // or:
//     "dataset":   {"name": "cora", "edges": "cora.edges", "labels": "cora.labels"},
//     "attacks":   ["nettack", {"name": "meta", "budget": 3}, "gradargmax"],
//     "n_targets": 100,
//     "top_k": 4,
//     "k_values":  [1, 2, 3, 4, 5, 6, 7, 8, 9, 10],
//     "n_trees": 100,
//     "recognition_repeats": 10,
//     "seed": 0,
//     "split_seed": 0,                                      // defaults to seed
//     "output": "advgraph-out"
//   }

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advgraph/attacks.hpp"
#include "advgraph/attributes.hpp"
#include "advgraph/error.hpp"
#include "advgraph/generators.hpp"

namespace advgraph {

struct DatasetSource {
  std::string name;
  std::string edges;
  std::string labels;
};

struct SyntheticSource {
  std::string name;  ///< defaults to e.g. "erdos-renyi-500-s0"
  SyntheticSpec spec;
};

struct AttackSetting {
  AttackKind kind = AttackKind::nettack;
  std::optional<std::size_t> budget;
};

struct RunConfig {
  std::optional<DatasetSource> dataset;
  std::optional<SyntheticSource> synthetic;
  std::vector<AttackSetting> attacks{{AttackKind::nettack, {}}, {AttackKind::meta, {}}, {AttackKind::gradargmax, {}}};
  std::size_t n_targets = 100;
  std::size_t top_k = 4;
  std::vector<std::size_t> k_values{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::size_t n_trees = 100;
  std::size_t recognition_repeats = 10;
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> split_seed;
  std::string output = "advgraph-out";

  std::uint64_t effective_split_seed() const { return split_seed.value_or(seed); }

  std::string dataset_name() const { return dataset ? dataset->name : synthetic->name; }

  void validate() const {
    if (dataset.has_value() == synthetic.has_value()) {
      throw ValidationError("config needs exactly one of \"dataset\" and \"synthetic\"");
    }
    if (dataset && (dataset->edges.empty() || dataset->labels.empty())) {
      throw ValidationError("dataset needs both \"edges\" and \"labels\" paths");
    }
    if (attacks.empty()) throw ValidationError("no attacks configured");
    std::set<AttackKind> seen;
    for (const auto& a : attacks) {
      if (!seen.insert(a.kind).second) throw ValidationError("attack listed twice: " + std::string(to_string(a.kind)));
      if (a.budget && *a.budget == 0) throw ValidationError("attack budget must be positive");
    }
    if (n_targets == 0) throw ValidationError("n_targets must be at least 1");
    if (top_k == 0 || top_k > kAttributeCount) throw ValidationError("top_k must be in [1, 17]");
    for (std::size_t k : k_values) {
      if (k == 0 || k > kAttributeCount) throw ValidationError("k_values entries must be in [1, 17]");
    }
    if (n_trees == 0) throw ValidationError("n_trees must be at least 1");
    if (recognition_repeats == 0) throw ValidationError("recognition_repeats must be at least 1");
    if (output.empty()) throw ValidationError("output directory must not be empty");
  }
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> known,
                                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ValidationError("unknown key \"" + key + "\" in " + where);
  }
}

template <class T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(std::string("config field \"") + key + "\" has the wrong type");
  }
}

inline AttackKind attack_from_name(const std::string& name) {
  if (auto a = parse_attack(name)) return *a;
  throw ValidationError("unknown attack \"" + name + "\" (expected nettack, meta or gradargmax)");
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  detail::reject_unknown_keys(j,
                              {"dataset", "synthetic", "attacks", "n_targets", "top_k", "k_values", "n_trees",
                               "recognition_repeats", "seed", "split_seed", "output"},
                              "config");
  RunConfig c;
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    if (!d.is_object()) throw ValidationError("\"dataset\" must be an object");
    detail::reject_unknown_keys(d, {"name", "edges", "labels"}, "dataset");
    c.dataset = DatasetSource{detail::get_or<std::string>(d, "name", "dataset"),
                              detail::get_or<std::string>(d, "edges", ""),
                              detail::get_or<std::string>(d, "labels", "")};
  }
  if (j.contains("synthetic")) {
    const auto& s = j.at("synthetic");
    if (!s.is_object()) throw ValidationError("\"synthetic\" must be an object");
    detail::reject_unknown_keys(s, {"name", "model", "nodes", "parameter", "classes", "label_noise", "seed"},
                                "synthetic");
    SyntheticSource src;
    const auto model = detail::get_or<std::string>(s, "model", "erdos-renyi");
    const auto parsed = parse_graph_model(model);
    if (!parsed) throw ValidationError("unknown graph model \"" + model + "\"");
    src.spec.model = *parsed;
    src.spec.nodes = detail::get_or<std::size_t>(s, "nodes", src.spec.nodes);
    src.spec.parameter = detail::get_or<double>(s, "parameter", src.spec.model == GraphModel::erdos_renyi ? 4.0 : 2.0);
    src.spec.classes = detail::get_or<int>(s, "classes", src.spec.classes);
    src.spec.label_noise = detail::get_or<double>(s, "label_noise", src.spec.label_noise);
    src.spec.seed = detail::get_or<std::uint64_t>(s, "seed", src.spec.seed);
    src.name = detail::get_or<std::string>(s, "name", std::string(to_string(src.spec.model)) + "-" +
                                                          std::to_string(src.spec.nodes) + "-s" +
                                                          std::to_string(src.spec.seed));
    c.synthetic = src;
  }
  if (j.contains("attacks")) {
    const auto& list = j.at("attacks");
    if (!list.is_array()) throw ValidationError("\"attacks\" must be a list");
    c.attacks.clear();
    for (const auto& item : list) {
      if (item.is_string()) {
        c.attacks.push_back({detail::attack_from_name(item.get<std::string>()), {}});
      } else if (item.is_object()) {
        detail::reject_unknown_keys(item, {"name", "budget"}, "attack entry");
        AttackSetting a{detail::attack_from_name(detail::get_or<std::string>(item, "name", "")), {}};
        if (item.contains("budget")) a.budget = detail::get_or<std::size_t>(item, "budget", 0);
        c.attacks.push_back(a);
      } else {
        throw ValidationError("attack entries must be names or {\"name\", \"budget\"} objects");
      }
    }
  }
  c.n_targets = detail::get_or<std::size_t>(j, "n_targets", c.n_targets);
  c.top_k = detail::get_or<std::size_t>(j, "top_k", c.top_k);
  c.k_values = detail::get_or<std::vector<std::size_t>>(j, "k_values", c.k_values);
  c.n_trees = detail::get_or<std::size_t>(j, "n_trees", c.n_trees);
  c.recognition_repeats = detail::get_or<std::size_t>(j, "recognition_repeats", c.recognition_repeats);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  if (j.contains("split_seed")) c.split_seed = detail::get_or<std::uint64_t>(j, "split_seed", 0);
  c.output = detail::get_or<std::string>(j, "output", c.output);
  c.validate();
  return c;
}

inline RunConfig parse_run_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("config is not valid JSON: ") + e.what(), 0);
  }
  return parse_run_config(j);
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

}  // namespace advgraph
