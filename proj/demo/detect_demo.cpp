// Attack a few hundred targets of a synthetic graph with each method and print how well a
// forest on the four most important attributes tells clean targets from attacked ones.

#include <iostream>

#include "advgraph.hpp"

int main() {
  using namespace advgraph;
  SyntheticSpec spec;
  spec.nodes = 500;
  spec.classes = 7;
  spec.label_noise = 0.2;
  spec.seed = 7;
  const Graph g = make_synthetic_graph(spec);
  std::cout << g.node_count() << " nodes, " << g.edge_count() << " edges\n";

  for (AttackKind a : kAllAttacks) {
    BuildOptions opt;
    opt.seed = 1;
    opt.n_targets = a == AttackKind::gradargmax ? g.node_count() : 150;
    const DetectionBuild build = build_detection_dataset(g, a, opt);
    std::cout << to_string(a) << ": " << build.successes << "/" << build.attempts.size() << " succeeded";
    if (build.successes < 10) {
      std::cout << ", too few to train on\n";
      continue;
    }
    const MetricsReport r = evaluate_detector(build.samples, 4, 1);
    std::cout << ", top-4 AUC " << r.top.auc << " (";
    for (std::size_t i = 0; i < r.top_k_names.size(); ++i) std::cout << (i ? ", " : "") << r.top_k_names[i];
    std::cout << ")\n";
  }
}
