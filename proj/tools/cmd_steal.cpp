#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/error.hpp"
#include "logitrank/learner.hpp"
#include "logitrank/model_io.hpp"

namespace logitrank::cli {
namespace {

struct StealArgs {
  std::string model;
  LearnerConfig config;
  std::size_t tv_budget = 1u << 20;
  std::string output = "learned.isn";
  std::string diagnostics = "steal.json";
};

void run_steal(StealArgs a, const GlobalOptions& g) {
  a.config.workers = g.workers;
  const ModelFile file = load_model(a.model);
  const IsanOracle oracle(file.model);
  const StealResult r = steal(oracle, a.config);

  nlohmann::json config = a.config.to_json();
  config.erase("workers");
  nlohmann::json diag =
      provenance("steal", {{"model", a.model}, {"model_info", file.info}, {"learner", config}});
  diag["result"] = r.diagnostics();
  diag["sample_count"] = a.config.sample_count(oracle.horizon());
  if (count_sequences(oracle.alphabet_size(), oracle.horizon()) <= a.tv_budget) {
    const double tv = tv_distance(exact_distribution(file.model, a.tv_budget),
                                  exact_distribution(r.model, a.tv_budget));
    diag["tv_distance"] = tv;
    std::cout << "TV distance " << fmt(tv) << "\n";
  } else {
    diag["tv_distance"] = nullptr;
  }
  save_model(r.model, output_path(g, a.output), diag);
  write_json(output_path(g, a.diagnostics), diag);
  std::cout << "learned dimension " << r.model.hidden_dim() << ", " << r.query_count
            << " logit queries (" << r.oracle_calls << " distinct prefixes)\n";
}

}  // namespace

void register_steal(CLI::App& app, GlobalOptions& g) {
  auto a = std::make_shared<StealArgs>();
  auto* cmd = app.add_subcommand("steal", "Learn an ISAN from logit queries to a model");
  cmd->add_option("--model", a->model, "Target model file")->required();
  cmd->add_option("--epsilon", a->config.epsilon, "Target TV accuracy")->capture_default_str();
  cmd->add_option("--samples", a->config.samples, "Prefix samples per step (0: auto)")
      ->capture_default_str();
  cmd->add_option("--d-max", a->config.d_max, "Abort if the rank exceeds this")
      ->capture_default_str();
  cmd->add_option("--rank-tol", a->config.rank_rel_tol, "Relative rank threshold")
      ->capture_default_str();
  cmd->add_option("--seed", a->config.seed, "Random seed")->capture_default_str();
  cmd->add_option("--tv-budget", a->tv_budget, "Max sequences enumerated for the TV check")
      ->capture_default_str();
  cmd->add_option("-o,--output", a->output, "Learned model file")->capture_default_str();
  cmd->add_option("--diagnostics", a->diagnostics, "Diagnostics JSON")->capture_default_str();
  cmd->callback([a, &g] { run_steal(*a, g); });
}

}  // namespace logitrank::cli
