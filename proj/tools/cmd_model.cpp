#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/constructions.hpp"
#include "logitrank/error.hpp"
#include "logitrank/logit_matrix.hpp"
#include "logitrank/model_io.hpp"

namespace logitrank::cli {
namespace {

struct MakeModelArgs {
  std::string kind = "random";
  std::size_t n = 3;
  double sharpness = 30.0;
  std::string y = "1,0,1";
  double flip = 0.1;
  std::size_t dim = 2;
  std::size_t alphabet = 2;
  std::size_t horizon = 4;
  double scale = 1.0;
  std::size_t ssm_input = 2;
  std::size_t ssm_output = 2;
  std::uint64_t seed = 0;
  std::string output = "model.isn";
};

void make_model(const MakeModelArgs& a, const GlobalOptions& g) {
  nlohmann::json config = {{"kind", a.kind}, {"seed", a.seed}};
  TimeVaryingIsan model;
  std::string id;
  if (a.kind == "copying") {
    model = build_copying(a.n, a.sharpness);
    config["n"] = a.n;
    config["sharpness"] = a.sharpness;
    id = "copying(n=" + std::to_string(a.n) + ",C=" + fmt(a.sharpness) + ")";
  } else if (a.kind == "noisy-parity") {
    NoisyParitySpec spec{parse_sequence(a.y), a.flip};
    model = build_noisy_parity(spec);
    config["y"] = spec.y;
    config["flip_probability"] = a.flip;
    id = "noisy-parity(y=" + to_string(spec.y) + ",p=" + fmt(a.flip) + ")";
  } else if (a.kind == "random") {
    model = random_isan(a.dim, a.alphabet, a.horizon, a.seed, a.scale);
    config.update({{"dim", a.dim}, {"alphabet", a.alphabet}, {"horizon", a.horizon},
                   {"scale", a.scale}});
    id = "random(d=" + std::to_string(a.dim) + ",k=" + std::to_string(a.alphabet) +
         ",T=" + std::to_string(a.horizon) + ",seed=" + std::to_string(a.seed) + ")";
  } else if (a.kind == "uniform") {
    model = uniform_isan(a.alphabet, a.horizon);
    config.update({{"alphabet", a.alphabet}, {"horizon", a.horizon}});
    id = "uniform(k=" + std::to_string(a.alphabet) + ",T=" + std::to_string(a.horizon) + ")";
  } else if (a.kind == "ssm") {
    model = embed_ssm(random_ssm_spec(a.ssm_input, a.ssm_output, a.dim, a.alphabet, a.horizon,
                                      a.seed, a.scale));
    config.update({{"dim", a.dim}, {"alphabet", a.alphabet}, {"horizon", a.horizon},
                   {"scale", a.scale}, {"ssm_input", a.ssm_input},
                   {"ssm_output", a.ssm_output}});
    id = "ssm(d=" + std::to_string(a.dim) + ",p=" + std::to_string(a.ssm_input) +
         ",q=" + std::to_string(a.ssm_output) + ",seed=" + std::to_string(a.seed) + ")";
  } else {
    throw ValidationError("unknown model kind '" + a.kind + "'");
  }
  nlohmann::json info = provenance("make-model", config);
  info["model_id"] = id;
  const auto path = output_path(g, a.output);
  save_model(model, path, info);
  std::cout << "wrote " << path.string() << " (" << id << ", d=" << model.hidden_dim()
            << ", T=" << model.horizon() << ")\n";
}

struct BuildMatrixArgs {
  std::string model;
  std::string histories = "exhaustive:1";
  std::string futures = "closure:1";
  std::string selector = "all";
  std::uint64_t seed = 0;
  bool no_baseline = false;
  std::string output = "matrix.elm";
};

void build_matrix(const BuildMatrixArgs& a, const GlobalOptions& g) {
  const ModelFile file = load_model(a.model);
  const IsanOracle oracle(file.model);
  const auto hs = resolve_sequences(a.histories, oracle, a.seed, "histories");
  const auto fs = resolve_sequences(a.futures, oracle, a.seed, "futures");
  const ColumnSelector selector = ColumnSelector::parse(a.selector);
  LogitMatrix m = build_logit_matrix(oracle, hs, fs, selector, g.workers);
  m.metadata["model_id"] =
      file.info.value("model_id", std::filesystem::path(a.model).filename().string());
  m.metadata["config"] =
      provenance("build-matrix", {{"histories", a.histories},
                                  {"futures", a.futures},
                                  {"selector", a.selector},
                                  {"seed", a.seed},
                                  {"model_info", file.info}});
  if (!a.no_baseline) {
    // Logits at each future alone, so the rank-1 baseline needs no model.
    nlohmann::json rows = nlohmann::json::array();
    const auto ranges = m.future_ranges();
    for (std::size_t f = 0; f < fs.size(); ++f) {
      const LogitVector l = oracle.query(fs[f]);
      nlohmann::json row = nlohmann::json::array();
      for (std::size_t c = ranges[f].first; c < ranges[f].second; ++c)
        row.push_back(l[m.columns[c].token]);
      rows.push_back(std::move(row));
    }
    m.metadata["null_history_logits"] = std::move(rows);
  }
  const auto path = output_path(g, a.output);
  save_logit_matrix(m, path);
  std::cout << "wrote " << path.string() << " (" << m.rows() << " x " << m.cols() << ")\n";
}

}  // namespace

void register_make_model(CLI::App& app, GlobalOptions& g) {
  auto a = std::make_shared<MakeModelArgs>();
  auto* cmd = app.add_subcommand("make-model", "Write a constructed or random ISAN to a file");
  cmd->add_option("--kind", a->kind, "copying | noisy-parity | random | uniform | ssm")
      ->capture_default_str();
  cmd->add_option("--n", a->n, "Copying length")->capture_default_str();
  cmd->add_option("--sharpness", a->sharpness, "Copying sharpness C")->capture_default_str();
  cmd->add_option("--y", a->y, "Noisy-parity key bits, comma separated")->capture_default_str();
  cmd->add_option("--flip-p", a->flip, "Noisy-parity flip probability")->capture_default_str();
  cmd->add_option("--dim", a->dim, "Hidden (or SSM state) dimension")->capture_default_str();
  cmd->add_option("--alphabet", a->alphabet, "Alphabet size")->capture_default_str();
  cmd->add_option("--horizon", a->horizon, "Sequence length T")->capture_default_str();
  cmd->add_option("--scale", a->scale, "Gaussian parameter scale")->capture_default_str();
  cmd->add_option("--ssm-input-dim", a->ssm_input, "SSM input dimension p")->capture_default_str();
  cmd->add_option("--ssm-output-dim", a->ssm_output, "SSM output dimension q")
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "Random seed")->capture_default_str();
  cmd->add_option("-o,--output", a->output, "Model file")->capture_default_str();
  cmd->callback([a, &g] { make_model(*a, g); });
}

void register_build_matrix(CLI::App& app, GlobalOptions& g) {
  auto a = std::make_shared<BuildMatrixArgs>();
  auto* cmd = app.add_subcommand("build-matrix", "Query a model and save its logit matrix (.elm)");
  cmd->add_option("--model", a->model, "Model file")->required();
  cmd->add_option("--histories", a->histories, "History source")->capture_default_str();
  cmd->add_option("--futures", a->futures, "Future source")->capture_default_str();
  cmd->add_option("--selector", a->selector, "all | top-k:K | random-k:K:SEED")
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "Seed for sampled sources")->capture_default_str();
  cmd->add_flag("--no-baseline", a->no_baseline, "Skip storing logits at futures alone");
  cmd->add_option("-o,--output", a->output, ".elm file")->capture_default_str();
  cmd->callback([a, &g] { build_matrix(*a, g); });
}

}  // namespace logitrank::cli
