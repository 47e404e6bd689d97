#include <algorithm>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/error.hpp"
#include "logitrank/lingen.hpp"
#include "logitrank/model_io.hpp"

namespace logitrank::cli {
namespace {

struct LinGenArgs {
  std::string model;
  std::string target;
  std::string histories = "exhaustive:1";
  std::string futures = "closure:1";
  std::string selector = "all";
  std::size_t length = 4;
  std::size_t generations = 16;
  std::uint64_t seed = 0;
  double ridge = 0.0;
  bool nonsense_histories = false;
  bool nonsense_futures = false;
  bool single_token = false;
  bool one_hot = false;
  std::string output = "lingen";
};

void run_lingen(const LinGenArgs& a, const GlobalOptions& g) {
  const ModelFile file = load_model(a.model);
  const IsanOracle oracle(file.model);
  const Sequence target = a.target == "-" ? Sequence{} : parse_sequence(a.target);
  check_tokens(target, oracle.alphabet_size());
  auto hs = resolve_sequences(a.histories, oracle, a.seed, "histories");
  auto fs = resolve_sequences(a.futures, oracle, a.seed, "futures");
  if (a.nonsense_histories) hs = nonsense_permute(hs, Rng(a.seed, "nonsense-histories").key());
  if (a.nonsense_futures) fs = nonsense_permute(fs, Rng(a.seed, "nonsense-futures").key());

  LinGenCoefficients coeffs;
  std::string method;
  if (a.one_hot) {
    const auto it = std::find(hs.begin(), hs.end(), target);
    if (it == hs.end()) throw ValidationError("--one-hot needs the target among the histories");
    coeffs.target = target;
    coeffs.v = Vector::Zero(static_cast<Eigen::Index>(hs.size()));
    coeffs.v[it - hs.begin()] = 1.0;
    method = "one-hot";
  } else if (a.single_token) {
    coeffs = single_token_baseline(oracle, hs, target, a.ridge);
    method = "single-token";
  } else {
    coeffs = fit_lingen(oracle, hs, fs, target, ColumnSelector::parse(a.selector), a.ridge,
                        g.workers);
    method = "lingen";
  }
  const PerTokenKl kl = eval_per_token_kl(oracle, hs, coeffs, a.length, a.generations, a.seed,
                                          nullptr, g.workers);

  const auto dir = output_path(g, a.output);
  std::filesystem::create_directories(dir);
  std::ostringstream csv;
  csv << "position,kl_lingen_true,kl_true_lingen\n";
  for (std::size_t t = 0; t < a.length; ++t)
    csv << t + 1 << ',' << fmt(kl.kl_lingen_true[t]) << ',' << fmt(kl.kl_true_lingen[t]) << '\n';
  write_text(dir / "per_token_kl.csv", csv.str());

  nlohmann::json out = provenance(
      "lingen", {{"model", a.model},
                 {"model_info", file.info},
                 {"target", target},
                 {"histories", a.histories},
                 {"futures", a.futures},
                 {"selector", a.selector},
                 {"length", a.length},
                 {"generations", a.generations},
                 {"seed", a.seed},
                 {"ridge", a.ridge},
                 {"nonsense_histories", a.nonsense_histories},
                 {"nonsense_futures", a.nonsense_futures},
                 {"method", method}});
  out["histories_used"] = hs;
  out["futures_used"] = fs;
  out["coefficients"] = std::vector<double>(coeffs.v.data(), coeffs.v.data() + coeffs.v.size());
  out["fit_residual"] = coeffs.fit_residual;
  out["kl_lingen_true"] = kl.kl_lingen_true;
  out["kl_true_lingen"] = kl.kl_true_lingen;
  out["total_kl_lingen_true"] = kl.total_lingen_true;
  out["total_kl_true_lingen"] = kl.total_true_lingen;
  out["generations"] = kl.generations;
  write_json(dir / "lingen.json", out);
  std::cout << method << ": total KL(lingen||true) = " << fmt(kl.total_lingen_true)
            << ", KL(true||lingen) = " << fmt(kl.total_true_lingen) << "\n";
}

}  // namespace

void register_lingen(CLI::App& app, GlobalOptions& g) {
  auto a = std::make_shared<LinGenArgs>();
  auto* cmd = app.add_subcommand("lingen", "Fit and evaluate LinGen for one target history");
  cmd->add_option("--model", a->model, "Model file")->required();
  cmd->add_option("--target", a->target, "Target history, comma separated (- for Null)")
      ->required();
  cmd->add_option("--histories", a->histories, "History source")->capture_default_str();
  cmd->add_option("--futures", a->futures, "Future source")->capture_default_str();
  cmd->add_option("--selector", a->selector, "Column selector for the fit")->capture_default_str();
  cmd->add_option("--length", a->length, "Generated tokens m")->capture_default_str();
  cmd->add_option("--generations", a->generations, "Independent generations")
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "Random seed")->capture_default_str();
  cmd->add_option("--ridge", a->ridge, "Ridge lambda (0: pseudoinverse)")->capture_default_str();
  cmd->add_flag("--nonsense-histories", a->nonsense_histories, "Permute tokens across histories");
  cmd->add_flag("--nonsense-futures", a->nonsense_futures, "Permute tokens across futures");
  auto* st = cmd->add_flag("--single-token", a->single_token, "Fit on the empty future only");
  cmd->add_flag("--one-hot", a->one_hot, "Weight 1 on the target itself")->excludes(st);
  cmd->add_option("-o,--output", a->output, "Output directory")->capture_default_str();
  cmd->callback([a, &g] { run_lingen(*a, g); });
}

}  // namespace logitrank::cli
