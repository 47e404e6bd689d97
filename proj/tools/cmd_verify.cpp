#include <chrono>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/constructions.hpp"
#include "logitrank/error.hpp"
#include "logitrank/learner.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/logit_matrix.hpp"
#include "logitrank/model_io.hpp"
#include "logitrank/bounds.hpp"

namespace logitrank::cli {
namespace {

struct VerifyArgs {
  bool quick = false;
  std::string model;
  std::uint64_t seed = 0;
  std::string output = "verify.json";
};

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Largest rank of L(Sigma^t, Sigma^{<=T-t-1}) over t.
std::size_t max_logit_rank(const TimeVaryingIsan& m) {
  const IsanOracle o(m);
  std::size_t r = 0;
  for (std::size_t t = 0; t < m.horizon(); ++t) {
    const Matrix l = dense_logits(o, all_sequences(m.alphabet_size(), t, 1u << 14),
                                  full_future_closure(m.alphabet_size(), m.horizon() - t - 1,
                                                      1u << 14));
    r = std::max(r, numerical_rank(l));
  }
  return r;
}

Check rank_check(std::size_t n, std::uint64_t seed) {
  Check c{"logit-rank-bound", true, ""};
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rng r(seed, "verify-rank", i);
    Rng pick = r.substream("shape");
    const std::size_t d = 1 + pick.below(3), k = 2 + pick.below(2), T = 3 + pick.below(3);
    const TimeVaryingIsan m = random_isan(d, k, T, r.key());
    const IsanOracle o(m);
    for (std::size_t t = 0; t < T; ++t) {
      const auto s = singular_values_of(
          dense_logits(o, all_sequences(k, t), full_future_closure(k, T - t - 1)));
      if (static_cast<std::size_t>(s.size()) > d && s[0] > 0.0)
        worst = std::max(worst, s[static_cast<Eigen::Index>(d)] / s[0]);
    }
  }
  c.pass = worst <= 1e-8;
  c.detail = std::to_string(n) + " models, worst sigma_{d+1}/sigma_1 = " + fmt(worst);
  return c;
}

Check roundtrip_check(std::size_t n, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TimeVaryingIsan m = random_isan(2, 2, 4, Rng(seed, "verify-roundtrip", i).key());
    const TimeVaryingIsan r = realize_from_logit_matrices(IsanOracle(m), 2);
    worst = std::max(worst, tv_distance(exact_distribution(m), exact_distribution(r)));
  }
  return {"realization-roundtrip", worst <= 1e-8,
          std::to_string(n) + " models, worst TV = " + fmt(worst)};
}

Check reduction_check(std::size_t n, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const TimeVaryingIsan m = random_isan(2, 2, 3, Rng(seed, "verify-reduction", i).key());
    const TimeVaryingIsan u = time_invariant_reduction(m).unroll(3);
    worst = std::max(worst, tv_distance(exact_distribution(m), exact_distribution(u)));
  }
  return {"time-invariant-reduction", worst <= 1e-10,
          std::to_string(n) + " models, worst TV = " + fmt(worst)};
}

Check generalization_check(std::size_t n, std::uint64_t seed) {
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rng r(seed, "verify-generalization", i);
    const TimeVaryingIsan m = random_isan(2, 2, 6, r.key());
    const IsanOracle o(m);
    Rng pick = r.substream("instance");
    const Sequence target = sequence_from_index(pick.below(4), 2, 2);
    std::vector<Sequence> hs;
    for (const auto& h : all_sequences(2, 2))
      if (h != target) hs.push_back(h);
    LinGenCoefficients c = fit_lingen(o, hs, full_future_closure(2, 3), target);
    for (Eigen::Index j = 0; j < c.v.size(); ++j) c.v[j] += 0.2 * pick.normal();
    const BoundReport b = bound_vs_measured(o, hs, c, 4);
    if (b.violated || b.flipped_violated) ++violations;
    if (b.kl_bound > 0.0) worst_ratio = std::max(worst_ratio, b.measured_kl_forward / b.kl_bound);
  }
  return {"generalization-bound", violations == 0,
          std::to_string(n) + " instances, " + std::to_string(violations) +
              " violations, max measured/bound = " + fmt(worst_ratio)};
}

std::vector<Check> model_checks(const std::string& path) {
  std::vector<Check> out;
  ModelFile file;
  try {
    file = load_model(path);
  } catch (const Error& e) {
    out.push_back({"model-format", false, e.what()});
    return out;
  }
  out.push_back({"model-format", true, "loaded " + path});
  const TimeVaryingIsan& m = file.model;
  std::size_t rank = 0;
  try {
    rank = max_logit_rank(m);
  } catch (const EnumerationInfeasible& e) {
    out.push_back({"model-rank", false, e.what()});
    return out;
  }
  out.push_back({"model-rank", rank <= m.hidden_dim(),
                 "max logit rank " + std::to_string(rank) + ", hidden dim " +
                     std::to_string(m.hidden_dim())});
  const TimeVaryingIsan r = realize_from_logit_matrices(IsanOracle(m), std::max<std::size_t>(rank, 1));
  const double tv = tv_distance(exact_distribution(m), exact_distribution(r));
  out.push_back({"model-roundtrip", tv <= 1e-8, "TV = " + fmt(tv)});
  return out;
}

int run_verify(const VerifyArgs& a, const GlobalOptions& g) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Check> checks;
  if (!a.model.empty()) {
    checks = model_checks(a.model);
  } else {
    checks.push_back(rank_check(a.quick ? 10 : 50, a.seed));
    checks.push_back(roundtrip_check(a.quick ? 3 : 10, a.seed));
    checks.push_back(reduction_check(a.quick ? 3 : 10, a.seed));
    checks.push_back(generalization_check(a.quick ? 4 : 20, a.seed));
  }
  bool all = true;
  nlohmann::json results = nlohmann::json::array();
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    all = all && c.pass;
    results.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  }
  nlohmann::json report =
      provenance("verify", {{"quick", a.quick}, {"model", a.model}, {"seed", a.seed}});
  report["checks"] = results;
  report["pass"] = all;
  write_json(output_path(g, a.output), report);
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "verify finished in " << fmt(secs) << " s\n";
  return all ? 0 : 3;
}

}  // namespace

void register_verify(CLI::App& app, GlobalOptions& g, int& status) {
  auto a = std::make_shared<VerifyArgs>();
  auto* cmd = app.add_subcommand("verify", "Run the rank, realization, reduction and bound checks");
  cmd->add_flag("--quick", a->quick, "Smaller suite");
  cmd->add_option("--model", a->model, "Check one model file instead of the random suite");
  cmd->add_option("--seed", a->seed, "Suite seed")->capture_default_str();
  cmd->add_option("-o,--output", a->output, "Report JSON")->capture_default_str();
  cmd->callback([a, &g, &status] { status = run_verify(*a, g); });
}

}  // namespace logitrank::cli
