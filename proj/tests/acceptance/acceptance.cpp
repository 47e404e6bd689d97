// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. argv[1] is the logitrank CLI used by the determinism check.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "logitrank/bounds.hpp"
#include "logitrank/constructions.hpp"
#include "logitrank/learner.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/lingen.hpp"
#include "logitrank/logit_matrix.hpp"
#include "logitrank/spectral.hpp"

namespace fs = std::filesystem;
using namespace logitrank;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

Outcome rank_bound() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (std::size_t i = 0; i < 50; ++i) {
    const std::size_t d = 1 + i % 3, k = 2 + (i / 3) % 2, T = 3 + (i / 6) % 3;
    const IsanOracle o(random_isan(d, k, T, 1000 + i));
    for (std::size_t t = 0; t < T; ++t) {
      // Futures stop one short of the horizon: a prefix of length T has no next token.
      const Vector s =
          singular_values_of(dense_logits(o, all_sequences(k, t), full_future_closure(k, T - t - 1)));
      if (s.size() > static_cast<Eigen::Index>(d) && s[0] > 0.0)
        worst = std::max(worst, s[static_cast<Eigen::Index>(d)] / s[0]);
    }
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {worst <= 1e-8 && secs < 120.0,
          "50 models, max sigma_{d+1}/sigma_1 = " + num(worst) + ", " + num(secs) + " s"};
}

Outcome realization_roundtrip() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TimeVaryingIsan m = random_isan(2, 2 + seed % 2, 4, 2000 + seed);
    const TimeVaryingIsan r = realize_from_logit_matrices(IsanOracle(m), 2);
    worst = std::max(worst, tv_distance(exact_distribution(m), exact_distribution(r)));
  }
  return {worst <= 1e-8, "10 seeds, max TV = " + num(worst)};
}

Outcome steal_random() {
  const auto start = std::chrono::steady_clock::now();
  std::size_t good = 0;
  double total = 0.0, worst = 0.0;
  std::uint64_t max_queries = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const TimeVaryingIsan m = random_isan(2, 3, 4, 3000 + seed);
    LearnerConfig c;
    c.epsilon = 0.05;
    c.seed = seed;
    const StealResult r = steal(IsanOracle(m), c);
    const double tv = tv_distance(exact_distribution(m), exact_distribution(r.model));
    good += tv <= 0.05;
    total += tv;
    worst = std::max(worst, tv);
    max_queries = std::max(max_queries, r.query_count);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double mean = total / 20;
  return {good >= 18 && mean <= 0.05 && max_queries <= 1000000 && secs < 600.0,
          std::to_string(good) + "/20 with TV <= 0.05, mean TV = " + num(mean) +
              ", max TV = " + num(worst) + ", max queries = " + std::to_string(max_queries) +
              ", " + num(secs) + " s"};
}

Outcome copying() {
  bool ok = true;
  double tv30 = 0.0;
  for (std::size_t n = 1; n <= 4; ++n)
    for (double c : {10.0, 20.0, 30.0}) {
      const double tv = tv_distance(exact_distribution(build_copying(n, c)), copying_distribution(n));
      ok = ok && tv <= 2.0 * static_cast<double>(n) / (1.0 + std::exp(c / 2));
      if (c == 30.0) {
        ok = ok && tv <= 1e-5;
        tv30 = std::max(tv30, tv);
      }
    }
  return {ok, "n = 1..4, C in {10,20,30}, max TV at C=30 = " + num(tv30)};
}

Outcome parity() {
  const std::vector<NoisyParitySpec> cases = {{{1, 0, 1}, 0.1}, {{1, 1, 0, 1, 1}, 0.25}, {{0, 1}, 0.01}};
  double worst = 0.0;
  bool dims = true;
  for (const auto& spec : cases) {
    const TimeVaryingIsan m = build_noisy_parity(spec);
    dims = dims && m.hidden_dim() == 2;
    worst = std::max(worst, tv_distance(exact_distribution(m), noisy_parity_distribution(spec)));
  }
  return {dims && worst <= 1e-10, "3 cases, hidden dim 2, max TV = " + num(worst)};
}

Outcome reduction() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const TimeVaryingIsan m = random_isan(2, 2, 3, 4000 + seed);
    worst = std::max(worst, tv_distance(exact_distribution(m),
                                        exact_distribution(time_invariant_reduction(m).unroll(3))));
  }
  return {worst <= 1e-10, "10 seeds, max TV = " + num(worst)};
}

// Runs the selective SSM forward directly from its spec.
Vector simulate_ssm(const SsmSpec& s, const Sequence& prefix) {
  Vector x = s.initial_state;
  Vector u = s.initial_input;
  const SsmMaps* maps = &s.initial_maps;
  for (std::size_t t = 0;; ++t) {
    const Vector y = maps->C * x + maps->D * u;
    if (t == prefix.size()) {
      const Vector l = s.readout * y;
      return l.array() - l.mean();
    }
    x = maps->A * x + maps->B * u;
    u = s.embedding.col(prefix[t]);
    maps = &s.token_maps[prefix[t]];
  }
}

Outcome ssm_embedding() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t k = 2 + seed % 2;
    const SsmSpec spec = random_ssm_spec(2 + seed % 2, 2, 2 + seed % 3, k, 4, 5000 + seed);
    const IsanOracle o(embed_ssm(spec));
    for (const auto& p : full_future_closure(k, 3))
      worst = std::max(worst, (o.query(p) - simulate_ssm(spec, p)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-9, "10 specs, all prefixes, max |diff| = " + num(worst)};
}

double tail_sum_oracle(const std::vector<double>& s, std::size_t r) {
  double tail = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += s[i] * s[i];
    if (i >= r) tail += s[i] * s[i];
  }
  return std::sqrt(tail / total);
}

Outcome spectral() {
  // Error curve against frozen tail sums and a direct recomputation.
  std::vector<double> harmonic(1000), slow(1000);
  for (std::size_t i = 0; i < 1000; ++i) {
    harmonic[i] = 1.0 / static_cast<double>(i + 1);
    slow[i] = std::pow(static_cast<double>(i + 1), -0.3);
  }
  double curve_err = 0.0;
  const auto rel = [](double a, double b) { return std::abs(a - b) / std::abs(b); };
  curve_err = std::max(curve_err, rel(low_rank_error_curve(harmonic, {10})[0].relative_error,
                                      0.2393352813548668));
  curve_err = std::max(curve_err, rel(low_rank_error_curve(slow, {250})[0].relative_error,
                                      0.6688409299930026));
  for (std::size_t r : {1, 5, 50, 500})
    for (const auto* s : {&harmonic, &slow})
      curve_err = std::max(curve_err,
                           rel(low_rank_error_curve(*s, {r})[0].relative_error, tail_sum_oracle(*s, r)));

  // avg-KL against the Frobenius ceiling.
  Rng rng(6000, "acceptance-kl");
  const IsanOracle o(random_isan(3, 3, 4, 6000));
  const LogitMatrix ref = build_logit_matrix(o, all_sequences(3, 2), full_future_closure(3, 1));
  std::size_t kl_violations = 0;
  for (int pair = 0; pair < 100; ++pair) {
    Matrix a = ref.values;
    const double scale = std::exp(rng.normal());
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] += scale * rng.normal();
    if (avg_kl(ref, a) > frobenius_kl_bound(ref, a)) ++kl_violations;
  }

  // Power-law recovery on exact spectra.
  double alpha_err = 0.0;
  for (double alpha : {0.3, 0.55, 0.6, 1.0, 1.5}) {
    std::vector<double> s = {100.0};
    for (int i = 1; i < 500; ++i) s.push_back(3.0 * std::pow(i, -alpha));
    alpha_err = std::max(alpha_err, std::abs(fit_power_law(s, s.size()).alpha - alpha));
  }
  return {curve_err <= 1e-3 && kl_violations == 0 && alpha_err <= 1e-6,
          "curve rel err = " + num(curve_err) + ", KL ceiling violations = " +
              std::to_string(kl_violations) + "/100, alpha err = " + num(alpha_err)};
}

std::vector<Sequence> without(std::vector<Sequence> all, const Sequence& s) {
  all.erase(std::remove(all.begin(), all.end(), s), all.end());
  return all;
}

Outcome lingen_exactness() {
  const std::size_t m_len = 8, horizon = 11;
  const auto futures = full_future_closure(2, 2);
  double worst = 0.0, worst_nonsense = 0.0;
  std::size_t baseline_worse = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const IsanOracle o(random_isan(3, 2, horizon, 7000 + seed));
    Rng pick(7000 + seed, "acceptance-target");
    const Sequence target = sequence_from_index(pick.below(8), 3, 2);
    const auto hs = without(all_sequences(2, 3), target);

    const LinGenCoefficients c = fit_lingen(o, hs, futures, target);
    const PerTokenKl kl = eval_per_token_kl(o, hs, c, m_len, 10, seed);
    worst = std::max(worst, kl.total_lingen_true);

    const auto nonsense = without(nonsense_permute(hs, seed), target);
    const LinGenCoefficients cn = fit_lingen(o, nonsense, futures, target);
    worst_nonsense =
        std::max(worst_nonsense, eval_per_token_kl(o, nonsense, cn, m_len, 10, seed).total_lingen_true);

    const LinGenCoefficients cb = single_token_baseline(o, hs, target);
    const PerTokenKl base = eval_per_token_kl(o, hs, cb, m_len, 10, seed);
    bool worse = true;
    for (std::size_t t = 1; t < m_len; ++t)
      worse = worse && base.kl_lingen_true[t] > kl.kl_lingen_true[t];
    baseline_worse += worse;
  }
  return {worst <= 1e-5 && worst_nonsense <= 1e-5 && baseline_worse >= 18,
          "max total KL = " + num(worst) + ", nonsense histories = " + num(worst_nonsense) +
              ", baseline worse at every t >= 2 in " + std::to_string(baseline_worse) + "/20"};
}

Outcome generalization_bound() {
  std::size_t violations = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const IsanOracle o(random_isan(2, 2, 6, 8000 + i));
    Rng pick(8000 + i, "acceptance-instance");
    const Sequence target = sequence_from_index(pick.below(4), 2, 2);
    const auto hs = without(all_sequences(2, 2), target);
    LinGenCoefficients c = fit_lingen(o, hs, full_future_closure(2, 3), target);
    for (Eigen::Index j = 0; j < c.v.size(); ++j) c.v[j] += 0.2 * pick.normal();
    const BoundReport b = bound_vs_measured(o, hs, c, 4);
    violations += b.violated || b.flipped_violated;
    if (b.kl_bound > 0.0) worst_ratio = std::max(worst_ratio, b.measured_kl_forward / b.kl_bound);
  }
  Rng rng(8100, "acceptance-flip");
  std::size_t flip_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + rng.below(8);
    Vector a(n), b(n);
    const double scale = std::exp(rng.normal());
    for (std::size_t j = 0; j < n; ++j) {
      a[j] = scale * rng.normal();
      b[j] = scale * rng.normal();
    }
    const Vector p = softmax(a), q = softmax(b);
    if (kl_divergence(q, p) > kl_flip_rhs(p, q)) ++flip_violations;
  }
  return {violations == 0 && flip_violations == 0,
          std::to_string(violations) + "/20 bound violations (max measured/bound = " +
              num(worst_ratio) + "), " + std::to_string(flip_violations) +
              "/1000 reverse-KL violations"};
}

int shell(const std::string& cmd) {
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file() || e.path().filename() == "log") continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    out[fs::relative(e.path(), dir).string()] = s.str();
  }
  return out;
}

Outcome cli_determinism(const std::string& cli) {
  const fs::path dir = fs::temp_directory_path() / "logitrank_acceptance_cli";
  const std::string d = "\"" + dir.string() + "\"";
  const std::vector<std::string> commands = {
      "make-model --kind random --dim 2 --alphabet 3 --horizon 4 --seed 5 -o random.isn",
      "make-model --kind copying --n 2 --sharpness 20 -o copy.isn",
      "make-model --kind noisy-parity --y 1,0,1 --flip-p 0.1 -o parity.isn",
      "make-model --kind ssm --dim 2 --alphabet 2 --horizon 4 --seed 2 -o ssm.isn",
      "make-model --kind random --dim 2 --alphabet 2 --horizon 8 --seed 6 -o lg.isn",
      "build-matrix --model " + d + "/random.isn --histories exhaustive:2 --futures closure:1 "
      "--selector random-k:2:3 -o m.elm",
      "build-matrix --model " + d + "/lg.isn --histories sampled:40:4 --futures closure:3 -o big.elm",
      "analyze --matrix " + d + "/big.elm --model " + d + "/lg.isn --baseline-seeds 4 -o analysis",
      "lingen --model " + d + "/lg.isn --target 0,1 --histories exhaustive:2 --futures closure:2 "
      "--length 4 --generations 6 --workers 2 -o lingen",
      "steal --model " + d + "/random.isn --samples 100 --seed 1 -o learned.isn",
      "verify --quick --seed 3",
  };
  std::size_t mismatches = 0, failures = 0;
  std::string first_bad;
  for (const auto& cmd : commands) {
    std::map<std::string, std::string> runs[2];
    for (auto& snap : runs) {
      fs::remove_all(dir);
      fs::create_directories(dir);
      if (cmd.find("--model") != std::string::npos)
        for (const auto& prereq : commands) {
          if (prereq.rfind("make-model", 0) != 0 && prereq.rfind("build-matrix", 0) != 0) continue;
          if (prereq == cmd) break;
          shell("\"" + cli + "\" --out-dir " + d + " " + prereq + " > /dev/null 2>&1");
        }
      const auto before = snapshot(dir);
      if (shell("\"" + cli + "\" --out-dir " + d + " " + cmd + " > " + d + "/log 2>&1") != 0) {
        ++failures;
        if (first_bad.empty()) first_bad = cmd;
      }
      snap = snapshot(dir);
      for (const auto& [k, v] : before) snap.erase(k);
    }
    if (runs[0] != runs[1] || runs[0].empty()) {
      ++mismatches;
      if (first_bad.empty()) first_bad = cmd;
    }
  }
  fs::remove_all(dir);
  return {mismatches == 0 && failures == 0,
          std::to_string(commands.size()) + " commands run twice, " + std::to_string(mismatches) +
              " artifact mismatches, " + std::to_string(failures) + " failures" +
              (first_bad.empty() ? "" : " (first: " + first_bad + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: logitrank_acceptance <path to logitrank cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"logit-rank-bound", rank_bound},
      {"realization-roundtrip", realization_roundtrip},
      {"steal-random-isan", steal_random},
      {"copying-construction", copying},
      {"noisy-parity-construction", parity},
      {"time-invariant-reduction", reduction},
      {"ssm-embedding", ssm_embedding},
      {"spectral-analysis", spectral},
      {"lingen-exactness", lingen_exactness},
      {"generalization-bound", generalization_bound},
      {"cli-determinism", [&] { return cli_determinism(cli); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << " [" << num(secs)
              << " s]" << std::endl;
    failed += !o.pass;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
