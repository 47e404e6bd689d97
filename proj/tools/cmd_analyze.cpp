#include <algorithm>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "common.hpp"
#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/model_io.hpp"
#include "logitrank/spectral.hpp"

namespace logitrank::cli {
namespace {

struct AnalyzeArgs {
  std::string matrix;
  std::string model;
  std::string other;
  std::vector<std::size_t> ranks;
  std::size_t angle_rank = 0;
  std::size_t baseline_seeds = 32;
  std::uint64_t seed = 0;
  std::string output = "analysis";
};

const double kDownsize[] = {1.0, 2.0, 4.0, 8.0, 16.0};

// Baseline row over all stored columns, from the model or from the file.
std::optional<Vector> baseline_row(const LogitMatrix& m, const std::string& model_path) {
  if (!model_path.empty()) {
    const IsanOracle oracle(load_model(model_path).model);
    return rank1_baseline_matrix(m, oracle).row(0).transpose();
  }
  if (!m.metadata.contains("null_history_logits")) return std::nullopt;
  const auto& rows = m.metadata["null_history_logits"];
  const auto ranges = m.future_ranges();
  if (!rows.is_array() || rows.size() != m.futures.size())
    throw FormatError("null_history_logits has the wrong number of futures");
  Vector v(static_cast<Eigen::Index>(m.cols()));
  for (std::size_t f = 0; f < m.futures.size(); ++f) {
    if (rows[f].size() != ranges[f].second - ranges[f].first)
      throw FormatError("null_history_logits row width mismatch");
    for (std::size_t c = ranges[f].first; c < ranges[f].second; ++c)
      v[static_cast<Eigen::Index>(c)] = rows[f][c - ranges[f].first].get<double>();
  }
  return v;
}

std::vector<std::size_t> default_ranks(std::size_t max_rank) {
  std::vector<std::size_t> r;
  if (max_rank <= 64) {
    for (std::size_t i = 0; i <= max_rank; ++i) r.push_back(i);
  } else {
    r.push_back(0);
    for (std::size_t i = 1; i < max_rank; i *= 2) r.push_back(i);
    r.push_back(max_rank);
  }
  return r;
}

void analyze(const AnalyzeArgs& a, const GlobalOptions& g) {
  const LogitMatrix full = load_logit_matrix(a.matrix);
  const auto baseline = baseline_row(full, a.model);
  const auto dir = output_path(g, a.output);
  std::filesystem::create_directories(dir);

  std::ostringstream sv_csv, fit_csv, kl_csv;
  sv_csv << "downsize,index,singular_value,normalized\n";
  fit_csv << "downsize,rows,C,alpha,beta,residual,points,skipped\n";
  kl_csv << "downsize,rank,avg_kl,frobenius_bound,rank1_baseline\n";
  nlohmann::json sweeps = nlohmann::json::array();

  for (double factor : kDownsize) {
    const LogitMatrix m = factor == 1.0 ? full : downsize(full, factor);
    const auto sv = singular_values(m.values);
    const double norm =
        m.values.size() ? std::sqrt(static_cast<double>(m.rows()) * static_cast<double>(m.cols()))
                        : 1.0;
    for (std::size_t i = 0; i < sv.size(); ++i)
      sv_csv << fmt(factor) << ',' << i + 1 << ',' << fmt(sv[i]) << ',' << fmt(sv[i] / norm)
             << '\n';
    nlohmann::json entry = {{"downsize", factor},
                            {"rows", m.rows()},
                            {"cols", m.cols()},
                            {"numerical_rank", numerical_rank(m.values)}};
    try {
      const PowerLawFit fit = fit_power_law(sv, m.rows());
      fit_csv << fmt(factor) << ',' << m.rows() << ',' << fmt(fit.C) << ',' << fmt(fit.alpha)
              << ',' << fmt(fit.beta) << ',' << fmt(fit.residual) << ',' << fit.points << ','
              << fit.skipped << '\n';
      entry["power_law"] = {{"C", fit.C}, {"alpha", fit.alpha}, {"beta", fit.beta}};
    } catch (const ValidationError& e) {
      entry["power_law"] = {{"skipped", e.what()}};
    }

    double base_kl = -1.0;
    if (baseline) {
      const Vector row = baseline->head(static_cast<Eigen::Index>(m.cols()));
      base_kl = avg_kl(m, row.transpose().replicate(static_cast<Eigen::Index>(m.rows()), 1));
      entry["rank1_baseline"] = base_kl;
    }
    const std::size_t max_rank = std::min(m.rows(), m.cols());
    std::vector<std::size_t> ranks = a.ranks.empty() ? default_ranks(max_rank) : a.ranks;
    for (std::size_t r : ranks) {
      if (r > max_rank) continue;
      const Matrix approx = truncate_rank(m.values, r);
      kl_csv << fmt(factor) << ',' << r << ',' << fmt(avg_kl(m, approx)) << ','
             << fmt(frobenius_kl_bound(m, approx)) << ',' << (baseline ? fmt(base_kl) : "")
             << '\n';
    }
    sweeps.push_back(std::move(entry));
  }
  write_text(dir / "singular_values.csv", sv_csv.str());
  write_text(dir / "power_law.csv", fit_csv.str());
  write_text(dir / "kl_curve.csv", kl_csv.str());

  nlohmann::json summary = provenance(
      "analyze", {{"matrix", a.matrix},
                  {"model", a.model},
                  {"other", a.other},
                  {"ranks", a.ranks},
                  {"angle_rank", a.angle_rank},
                  {"baseline_seeds", a.baseline_seeds},
                  {"seed", a.seed},
                  {"matrix_metadata", full.metadata}});
  summary["sweep"] = std::move(sweeps);

  if (!a.other.empty()) {
    const LogitMatrix other = load_logit_matrix(a.other);
    if (other.rows() != full.rows())
      throw ValidationError("angle comparison needs matrices over the same histories");
    std::size_t r = a.angle_rank;
    if (r == 0)
      r = std::min({numerical_rank(full.values), numerical_rank(other.values), std::size_t{8}});
    const Matrix u = column_space(full.values, r);
    const Matrix v = column_space(other.values, r);
    const AngleReport angles = principal_angles(u, v);
    std::vector<std::uint64_t> seeds;
    for (std::size_t i = 0; i < a.baseline_seeds; ++i) seeds.push_back(Rng(a.seed, "angle-baseline", i).key());
    const SubspaceBaseline base = random_subspace_baseline(full.rows(), r, seeds);
    std::ostringstream csv;
    csv << "angle_index,cosine,random_baseline_mean\n";
    for (std::size_t i = 0; i < angles.cosines.size(); ++i)
      csv << i + 1 << ',' << fmt(angles.cosines[i]) << ',' << fmt(base.mean[i]) << '\n';
    write_text(dir / "angles.csv", csv.str());
    summary["angles"] = {{"rank", r},
                         {"mean_cosine", angles.mean()},
                         {"random_baseline_mean", base.mean},
                         {"random_baseline_q05", base.q05},
                         {"random_baseline_q95", base.q95}};
  }
  write_json(dir / "summary.json", summary);
  std::cout << "wrote analysis to " << dir.string() << "\n";
}

}  // namespace

void register_analyze(CLI::App& app, GlobalOptions& g) {
  auto a = std::make_shared<AnalyzeArgs>();
  auto* cmd = app.add_subcommand("analyze", "Spectra, power-law fits, KL curves and angles");
  cmd->add_option("--matrix", a->matrix, ".elm file")->required();
  cmd->add_option("--model", a->model, "Model file for the rank-1 baseline");
  cmd->add_option("--other", a->other, "Second .elm over the same histories for angles");
  cmd->add_option("--ranks", a->ranks, "Ranks for the KL curve")->delimiter(',');
  cmd->add_option("--angle-rank", a->angle_rank, "Subspace rank for angles (0: auto)");
  cmd->add_option("--baseline-seeds", a->baseline_seeds, "Random-subspace baseline draws")
      ->capture_default_str();
  cmd->add_option("--seed", a->seed, "Seed for the random baseline")->capture_default_str();
  cmd->add_option("-o,--output", a->output, "Output directory")->capture_default_str();
  cmd->callback([a, &g] { analyze(*a, g); });
}

}  // namespace logitrank::cli
