#include "logitrank/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"

namespace logitrank {
namespace {

void check_k(std::size_t k) {
  if (k < 1) throw ValidationError("continuation length k must be positive");
}

// L(H, {f}) as an |H| x |Sigma| block.
Matrix column_block(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                    const Sequence& f) {
  Matrix b(static_cast<Eigen::Index>(histories.size()),
           static_cast<Eigen::Index>(oracle.alphabet_size()));
  for (std::size_t i = 0; i < histories.size(); ++i)
    b.row(static_cast<Eigen::Index>(i)) = oracle.query(concat(histories[i], f)).transpose();
  return b;
}

double min_eigenvalue(const Matrix& sym) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

WeightedFutures uniform_prefix_futures(std::size_t alphabet_size, std::size_t k) {
  check_k(k);
  WeightedFutures w;
  for (std::size_t t = 0; t < k; ++t) {
    const double p = 1.0 / (static_cast<double>(k) *
                            static_cast<double>(count_sequences(alphabet_size, t)));
    for (auto& f : all_sequences(alphabet_size, t)) {
      w.futures.push_back(std::move(f));
      w.weights.push_back(p);
    }
  }
  return w;
}

WeightedFutures sample_uniform_prefix_futures(std::size_t alphabet_size, std::size_t k,
                                              std::size_t n, Rng& rng) {
  check_k(k);
  WeightedFutures w;
  for (std::size_t i = 0; i < n; ++i) {
    Sequence f(rng.below(k));
    for (auto& z : f) z = static_cast<Token>(rng.below(alphabet_size));
    w.futures.push_back(std::move(f));
    w.weights.push_back(1.0 / static_cast<double>(n));
  }
  return w;
}

WeightedFutures continuation_futures(const LogitOracle& oracle, const Sequence& history,
                                     std::size_t k, std::size_t budget) {
  check_k(k);
  WeightedFutures w;
  for (std::size_t t = 0; t < k; ++t)
    for (auto& f : all_sequences(oracle.alphabet_size(), t, budget)) {
      const double p = continuation_probability(oracle, history, f) / static_cast<double>(k);
      w.futures.push_back(std::move(f));
      w.weights.push_back(p);
    }
  return w;
}

WeightedFutures sample_continuation_futures(const LogitOracle& oracle, const Sequence& history,
                                            std::size_t k, std::size_t n, Rng& rng) {
  check_k(k);
  WeightedFutures w;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = rng.below(k);
    w.futures.push_back(sample_continuation(oracle, history, t, rng));
    w.weights.push_back(1.0 / static_cast<double>(n));
  }
  return w;
}

Matrix second_moment(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                     const WeightedFutures& futures) {
  const auto n = static_cast<Eigen::Index>(histories.size());
  Matrix m = Matrix::Zero(n, n);
  for (std::size_t i = 0; i < futures.futures.size(); ++i) {
    const Matrix b = column_block(oracle, histories, futures.futures[i]);
    m.noalias() += futures.weights[i] * (b * b.transpose());
  }
  return 0.5 * (m + m.transpose());
}

double coverage_alpha(const Matrix& m1, const Matrix& m2, double gamma) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (m1.rows() != m1.cols() || m2.rows() != m2.cols() || m1.rows() != m2.rows())
    throw ValidationError("coverage moments must be square and of equal size");
  const Matrix id = Matrix::Identity(m1.rows(), m1.cols());
  auto slack = [&](double a) { return min_eigenvalue(a * m1 + gamma * id - m2); };
  if (slack(0.0) >= 0.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (slack(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e300) return std::numeric_limits<double>::infinity();
  }
  // The slack is concave and nondecreasing in alpha, so bisection finds the
  // boundary; hi always stays feasible.
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slack(mid) >= 0.0 ? hi : lo) = mid;
  }
  return hi;
}

double coverage_params(const LogitOracle& oracle, const std::vector<Sequence>& h0,
                       const WeightedFutures& p1, const WeightedFutures& p2, double gamma) {
  return coverage_alpha(second_moment(oracle, h0, p1), second_moment(oracle, h0, p2), gamma);
}

double regression_error(const LogitOracle& oracle, const Sequence& target,
                        const std::vector<Sequence>& histories, const Vector& v,
                        const WeightedFutures& p1) {
  if (v.size() != static_cast<Eigen::Index>(histories.size()))
    throw ValidationError("one coefficient per history required");
  double err = 0.0;
  for (std::size_t i = 0; i < p1.futures.size(); ++i) {
    const Sequence& f = p1.futures[i];
    const Vector t = oracle.query(concat(target, f));
    const Vector fit = histories.empty()
                           ? Vector::Zero(t.size())
                           : Vector(column_block(oracle, histories, f).transpose() * v);
    err += p1.weights[i] * (t - fit).squaredNorm();
  }
  return err;
}

double kl_bound(double alpha, double delta, double gamma, double v_norm, std::size_t k) {
  return 2.0 * static_cast<double>(k) *
         std::sqrt(alpha * delta + gamma * (1.0 + v_norm * v_norm));
}

double flipped_bound(double logit_bound, std::size_t k, std::size_t alphabet_size,
                     double forward_kl) {
  const double c = static_cast<double>(k) *
                   (std::log(static_cast<double>(alphabet_size)) + 2.0 * logit_bound);
  return (1.0 + c) * std::sqrt(2.0 * std::max(forward_kl, 0.0));
}

double kl_flip_rhs(const Vector& p, const Vector& q) {
  double c = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p[i] > 0.0)) return std::numeric_limits<double>::infinity();
    c = std::max(c, -std::log(p[i]));
  }
  return (1.0 + c) * std::sqrt(2.0 * kl_divergence(p, q));
}

nlohmann::json BoundReport::to_json() const {
  return {{"alpha", alpha},
          {"gamma", gamma},
          {"delta", delta},
          {"v_norm", v_norm},
          {"k", k},
          {"kl_bound", kl_bound},
          {"measured_kl_forward", measured_kl_forward},
          {"measured_kl_reverse", measured_kl_reverse},
          {"logit_bound", logit_bound},
          {"flipped_bound", flipped_bound},
          {"exact", exact},
          {"violated", violated},
          {"flipped_violated", flipped_violated}};
}

namespace {

// log-probabilities of one continuation under both processes, plus the
// largest true logit magnitude seen on the way.
struct PathScore {
  double log_truth = 0.0;
  double log_lingen = 0.0;
  double max_logit = 0.0;
};

PathScore score_path(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                     const LinGenCoefficients& coeffs, const Sequence& f,
                     const std::optional<double>& logit_bound) {
  PathScore s;
  Sequence cont;
  for (Token z : f) {
    const Sequence prefix = concat(coeffs.target, cont);
    const Vector truth = oracle.query(prefix);
    const double mag = truth.cwiseAbs().maxCoeff();
    if (logit_bound && mag > *logit_bound)
      throw InvariantViolation("logit-bound", "|logit| = " + std::to_string(mag) +
                                                  " exceeds " + std::to_string(*logit_bound) +
                                                  " after prefix '" + to_string(prefix) + "'");
    s.max_logit = std::max(s.max_logit, mag);
    const Vector lg = lingen_logits(oracle, histories, coeffs.v, cont);
    s.log_truth += truth[z] - log_sum_exp(truth);
    s.log_lingen += lg[z] - log_sum_exp(lg);
    cont.push_back(z);
  }
  return s;
}

}  // namespace

BoundReport bound_vs_measured(const LogitOracle& oracle, const std::vector<Sequence>& histories,
                              const LinGenCoefficients& coeffs, std::size_t k,
                              const BoundOptions& options) {
  check_k(k);
  if (coeffs.v.size() != static_cast<Eigen::Index>(histories.size()))
    throw ValidationError("one coefficient per history required");
  std::size_t longest = coeffs.target.size();
  for (const auto& h : histories) longest = std::max(longest, h.size());
  if (longest + k > oracle.horizon())
    throw ValidationError("history plus k continuation tokens runs past the horizon");

  const std::size_t sigma = oracle.alphabet_size();
  BoundReport r;
  r.gamma = options.gamma;
  r.k = k;
  r.v_norm = coeffs.v.norm();
  r.exact = count_sequences(sigma, k) <= options.enumeration_budget;

  std::vector<Sequence> h0{coeffs.target};
  h0.insert(h0.end(), histories.begin(), histories.end());
  Rng rng(options.seed, "bound-harness");
  WeightedFutures p1, p2;
  if (r.exact) {
    p1 = uniform_prefix_futures(sigma, k);
    p2 = continuation_futures(oracle, coeffs.target, k, options.enumeration_budget);
  } else {
    Rng r1 = rng.substream("p1"), r2 = rng.substream("p2");
    p1 = sample_uniform_prefix_futures(sigma, k, options.samples, r1);
    p2 = sample_continuation_futures(oracle, coeffs.target, k, options.samples, r2);
  }
  r.alpha = coverage_params(oracle, h0, p1, p2, options.gamma);
  r.delta = regression_error(oracle, coeffs.target, histories, coeffs.v, p1);
  r.kl_bound = kl_bound(r.alpha, r.delta, r.gamma, r.v_norm, k);

  double max_logit = 0.0;
  if (r.exact) {
    for (const auto& f : all_sequences(sigma, k, options.enumeration_budget)) {
      const PathScore s = score_path(oracle, histories, coeffs, f, options.logit_bound);
      max_logit = std::max(max_logit, s.max_logit);
      const double pt = std::exp(s.log_truth), pl = std::exp(s.log_lingen);
      if (pt > 0.0) r.measured_kl_forward += pt * (s.log_truth - s.log_lingen);
      if (pl > 0.0) r.measured_kl_reverse += pl * (s.log_lingen - s.log_truth);
    }
  } else {
    Rng rt = rng.substream("truth-paths"), rl = rng.substream("lingen-paths");
    for (std::size_t i = 0; i < options.samples; ++i) {
      const Sequence f = sample_continuation(oracle, coeffs.target, k, rt);
      const PathScore s = score_path(oracle, histories, coeffs, f, options.logit_bound);
      max_logit = std::max(max_logit, s.max_logit);
      r.measured_kl_forward += (s.log_truth - s.log_lingen) / static_cast<double>(options.samples);
      const Sequence g = lingen_generate(oracle, histories, coeffs.v, k, rl).tokens;
      const PathScore sg = score_path(oracle, histories, coeffs, g, options.logit_bound);
      max_logit = std::max(max_logit, sg.max_logit);
      r.measured_kl_reverse += (sg.log_lingen - sg.log_truth) / static_cast<double>(options.samples);
    }
  }
  r.measured_kl_forward = std::max(r.measured_kl_forward, 0.0);
  r.measured_kl_reverse = std::max(r.measured_kl_reverse, 0.0);
  r.logit_bound = options.logit_bound.value_or(max_logit);
  r.flipped_bound = flipped_bound(r.logit_bound, k, sigma, r.kl_bound);
  r.violated = r.measured_kl_forward > r.kl_bound + 1e-9;
  r.flipped_violated = r.measured_kl_reverse > r.flipped_bound + 1e-9;
  return r;
}

ConcentrationReport moment_concentration_check(const LogitOracle& oracle,
                                               const std::vector<Sequence>& histories,
                                               const std::function<Sequence(Rng&)>& sampler,
                                               std::size_t samples, double epsilon_target,
                                               std::uint64_t seed,
                                               std::size_t reference_multiplier) {
  if (samples < 1) throw ValidationError("concentration check needs at least one sample");
  if (reference_multiplier < 1) throw ValidationError("reference multiplier must be >= 1");
  ConcentrationReport r;
  r.samples = samples;
  r.reference_samples = samples * reference_multiplier;
  const auto n = static_cast<Eigen::Index>(histories.size());
  Matrix small = Matrix::Zero(n, n), ref = Matrix::Zero(n, n);
  double max_entry = 0.0;
  for (std::size_t i = 0; i < r.reference_samples; ++i) {
    Rng rng(seed, "concentration", i);
    const Matrix b = column_block(oracle, histories, sampler(rng));
    const Matrix outer = b * b.transpose();
    if (i < samples) small += outer;
    ref += outer;
    r.max_sample_norm = std::max(r.max_sample_norm, b.norm());
    if (b.size()) max_entry = std::max(max_entry, b.cwiseAbs().maxCoeff());
  }
  small /= static_cast<double>(samples);
  ref /= static_cast<double>(r.reference_samples);
  r.deviation = spectral_norm(small - ref);
  r.within_target = r.deviation <= epsilon_target;
  r.norm_ceiling = max_entry * std::sqrt(static_cast<double>(histories.size()) *
                                         static_cast<double>(oracle.alphabet_size()));
  return r;
}

}  // namespace logitrank
