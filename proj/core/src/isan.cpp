#include "logitrank/isan.hpp"

#include <cmath>
#include <string>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"

namespace logitrank {

TimeVaryingIsan::TimeVaryingIsan(std::size_t alphabet_size, std::size_t hidden_dim,
                                 std::size_t horizon)
    : alphabet_size_(alphabet_size), hidden_dim_(hidden_dim), horizon_(horizon) {
  if (alphabet_size < 2) throw ValidationError("alphabet size must be at least 2");
  if (hidden_dim < 1) throw ValidationError("hidden dimension must be positive");
  if (horizon < 1) throw ValidationError("horizon must be positive");
  const auto d = static_cast<Eigen::Index>(hidden_dim);
  x0_ = Vector::Zero(d);
  x0_[0] = 1.0;
  transitions_.assign((horizon - 1) * alphabet_size, Matrix::Identity(d, d));
  emissions_.assign(horizon, Matrix::Zero(static_cast<Eigen::Index>(alphabet_size), d));
}

std::size_t TimeVaryingIsan::index(Token z, std::size_t step) const {
  if (z >= alphabet_size_)
    throw ValidationError("token " + std::to_string(z) + " outside alphabet");
  if (step < 1 || step >= horizon_)
    throw ValidationError("transition step " + std::to_string(step) + " outside [1, " +
                          std::to_string(horizon_) + ")");
  return (step - 1) * alphabet_size_ + z;
}

const Matrix& TimeVaryingIsan::transition(Token z, std::size_t step) const {
  return transitions_[index(z, step)];
}

Matrix& TimeVaryingIsan::transition(Token z, std::size_t step) {
  return transitions_[index(z, step)];
}

const Matrix& TimeVaryingIsan::emission(std::size_t step) const {
  if (step < 1 || step > horizon_)
    throw ValidationError("emission step " + std::to_string(step) + " outside [1, " +
                          std::to_string(horizon_) + "]");
  return emissions_[step - 1];
}

Matrix& TimeVaryingIsan::emission(std::size_t step) {
  if (step < 1 || step > horizon_)
    throw ValidationError("emission step " + std::to_string(step) + " outside [1, " +
                          std::to_string(horizon_) + "]");
  return emissions_[step - 1];
}

void TimeVaryingIsan::validate() const {
  if (alphabet_size_ < 2 || hidden_dim_ < 1 || horizon_ < 1)
    throw ValidationError("model has degenerate shape");
  const auto d = static_cast<Eigen::Index>(hidden_dim_);
  if (x0_.size() != d) throw ValidationError("initial state has wrong dimension");
  require_finite(x0_, "initial state");
  if (transitions_.size() != (horizon_ - 1) * alphabet_size_ ||
      emissions_.size() != horizon_)
    throw ValidationError("model has wrong number of parameter blocks");
  for (const auto& a : transitions_) {
    if (a.rows() != d || a.cols() != d) throw ValidationError("transition has wrong shape");
    require_finite(a, "transition");
  }
  for (const auto& b : emissions_) {
    if (b.rows() != static_cast<Eigen::Index>(alphabet_size_) || b.cols() != d)
      throw ValidationError("emission has wrong shape");
    require_finite(b, "emission");
  }
}

Vector TimeVaryingIsan::state_after(const Sequence& prefix) const {
  if (prefix.size() >= horizon_)
    throw ValidationError("prefix of length " + std::to_string(prefix.size()) +
                          " not shorter than horizon " + std::to_string(horizon_));
  Vector x = x0_;
  for (std::size_t i = 0; i < prefix.size(); ++i) x = transition(prefix[i], i + 1) * x;
  return x;
}

bool TimeVaryingIsan::operator==(const TimeVaryingIsan& other) const {
  return alphabet_size_ == other.alphabet_size_ && hidden_dim_ == other.hidden_dim_ &&
         horizon_ == other.horizon_ && x0_ == other.x0_ &&
         transitions_ == other.transitions_ && emissions_ == other.emissions_;
}

TimeVaryingIsan TimeInvariantIsan::unroll(std::size_t horizon) const {
  if (transitions.size() != alphabet_size)
    throw ValidationError("time-invariant ISAN needs one transition per token");
  TimeVaryingIsan m(alphabet_size, hidden_dim(), horizon);
  m.initial_state() = x0;
  for (std::size_t t = 1; t < horizon; ++t)
    for (std::size_t z = 0; z < alphabet_size; ++z)
      m.transition(static_cast<Token>(z), t) = transitions[z];
  for (std::size_t t = 1; t <= horizon; ++t) m.emission(t) = emission;
  m.validate();
  return m;
}

LogitVector next_logits(const TimeVaryingIsan& model, const Sequence& prefix) {
  check_tokens(prefix, model.alphabet_size());
  const Vector x = model.state_after(prefix);
  return mean_center(model.emission(prefix.size() + 1) * x);
}

Token sample_token(const Vector& logits, Rng& rng) {
  const Vector p = softmax(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<Token>(i);
  }
  // Rounding left u above the accumulated mass; take the last token with mass.
  for (Eigen::Index i = p.size(); i-- > 0;)
    if (p[i] > 0.0) return static_cast<Token>(i);
  return 0;
}

Sequence sample(const TimeVaryingIsan& model, Rng& rng) {
  Sequence s;
  s.reserve(model.horizon());
  Vector x = model.initial_state();
  for (std::size_t t = 1; t <= model.horizon(); ++t) {
    const Token z = sample_token(model.emission(t) * x, rng);
    s.push_back(z);
    if (t < model.horizon()) x = model.transition(z, t) * x;
  }
  return s;
}

Sequence sample(const TimeVaryingIsan& model, std::uint64_t seed) {
  Rng rng(seed, "sample");
  return sample(model, rng);
}

namespace {

void enumerate(const TimeVaryingIsan& m, std::size_t t, const Vector& x, double mass,
               std::size_t index, std::vector<double>& out) {
  const Vector logits = m.emission(t) * x;
  const Vector p = softmax(logits);
  const std::size_t k = m.alphabet_size();
  for (std::size_t z = 0; z < k; ++z) {
    const double pz = mass * p[static_cast<Eigen::Index>(z)];
    const std::size_t idx = index * k + z;
    if (t == m.horizon()) {
      out[idx] = pz;
    } else if (pz == 0.0) {
      continue;  // leaves stay zero
    } else {
      enumerate(m, t + 1, m.transition(static_cast<Token>(z), t) * x, pz, idx, out);
    }
  }
}

}  // namespace

ExactDistribution exact_distribution(const TimeVaryingIsan& model, std::size_t budget) {
  model.validate();
  const std::size_t n = count_sequences(model.alphabet_size(), model.horizon());
  if (n > budget)
    throw EnumerationInfeasible("enumeration infeasible: " + std::to_string(n) +
                                " sequences exceed budget " + std::to_string(budget));
  ExactDistribution d{model.alphabet_size(), model.horizon(), std::vector<double>(n, 0.0)};
  enumerate(model, 1, model.initial_state(), 1.0, 0, d.probs);
  return d;
}

}  // namespace logitrank
