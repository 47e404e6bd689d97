#include "logitrank/constructions.hpp"

#include <cmath>
#include <string>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"

namespace logitrank {

TimeVaryingIsan build_copying(std::size_t n, double sharpness) {
  if (n < 1) throw ValidationError("copying needs n >= 1");
  if (!std::isfinite(sharpness) || sharpness <= 0.0)
    throw ValidationError("copying sharpness must be positive and finite");
  const auto d = static_cast<Eigen::Index>(n + 1);
  const Eigen::Index bias = d - 1;
  TimeVaryingIsan m(2, n + 1, 2 * n);
  m.initial_state() = Vector::Zero(d);
  m.initial_state()[bias] = 1.0;
  // Reading phase: write bit t into coordinate t.
  for (std::size_t t = 1; t <= n; ++t) {
    m.transition(1, t)(static_cast<Eigen::Index>(t - 1), bias) = 1.0;
  }
  // Writing phase: token 0 scores C/2, token 1 scores C times the stored bit.
  for (std::size_t j = 1; j <= n; ++j) {
    Matrix& b = m.emission(n + j);
    b(0, bias) = sharpness / 2.0;
    b(1, static_cast<Eigen::Index>(j - 1)) = sharpness;
  }
  return m;
}

void NoisyParitySpec::validate() const {
  if (y.empty()) throw ValidationError("noisy parity needs n >= 1");
  for (Token b : y)
    if (b > 1) throw ValidationError("noisy parity key must be a bit vector");
  if (!(flip_probability > 0.0 && flip_probability < 1.0))
    throw ValidationError("noisy parity flip probability must lie in (0, 1)");
}

TimeVaryingIsan build_noisy_parity(const NoisyParitySpec& spec) {
  spec.validate();
  const std::size_t n = spec.y.size();
  TimeVaryingIsan m(2, 2, n + 1);
  Matrix swap(2, 2);
  swap << 0, 1, 1, 0;
  for (std::size_t t = 1; t <= n; ++t)
    if (spec.y[t - 1] == 1) m.transition(1, t) = swap;
  const double p = spec.flip_probability;
  Matrix& b = m.emission(n + 1);
  b << std::log(1.0 - p), std::log(p), std::log(p), std::log(1.0 - p);
  return m;
}

ExactDistribution noisy_parity_distribution(const NoisyParitySpec& spec) {
  spec.validate();
  const std::size_t n = spec.y.size();
  ExactDistribution d{2, n + 1, std::vector<double>(count_sequences(2, n + 1), 0.0)};
  const double base = std::ldexp(1.0, -static_cast<int>(n));
  for (std::size_t i = 0; i < d.probs.size(); ++i) {
    const Sequence s = sequence_from_index(i, n + 1, 2);
    Token parity = 0;
    for (std::size_t t = 0; t < n; ++t) parity ^= (s[t] & spec.y[t]);
    d.probs[i] = base * (s[n] == parity ? 1.0 - spec.flip_probability : spec.flip_probability);
  }
  return d;
}

ExactDistribution copying_distribution(std::size_t n) {
  if (n < 1) throw ValidationError("copying needs n >= 1");
  ExactDistribution d{2, 2 * n, std::vector<double>(count_sequences(2, 2 * n), 0.0)};
  const double base = std::ldexp(1.0, -static_cast<int>(n));
  const std::size_t half = count_sequences(2, n);
  for (std::size_t a = 0; a < half; ++a) d.probs[a * half + a] = base;
  return d;
}

void SsmSpec::validate() const {
  if (alphabet_size < 2) throw ValidationError("SSM alphabet size must be at least 2");
  if (horizon < 1) throw ValidationError("SSM horizon must be positive");
  const auto p = embedding.rows();
  const auto q = readout.cols();
  const auto d = initial_state.size();
  if (p < 1 || q < 1 || d < 1) throw ValidationError("SSM dimensions must be positive");
  if (embedding.cols() != static_cast<Eigen::Index>(alphabet_size))
    throw ValidationError("SSM embedding must have one column per token");
  if (readout.rows() != static_cast<Eigen::Index>(alphabet_size))
    throw ValidationError("SSM readout must have one row per token");
  if (initial_input.size() != p) throw ValidationError("SSM initial input has wrong size");
  if (token_maps.size() != alphabet_size)
    throw ValidationError("SSM needs maps for every token");
  auto check = [&](const SsmMaps& m, const std::string& where) {
    if (m.A.rows() != d || m.A.cols() != d || m.B.rows() != d || m.B.cols() != p ||
        m.C.rows() != q || m.C.cols() != d || m.D.rows() != q || m.D.cols() != p)
      throw ValidationError("SSM maps have wrong shapes (" + where + ")");
    require_finite(m.A, "SSM A");
    require_finite(m.B, "SSM B");
    require_finite(m.C, "SSM C");
    require_finite(m.D, "SSM D");
  };
  check(initial_maps, "initial input");
  for (std::size_t z = 0; z < alphabet_size; ++z) check(token_maps[z], "token " + std::to_string(z));
  require_finite(embedding, "SSM embedding");
  require_finite(readout, "SSM readout");
  require_finite(initial_input, "SSM initial input");
  require_finite(initial_state, "SSM initial state");
}

TimeVaryingIsan embed_ssm(const SsmSpec& spec) {
  spec.validate();
  const auto d = static_cast<Eigen::Index>(spec.state_dim());
  const auto q = static_cast<Eigen::Index>(spec.output_dim());
  const Eigen::Index dim = d + 2 * q + 1;
  const Eigen::Index cx = d, du = d + q, one = d + 2 * q;
  TimeVaryingIsan m(spec.alphabet_size, static_cast<std::size_t>(dim), spec.horizon);

  const SsmMaps& m1 = spec.initial_maps;
  Vector& h0 = m.initial_state();
  h0.setZero();
  h0.segment(0, d) = m1.A * spec.initial_state + m1.B * spec.initial_input;
  h0.segment(cx, q) = m1.C * spec.initial_state;
  h0.segment(du, q) = m1.D * spec.initial_input;
  h0[one] = 1.0;

  Matrix emit = Matrix::Zero(static_cast<Eigen::Index>(spec.alphabet_size), dim);
  emit.block(0, cx, emit.rows(), q) = spec.readout;
  emit.block(0, du, emit.rows(), q) = spec.readout;
  for (std::size_t t = 1; t <= spec.horizon; ++t) m.emission(t) = emit;

  for (std::size_t z = 0; z < spec.alphabet_size; ++z) {
    const SsmMaps& mz = spec.token_maps[z];
    const Vector u = spec.embedding.col(static_cast<Eigen::Index>(z));
    Matrix a = Matrix::Zero(dim, dim);
    a.block(0, 0, d, d) = mz.A;
    a.block(0, one, d, 1) = mz.B * u;
    a.block(cx, 0, q, d) = mz.C;
    a.block(du, one, q, 1) = mz.D * u;
    a(one, one) = 1.0;
    for (std::size_t t = 1; t < spec.horizon; ++t) m.transition(static_cast<Token>(z), t) = a;
  }
  return m;
}

namespace {

Matrix gaussian(Eigen::Index r, Eigen::Index c, Rng& rng, double scale) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal() * scale;
  return m;
}

}  // namespace

SsmSpec random_ssm_spec(std::size_t input_dim, std::size_t output_dim, std::size_t state_dim,
                        std::size_t alphabet_size, std::size_t horizon, std::uint64_t seed,
                        double scale) {
  if (input_dim < 1 || output_dim < 1 || state_dim < 1)
    throw ValidationError("SSM dimensions must be positive");
  Rng rng(seed, "random-ssm");
  const auto p = static_cast<Eigen::Index>(input_dim);
  const auto q = static_cast<Eigen::Index>(output_dim);
  const auto d = static_cast<Eigen::Index>(state_dim);
  const auto k = static_cast<Eigen::Index>(alphabet_size);
  const double a_scale = scale / std::sqrt(static_cast<double>(state_dim));
  auto maps = [&] {
    return SsmMaps{gaussian(d, d, rng, a_scale), gaussian(d, p, rng, scale),
                   gaussian(q, d, rng, scale), gaussian(q, p, rng, scale)};
  };
  SsmSpec s;
  s.alphabet_size = alphabet_size;
  s.horizon = horizon;
  s.embedding = gaussian(p, k, rng, 1.0);
  s.readout = gaussian(k, q, rng, 1.0);
  s.initial_input = gaussian(p, 1, rng, 1.0);
  s.initial_state = gaussian(d, 1, rng, 1.0);
  s.initial_maps = maps();
  for (std::size_t z = 0; z < alphabet_size; ++z) s.token_maps.push_back(maps());
  s.validate();
  return s;
}

TimeInvariantIsan time_invariant_reduction(const TimeVaryingIsan& model) {
  model.validate();
  const auto d = static_cast<Eigen::Index>(model.hidden_dim());
  const auto k = static_cast<Eigen::Index>(model.alphabet_size());
  const std::size_t T = model.horizon();
  const Eigen::Index D = d * static_cast<Eigen::Index>(T);
  TimeInvariantIsan out;
  out.alphabet_size = model.alphabet_size();
  out.x0 = Vector::Zero(D);
  out.x0.head(d) = model.initial_state();
  out.emission = Matrix::Zero(k, D);
  for (std::size_t t = 1; t <= T; ++t)
    out.emission.block(0, static_cast<Eigen::Index>(t - 1) * d, k, d) = model.emission(t);
  for (std::size_t z = 0; z < model.alphabet_size(); ++z) {
    Matrix a = Matrix::Zero(D, D);
    for (std::size_t t = 1; t < T; ++t) {
      const auto row = static_cast<Eigen::Index>(t) * d;
      const auto col = static_cast<Eigen::Index>(t - 1) * d;
      a.block(row, col, d, d) = model.transition(static_cast<Token>(z), t);
    }
    out.transitions.push_back(std::move(a));
  }
  return out;
}

TimeVaryingIsan random_isan(std::size_t hidden_dim, std::size_t alphabet_size,
                            std::size_t horizon, std::uint64_t seed, double scale) {
  TimeVaryingIsan m(alphabet_size, hidden_dim, horizon);
  Rng rng(seed, "random-isan");
  const auto d = static_cast<Eigen::Index>(hidden_dim);
  const auto k = static_cast<Eigen::Index>(alphabet_size);
  const double a_scale = scale / std::sqrt(static_cast<double>(hidden_dim));
  for (std::size_t t = 1; t < horizon; ++t)
    for (std::size_t z = 0; z < alphabet_size; ++z)
      m.transition(static_cast<Token>(z), t) = gaussian(d, d, rng, a_scale);
  for (std::size_t t = 1; t <= horizon; ++t) m.emission(t) = gaussian(k, d, rng, scale);
  return m;
}

TimeVaryingIsan uniform_isan(std::size_t alphabet_size, std::size_t horizon) {
  return TimeVaryingIsan(alphabet_size, 1, horizon);
}

}  // namespace logitrank
