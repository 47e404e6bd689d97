#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "logitrank/isan.hpp"

namespace logitrank {

// n-bit copying: a uniformly random string a followed by a copy of a.
// Hidden dimension n+1, horizon 2n; each copied bit is wrong with
// probability 1/(1+e^{C/2}).
TimeVaryingIsan build_copying(std::size_t n, double sharpness);

struct NoisyParitySpec {
  std::vector<Token> y;  // bits
  double flip_probability = 0.1;

  void validate() const;
};

// Hidden dimension 2: the state is the one-hot parity of <y, z> so far.
TimeVaryingIsan build_noisy_parity(const NoisyParitySpec& spec);

// Closed-form noisy-parity distribution over {0,1}^{n+1}.
ExactDistribution noisy_parity_distribution(const NoisyParitySpec& spec);

// Ideal n-bit copying distribution over {0,1}^{2n}.
ExactDistribution copying_distribution(std::size_t n);

/// Input-dependent maps of one selective state-space step.
struct SsmMaps {
  Matrix A;  // d x d
  Matrix B;  // d x p
  Matrix C;  // q x d
  Matrix D;  // q x p
};

/// Linear-in-state SSM with softmax readout over an alphabet.
///
/// x_t = A(u_t) x_{t-1} + B(u_t) u_t,  y_t = C(u_t) x_{t-1} + D(u_t) u_t,
/// z_t ~ softmax(U y_t), u_{t+1} = V e(z_t). The maps are tabulated per
/// token (for u = V e(z)) plus once for the fixed first input u_1.
struct SsmSpec {
  std::size_t alphabet_size = 2;
  std::size_t horizon = 1;
  Matrix embedding;      // V: p x |Sigma|
  Matrix readout;        // U: |Sigma| x q
  Vector initial_input;  // u_1
  Vector initial_state;  // x_0
  SsmMaps initial_maps;  // maps evaluated at u_1
  std::vector<SsmMaps> token_maps;  // maps evaluated at V e(z)

  std::size_t input_dim() const { return static_cast<std::size_t>(embedding.rows()); }
  std::size_t output_dim() const { return static_cast<std::size_t>(readout.cols()); }
  std::size_t state_dim() const { return static_cast<std::size_t>(initial_state.size()); }

  // Throws ValidationError on any dimension mismatch.
  void validate() const;
};

// ISAN with hidden dimension d + 2q + 1 carrying
// (x_t, C(u_t) x_{t-1}, D(u_t) u_t, 1) before emitting token t.
TimeVaryingIsan embed_ssm(const SsmSpec& spec);

// Gaussian SSM spec for tests and demos; deterministic in seed.
SsmSpec random_ssm_spec(std::size_t input_dim, std::size_t output_dim,
                        std::size_t state_dim, std::size_t alphabet_size,
                        std::size_t horizon, std::uint64_t seed,
                        double scale = 1.0);

// Stacks the T time steps into one network of dimension T*d: block
// sub-diagonal transitions, block-row readout, x0 in the first block.
TimeInvariantIsan time_invariant_reduction(const TimeVaryingIsan& model);

// A entries ~ N(0, 1) * scale / sqrt(d), B entries ~ N(0, 1) * scale,
// x0 = e_1. Deterministic in seed.
TimeVaryingIsan random_isan(std::size_t hidden_dim, std::size_t alphabet_size,
                            std::size_t horizon, std::uint64_t seed,
                            double scale = 1.0);

// Model whose every emission is zero.
TimeVaryingIsan uniform_isan(std::size_t alphabet_size, std::size_t horizon);

}  // namespace logitrank
