#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "logitrank/logit_matrix.hpp"
#include "logitrank/oracle.hpp"
#include "logitrank/probability.hpp"

namespace logitrank {

// Full nonincreasing spectrum; divided by sqrt(rows * cols) if normalized.
std::vector<double> singular_values(const Matrix& m, bool normalized = false);

// Best rank-r approximation in Frobenius norm (exact SVD). r = 0 gives
// the zero matrix; r above min(rows, cols) is a ValidationError.
Matrix truncate_rank(const Matrix& m, std::size_t rank);

struct RandomizedSvdOptions {
  std::size_t oversampling = 10;
  std::size_t power_iterations = 2;
  std::uint64_t seed = 0;
};

// Rank-r approximation through a Gaussian range finder. For matrices too
// large for a dense SVD; not exact.
Matrix randomized_truncate_rank(const Matrix& m, std::size_t rank,
                                const RandomizedSvdOptions& options = {});

struct PowerLawFit {
  double C = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0;     // weighted RMS of log-residuals
  std::size_t points = 0;    // data points actually used
  std::size_t skipped = 0;   // zero values dropped from the fit range
};

/// Weighted least-squares power law on a singular spectrum.
///
/// The largest value is dropped; the remaining values sigma_1..sigma_{n-1}
/// are regressed as
///   log sigma_i = c - alpha log(i/n) + beta log((n-i)/n)
/// with weight 1/i, where n = n_rows. Needs at least 8 values; zeros in
/// the fit range are skipped and counted. C = e^c n^alpha, so that
/// sigma_i ~ C i^{-alpha} away from the tail.
PowerLawFit fit_power_law(const std::vector<double>& singular_values,
                          std::size_t n_rows);

struct ErrorCurvePoint {
  std::size_t rank = 0;
  double relative_error = 0.0;
};

// sqrt(sum_{i>r} sigma_i^2) / ||M||_F for each r.
std::vector<ErrorCurvePoint> low_rank_error_curve(
    const std::vector<double>& singular_values, const std::vector<std::size_t>& ranks);

// Mean over (history, future) groups of
// KL(softmax(L_{h,f}) || softmax(A_{h,f})), softmax over stored columns.
double avg_kl(const LogitMatrix& reference, const Matrix& approx);

// 0.5 ||L - A||_F^2 / (|H| |F|): the Frobenius ceiling on avg_kl.
double frobenius_kl_bound(const LogitMatrix& reference, const Matrix& approx);

// Matrix whose every row is the logits at prefix f alone, on the same
// columns as `reference`.
Matrix rank1_baseline_matrix(const LogitMatrix& reference, const LogitOracle& oracle);
double rank1_baseline(const LogitMatrix& reference, const LogitOracle& oracle);

struct AngleReport {
  std::vector<double> cosines;  // nonincreasing, in [0, 1]
  double mean() const;
};

// Cosines of principal angles: singular values of U^T V, clipped to
// [0, 1]. Both inputs must have orthonormal columns.
AngleReport principal_angles(const Matrix& basis_u, const Matrix& basis_v);

// Orthonormal basis of the top-r left singular vectors. Throws
// ValidationError if r exceeds the numerical rank.
Matrix column_space(const Matrix& m, std::size_t rank, double rel_tol = 1e-8);

struct SubspaceBaseline {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> q05;
  std::vector<double> q50;
  std::vector<double> q95;
};

// Principal-angle cosines between pairs of independent uniformly random
// r-dimensional subspaces, one pair per seed.
SubspaceBaseline random_subspace_baseline(std::size_t ambient_dim, std::size_t rank,
                                          const std::vector<std::uint64_t>& seeds);

// Orthonormalized Gaussian ambient_dim x rank matrix.
Matrix random_orthonormal_basis(std::size_t ambient_dim, std::size_t rank,
                                std::uint64_t seed);

}  // namespace logitrank
