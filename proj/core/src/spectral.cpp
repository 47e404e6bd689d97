#include "logitrank/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "logitrank/error.hpp"
#include "logitrank/linalg.hpp"
#include "logitrank/rng.hpp"

namespace logitrank {

std::vector<double> singular_values(const Matrix& m, bool normalized) {
  const Vector s = singular_values_of(m);
  std::vector<double> out(s.data(), s.data() + s.size());
  if (normalized && m.size() > 0) {
    const double scale = std::sqrt(static_cast<double>(m.rows()) * static_cast<double>(m.cols()));
    for (double& v : out) v /= scale;
  }
  return out;
}

Matrix truncate_rank(const Matrix& m, std::size_t rank) {
  if (rank > static_cast<std::size_t>(std::min(m.rows(), m.cols())))
    throw ValidationError("truncation rank " + std::to_string(rank) +
                          " exceeds the smaller matrix dimension");
  if (rank == 0) return Matrix::Zero(m.rows(), m.cols());
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto r = static_cast<Eigen::Index>(rank);
  return svd.matrixU().leftCols(r) * svd.singularValues().head(r).asDiagonal() *
         svd.matrixV().leftCols(r).transpose();
}

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  return g;
}

Matrix thin_q(const Matrix& y) {
  Eigen::HouseholderQR<Matrix> qr(y);
  return qr.householderQ() * Matrix::Identity(y.rows(), std::min(y.rows(), y.cols()));
}

}  // namespace

Matrix randomized_truncate_rank(const Matrix& m, std::size_t rank,
                                const RandomizedSvdOptions& options) {
  if (rank > static_cast<std::size_t>(std::min(m.rows(), m.cols())))
    throw ValidationError("truncation rank exceeds the smaller matrix dimension");
  if (m.size() == 0 || rank == 0) return Matrix::Zero(m.rows(), m.cols());
  const auto l = std::min<Eigen::Index>(static_cast<Eigen::Index>(rank + options.oversampling),
                                        std::min(m.rows(), m.cols()));
  Rng rng(options.seed, "randomized-svd");
  Matrix q = thin_q(m * gaussian_matrix(m.cols(), l, rng));
  for (std::size_t i = 0; i < options.power_iterations; ++i) {
    q = thin_q(m.transpose() * q);
    q = thin_q(m * q);
  }
  const Matrix b = q.transpose() * m;
  return q * truncate_rank(b, rank);
}

PowerLawFit fit_power_law(const std::vector<double>& sv, std::size_t n_rows) {
  if (sv.size() < 8) throw ValidationError("power-law fit needs at least 8 singular values");
  if (n_rows < 2) throw ValidationError("power-law fit needs at least two rows");
  PowerLawFit fit;
  const double n = static_cast<double>(n_rows);
  std::vector<double> xs_a, xs_b, ys, ws;
  // sigma_i = sv[i] for i = 1..n-1 once the largest value is dropped.
  for (std::size_t i = 1; i < sv.size() && i < n_rows; ++i) {
    if (!(sv[i] > 0.0)) {
      ++fit.skipped;
      continue;
    }
    const double di = static_cast<double>(i);
    xs_a.push_back(std::log(di / n));
    xs_b.push_back(std::log((n - di) / n));
    ys.push_back(std::log(sv[i]));
    ws.push_back(1.0 / di);
  }
  fit.points = ys.size();
  if (fit.points < 3) throw ValidationError("power-law fit needs at least three positive values");
  const auto p = static_cast<Eigen::Index>(fit.points);
  Matrix x(p, 3);
  Vector y(p);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double sw = std::sqrt(ws[static_cast<std::size_t>(i)]);
    x(i, 0) = sw;
    x(i, 1) = -sw * xs_a[static_cast<std::size_t>(i)];
    x(i, 2) = sw * xs_b[static_cast<std::size_t>(i)];
    y[i] = sw * ys[static_cast<std::size_t>(i)];
  }
  const Vector beta = x.completeOrthogonalDecomposition().solve(y);
  const double c = beta[0];
  fit.alpha = beta[1];
  fit.beta = beta[2];
  fit.C = std::exp(c + fit.alpha * std::log(n));
  double wsum = 0.0;
  for (double w : ws) wsum += w;
  fit.residual = std::sqrt((x * beta - y).squaredNorm() / wsum);
  return fit;
}

std::vector<ErrorCurvePoint> low_rank_error_curve(const std::vector<double>& sv,
                                                  const std::vector<std::size_t>& ranks) {
  // tail[r] = sum_{i >= r} sigma_i^2, summed smallest first.
  std::vector<double> tail(sv.size() + 1, 0.0);
  for (std::size_t i = sv.size(); i-- > 0;) tail[i] = tail[i + 1] + sv[i] * sv[i];
  const double total = tail[0];
  std::vector<ErrorCurvePoint> out;
  out.reserve(ranks.size());
  for (std::size_t r : ranks) {
    const double t = r < tail.size() ? tail[r] : 0.0;
    out.push_back({r, total > 0.0 ? std::sqrt(t / total) : 0.0});
  }
  return out;
}

namespace {

void check_same_shape(const LogitMatrix& ref, const Matrix& approx) {
  if (approx.rows() != ref.values.rows() || approx.cols() != ref.values.cols())
    throw ValidationError("approximation shape differs from the reference matrix");
}

}  // namespace

double avg_kl(const LogitMatrix& reference, const Matrix& approx) {
  check_same_shape(reference, approx);
  const auto ranges = reference.future_ranges();
  double total = 0.0;
  std::size_t groups = 0;
  for (Eigen::Index h = 0; h < approx.rows(); ++h)
    for (const auto& [b, e] : ranges) {
      if (b == e) continue;
      const auto bi = static_cast<Eigen::Index>(b);
      const auto len = static_cast<Eigen::Index>(e - b);
      const Vector l = reference.values.row(h).segment(bi, len).transpose();
      const Vector a = approx.row(h).segment(bi, len).transpose();
      total += kl_from_logits(l, a);
      ++groups;
    }
  return groups ? total / static_cast<double>(groups) : 0.0;
}

double frobenius_kl_bound(const LogitMatrix& reference, const Matrix& approx) {
  check_same_shape(reference, approx);
  const double cells =
      static_cast<double>(reference.rows()) * static_cast<double>(reference.futures.size());
  if (cells == 0.0) return 0.0;
  return 0.5 * (reference.values - approx).squaredNorm() / cells;
}

Matrix rank1_baseline_matrix(const LogitMatrix& reference, const LogitOracle& oracle) {
  if (oracle.alphabet_size() != reference.alphabet_size)
    throw ValidationError("oracle alphabet differs from the matrix");
  Vector row(static_cast<Eigen::Index>(reference.cols()));
  const auto ranges = reference.future_ranges();
  for (std::size_t f = 0; f < reference.futures.size(); ++f) {
    const LogitVector l = oracle.query(reference.futures[f]);
    for (std::size_t c = ranges[f].first; c < ranges[f].second; ++c)
      row[static_cast<Eigen::Index>(c)] = l[reference.columns[c].token];
  }
  return row.transpose().replicate(static_cast<Eigen::Index>(reference.rows()), 1);
}

double rank1_baseline(const LogitMatrix& reference, const LogitOracle& oracle) {
  return avg_kl(reference, rank1_baseline_matrix(reference, oracle));
}

double AngleReport::mean() const {
  if (cosines.empty()) return 0.0;
  double s = 0.0;
  for (double c : cosines) s += c;
  return s / static_cast<double>(cosines.size());
}

namespace {

void require_orthonormal(const Matrix& b, const char* what) {
  const Matrix g = b.transpose() * b;
  if ((g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() > 1e-8)
    throw ValidationError(std::string(what) + " does not have orthonormal columns");
}

}  // namespace

AngleReport principal_angles(const Matrix& u, const Matrix& v) {
  if (u.rows() != v.rows()) throw ValidationError("subspaces live in different ambient spaces");
  if (u.cols() == 0 || v.cols() == 0) return {};
  require_orthonormal(u, "first basis");
  require_orthonormal(v, "second basis");
  AngleReport r;
  for (double c : singular_values(u.transpose() * v)) r.cosines.push_back(std::clamp(c, 0.0, 1.0));
  return r;
}

Matrix column_space(const Matrix& m, std::size_t rank, double rel_tol) {
  if (rank > numerical_rank(m, rel_tol))
    throw ValidationError("requested rank " + std::to_string(rank) +
                          " exceeds the numerical rank of the matrix");
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(static_cast<Eigen::Index>(rank));
}

Matrix random_orthonormal_basis(std::size_t ambient_dim, std::size_t rank, std::uint64_t seed) {
  if (rank > ambient_dim) throw ValidationError("subspace rank exceeds ambient dimension");
  Rng rng(seed, "random-subspace");
  return thin_q(gaussian_matrix(static_cast<Eigen::Index>(ambient_dim),
                                static_cast<Eigen::Index>(rank), rng));
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

SubspaceBaseline random_subspace_baseline(std::size_t ambient_dim, std::size_t rank,
                                          const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ValidationError("random subspace baseline needs at least one seed");
  std::vector<std::vector<double>> by_index(rank);
  for (std::uint64_t seed : seeds) {
    const Rng parent(seed, "subspace-pair");
    const Matrix u = random_orthonormal_basis(ambient_dim, rank, parent.substream("u").key());
    const Matrix v = random_orthonormal_basis(ambient_dim, rank, parent.substream("v").key());
    const AngleReport a = principal_angles(u, v);
    for (std::size_t i = 0; i < rank; ++i) by_index[i].push_back(a.cosines[i]);
  }
  SubspaceBaseline b;
  for (const auto& xs : by_index) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    b.mean.push_back(mean);
    b.stddev.push_back(xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0);
    b.q05.push_back(quantile(xs, 0.05));
    b.q50.push_back(quantile(xs, 0.50));
    b.q95.push_back(quantile(xs, 0.95));
  }
  return b;
}

}  // namespace logitrank
