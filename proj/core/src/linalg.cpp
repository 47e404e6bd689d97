#include "logitrank/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "logitrank/error.hpp"

namespace logitrank {

Vector singular_values_of(const Matrix& m) {
  if (m.size() == 0) return Vector();
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues();
}

std::size_t numerical_rank(const Matrix& m, double rel_tol, double scale) {
  const Vector s = singular_values_of(m);
  if (s.size() == 0) return 0;
  if (scale < 0.0) scale = s[0];
  const double cut = std::max(rel_tol * scale, kRankAbsFloor);
  std::size_t r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++r;
  return r;
}

Matrix solve_row_combination(const Matrix& basis, const Matrix& target, double rel_cutoff) {
  if (basis.cols() != target.cols())
    throw ValidationError("solve_row_combination: column counts differ");
  if (basis.rows() == 0) return Matrix::Zero(target.rows(), 0);
  // X basis = target  <=>  basis^T X^T = target^T
  Eigen::BDCSVD<Matrix> svd(basis.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cut = s.size() ? std::max(rel_cutoff * s[0], kRankAbsFloor) : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) inv[i] = 1.0 / s[i];
  const Matrix xt =
      svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * target.transpose());
  return xt.transpose();
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return singular_values_of(m)[0];
}

void require_finite(const Matrix& m, const char* what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (!std::isfinite(m(i, j)))
        throw ValidationError(std::string(what) + ": non-finite entry at (" +
                              std::to_string(i) + ", " + std::to_string(j) + ")");
}

}  // namespace logitrank
