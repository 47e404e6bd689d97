#pragma once

#include <cstddef>

#include "logitrank/probability.hpp"

namespace logitrank {

// Default relative threshold for numerical rank decisions.
inline constexpr double kRankRelTol = 1e-8;
// Singular values at or below this are treated as zero whatever the scale.
inline constexpr double kRankAbsFloor = 1e-13;

Vector singular_values_of(const Matrix& m);

// Number of singular values above max(rel_tol * scale, kRankAbsFloor).
// A negative scale means "use this matrix's largest singular value".
std::size_t numerical_rank(const Matrix& m, double rel_tol = kRankRelTol,
                           double scale = -1.0);

// Minimum-norm X minimising ||X * basis - target||_F, with singular
// values of `basis` below rel_cutoff * sigma_1 discarded.
Matrix solve_row_combination(const Matrix& basis, const Matrix& target,
                             double rel_cutoff = 1e-10);

double spectral_norm(const Matrix& m);

// Throws ValidationError if any entry is NaN or infinite.
void require_finite(const Matrix& m, const char* what);

}  // namespace logitrank
