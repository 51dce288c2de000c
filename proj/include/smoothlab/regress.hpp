#pragma once

#include "smoothlab/core.hpp"
#include "smoothlab/polynomial.hpp"

#include <vector>

namespace smoothlab {

// Columns are the graded-lex monomials of degree <= ell; column 0 is the constant.
Matrix design_matrix(const Matrix& X, int degree, std::size_t cap = kTermCap);
SparsePolynomial polynomial_from_coefficients(const Vector& coef, int n_vars, int degree);

struct IrlsOptions {
  double eps_start = 1e-1;
  double eps_end = 1e-6;
  double eps_factor = 0.1;
  int max_iter_per_stage = 50;
  double rel_tol = 1e-10;
  double ridge = 1e-10;
  bool polish = true;  // snap to a nearby interpolating vertex if that lowers the objective
};

struct L1FitResult {
  Vector coef;
  double objective = 0.0;   // mean |y - Phi coef|
  int iterations = 0;
  bool ridge_used = false;
  bool fallback = false;    // exact solver fell back to IRLS
};

L1FitResult l1_fit_irls(const Matrix& Phi, const Vector& y, const IrlsOptions& opt = {});
// Enumerates interpolating row subsets; n <= 12 and columns <= 4.
L1FitResult l1_fit_exact_small(const Matrix& Phi, const Vector& y);

struct ThresholdChoice {
  double t = 0.0;
  std::size_t errors = 0;
};
ThresholdChoice threshold_select(const Vector& scores, const std::vector<int>& labels);
std::size_t threshold_errors(const Vector& scores, const std::vector<int>& labels, double t);

}  // namespace smoothlab
