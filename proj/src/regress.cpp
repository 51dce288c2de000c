#include "smoothlab/regress.hpp"

#include <cblas.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace smoothlab {

Matrix design_matrix(const Matrix& X, int degree, std::size_t cap) {
  if (degree < 0) throw std::invalid_argument("design_matrix: degree must be >= 0");
  const int d = static_cast<int>(X.cols());
  auto basis = monomial_basis(d, degree, cap);
  auto parents = monomial_parents(basis);
  Matrix Phi(X.rows(), static_cast<Eigen::Index>(basis.size()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    Eigen::RowVectorXd row = X.row(i);
    eval_monomials(parents, row.data(), Phi.row(i).data());
  }
  return Phi;
}

SparsePolynomial polynomial_from_coefficients(const Vector& coef, int n_vars, int degree) {
  auto basis = monomial_basis(n_vars, degree);
  if (static_cast<Eigen::Index>(basis.size()) != coef.size())
    throw std::invalid_argument("coefficient count does not match the monomial basis");
  SparsePolynomial p(n_vars);
  for (std::size_t i = 0; i < basis.size(); ++i) p.add_term(basis[i], coef[static_cast<Eigen::Index>(i)]);
  return p;
}

namespace {

// Fits run in parallel shards of our own; BLAS threads underneath would oversubscribe.
const bool g_blas_single = [] {
  openblas_set_num_threads(1);
  return true;
}();

// Lower triangle of M^T M for row-major M.
Eigen::MatrixXd gram_lower(const Matrix& M) {
  const auto n = static_cast<blasint>(M.rows()), p = static_cast<blasint>(M.cols());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(p, p);
  // Row-major n x p storage is column-major p x n, so M^T M is a NoTrans update.
  cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, p, n, 1.0, M.data(), p, 0.0, A.data(), p);
  return A;
}

double mean_abs(const Vector& r) { return r.size() ? r.cwiseAbs().sum() / static_cast<double>(r.size()) : 0.0; }

// Weighted least squares via Cholesky on the diagonally equilibrated normal
// equations; on failure retries with a ridge (relative to the unit diagonal).
Vector weighted_solve(const Matrix& Phi, const Vector& w, const Vector& y, double ridge, bool& ridge_used) {
  Matrix Pw = Phi.array().colwise() * w.array().sqrt();
  Eigen::MatrixXd A = gram_lower(Pw);
  Vector b = Phi.transpose() * (w.array() * y.array()).matrix();
  Vector d = A.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
  A = d.asDiagonal() * A * d.asDiagonal();
  b = b.cwiseProduct(d);
  Eigen::LLT<Eigen::MatrixXd, Eigen::Lower> llt(A);
  Vector sol;
  bool ok = llt.info() == Eigen::Success && llt.matrixLLT().diagonal().minCoeff() > 1e-7;
  if (ok) {
    sol = llt.solve(b);
    ok = sol.allFinite();
  }
  if (!ok) {
    ridge_used = true;
    A.diagonal().array() += ridge;
    llt.compute(A);
    if (llt.info() == Eigen::Success) {
      sol = llt.solve(b);
    } else {
      sol = A.ldlt().solve(b);
    }
  }
  return sol.cwiseProduct(d);
}

// Interpolates the p rows with the smallest residuals (an LP vertex near the
// IRLS point); repeats while the objective drops.
void polish_vertex(const Matrix& Phi, const Vector& y, L1FitResult& res) {
  const Eigen::Index n = Phi.rows(), p = Phi.cols();
  if (p > n) return;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (int round = 0; round < 10; ++round) {
    Vector r = (y - Phi * res.coef).cwiseAbs();
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return r[a] < r[b]; });
    Eigen::MatrixXd A(p, p);
    Vector b(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      A.row(i) = Phi.row(order[static_cast<std::size_t>(i)]);
      b[i] = y[order[static_cast<std::size_t>(i)]];
    }
    Vector c = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(A).solve(b);
    if (!c.allFinite()) return;
    double obj = mean_abs(y - Phi * c);
    if (!(obj < res.objective)) break;
    res.coef = std::move(c);
    res.objective = obj;
  }
  if (p > 16 || n * p > 4096) return;

  // Row exchanges between interpolating sets, as in a simplex pivot, until
  // no single swap helps.
  Vector r = (y - Phi * res.coef).cwiseAbs();
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return r[a] < r[b]; });
  std::vector<Eigen::Index> active(order.begin(), order.begin() + p);
  auto solve_rows = [&](const std::vector<Eigen::Index>& rows, Vector& c) {
    Eigen::MatrixXd A(p, p);
    Vector b(p);
    for (Eigen::Index i = 0; i < p; ++i) {
      A.row(i) = Phi.row(rows[static_cast<std::size_t>(i)]);
      b[i] = y[rows[static_cast<std::size_t>(i)]];
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) return false;
    c = lu.solve(b);
    return c.allFinite();
  };
  for (int round = 0; round < 100; ++round) {
    double best = res.objective;
    std::vector<Eigen::Index> best_rows;
    Vector best_c;
    for (std::size_t i = 0; i < active.size(); ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::find(active.begin(), active.end(), j) != active.end()) continue;
        auto trial = active;
        trial[i] = j;
        Vector c;
        if (!solve_rows(trial, c)) continue;
        double obj = mean_abs(y - Phi * c);
        if (obj < best - 1e-15 * (1.0 + best)) {
          best = obj;
          best_rows = std::move(trial);
          best_c = std::move(c);
        }
      }
    if (best_rows.empty()) return;
    active = std::move(best_rows);
    res.coef = std::move(best_c);
    res.objective = best;
  }
}

}  // namespace

L1FitResult l1_fit_irls(const Matrix& Phi, const Vector& y, const IrlsOptions& opt) {
  if (Phi.rows() != y.size()) throw std::invalid_argument("l1_fit_irls: row count mismatch");
  if (Phi.rows() == 0 || Phi.cols() == 0) throw std::invalid_argument("l1_fit_irls: empty design");
  L1FitResult res;
  Vector w = Vector::Ones(y.size());
  res.coef = weighted_solve(Phi, w, y, opt.ridge, res.ridge_used);
  Vector r = y - Phi * res.coef;
  double obj = mean_abs(r), best = obj;
  for (double eps = opt.eps_start; eps >= opt.eps_end * (1.0 - 1e-9); eps *= opt.eps_factor) {
    for (int it = 0; it < opt.max_iter_per_stage; ++it) {
      w = r.cwiseAbs().cwiseMax(eps).cwiseInverse();
      Vector next = weighted_solve(Phi, w, y, opt.ridge, res.ridge_used);
      r = y - Phi * next;
      double on = mean_abs(r);
      ++res.iterations;
      double change = std::fabs(obj - on);
      obj = on;
      // Keep the best iterate; the smoothed problem is not the L1 objective.
      if (on <= best) {
        best = on;
        res.coef = std::move(next);
      }
      if (change <= opt.rel_tol * (1.0 + obj)) break;
    }
  }
  res.objective = mean_abs(y - Phi * res.coef);
  if (opt.polish) polish_vertex(Phi, y, res);
  return res;
}

L1FitResult l1_fit_exact_small(const Matrix& Phi, const Vector& y) {
  const Eigen::Index n = Phi.rows(), p = Phi.cols();
  if (n != y.size()) throw std::invalid_argument("l1_fit_exact_small: row count mismatch");
  if (n > 12 || p > 4 || p < 1 || n < 1) throw std::invalid_argument("l1_fit_exact_small: needs n <= 12 and 1 <= columns <= 4");
  L1FitResult best;
  bool found = false;
  if (n >= p) {
    std::vector<int> idx(static_cast<std::size_t>(p));
    std::iota(idx.begin(), idx.end(), 0);
    for (;;) {
      Eigen::MatrixXd A(p, p);
      Vector b(p);
      for (Eigen::Index i = 0; i < p; ++i) {
        A.row(i) = Phi.row(idx[static_cast<std::size_t>(i)]);
        b[i] = y[idx[static_cast<std::size_t>(i)]];
      }
      Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
      if (lu.isInvertible()) {
        Vector c = lu.solve(b);
        double obj = mean_abs(y - Phi * c);
        double tol = 1e-12 * (1.0 + obj);
        if (!found || obj < best.objective - tol ||
            (std::fabs(obj - best.objective) <= tol && c.norm() < best.coef.norm())) {
          best.coef = c;
          best.objective = obj;
          found = true;
        }
      }
      // next combination
      Eigen::Index i = p - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - p + i) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (Eigen::Index j = i + 1; j < p; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
  if (!found) {
    best = l1_fit_irls(Phi, y);
    best.fallback = true;
  }
  return best;
}

std::size_t threshold_errors(const Vector& scores, const std::vector<int>& labels, double t) {
  std::size_t e = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) e += sign(scores[i] - t) != labels[static_cast<std::size_t>(i)];
  return e;
}

ThresholdChoice threshold_select(const Vector& scores, const std::vector<int>& labels) {
  const auto n = static_cast<std::size_t>(scores.size());
  if (n == 0 || labels.size() != n) throw std::invalid_argument("threshold_select: need n >= 1 matching labels");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[static_cast<Eigen::Index>(a)] < scores[static_cast<Eigen::Index>(b)]; });
  std::vector<double> s(n);
  std::vector<std::size_t> pos(n + 1, 0), neg(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = scores[static_cast<Eigen::Index>(order[i])];
    pos[i + 1] = pos[i] + (labels[order[i]] > 0);
    neg[i + 1] = neg[i] + (labels[order[i]] <= 0);
  }
  std::vector<double> cand{-1.0, 1.0};
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (s[i] != s[i + 1]) cand.push_back(std::clamp(0.5 * (s[i] + s[i + 1]), -1.0, 1.0));
  ThresholdChoice best{0.0, n + 1};
  for (double t : cand) {
    // predictions are +1 exactly for scores >= t
    std::size_t idx = static_cast<std::size_t>(std::lower_bound(s.begin(), s.end(), t) - s.begin());
    std::size_t err = (neg[n] - neg[idx]) + pos[idx];
    bool better = err < best.errors ||
                  (err == best.errors && (std::fabs(t) < std::fabs(best.t) ||
                                          (std::fabs(t) == std::fabs(best.t) && t < best.t)));
    if (better) best = {t, err};
  }
  return best;
}

}  // namespace smoothlab
