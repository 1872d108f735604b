#include "qkd/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qkd/error.hpp"

namespace qkd {

LinearProgram make_program(std::size_t rows, std::size_t cols) {
  LinearProgram lp;
  lp.rows = rows;
  lp.cols = cols;
  lp.a.assign(rows * cols, 0.0);
  lp.b.assign(rows, 0.0);
  lp.c.assign(cols, 0.0);
  return lp;
}

namespace {

class Tableau {
 public:
  Tableau(const LinearProgram& lp, double tol)
      : m_(lp.rows), n_(lp.cols), width_(lp.cols + lp.rows + 1), tol_(tol),
        t_((lp.rows + 1) * width_, 0.0), basis_(lp.rows) {
    for (std::size_t i = 0; i < m_; ++i) {
      const double sign = lp.b[i] < 0.0 ? -1.0 : 1.0;
      for (std::size_t j = 0; j < n_; ++j) cell(i, j) = sign * lp.a[i * n_ + j];
      cell(i, n_ + i) = 1.0;
      rhs(i) = sign * lp.b[i];
      basis_[i] = n_ + i;
    }
  }

  double& cell(std::size_t r, std::size_t c) { return t_[r * width_ + c]; }
  double& rhs(std::size_t r) { return t_[r * width_ + width_ - 1]; }
  double& cost(std::size_t c) { return t_[m_ * width_ + c]; }

  // Objective row holds reduced costs; its rhs holds -objective.
  void set_objective(const std::vector<double>& costs) {
    for (std::size_t j = 0; j < width_; ++j) cost(j) = j < costs.size() ? costs[j] : 0.0;
    for (std::size_t i = 0; i < m_; ++i) {
      const double cb = basis_[i] < costs.size() ? costs[basis_[i]] : 0.0;
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) cost(j) -= cb * cell(i, j);
    }
  }

  void pivot(std::size_t row, std::size_t col) {
    const double p = cell(row, col);
    for (std::size_t j = 0; j < width_; ++j) cell(row, j) /= p;
    cell(row, col) = 1.0;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == row) continue;
      const double f = t_[i * width_ + col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) t_[i * width_ + j] -= f * cell(row, j);
      t_[i * width_ + col] = 0.0;
    }
    basis_[row] = col;
    ++iterations_;
  }

  // Runs Bland's rule over columns [0, allowed). Returns false if unbounded.
  bool optimize(std::size_t allowed) {
    for (;;) {
      std::size_t enter = allowed;
      for (std::size_t j = 0; j < allowed; ++j) {
        if (cost(j) < -tol_) {
          enter = j;
          break;
        }
      }
      if (enter == allowed) return true;
      std::size_t leave = m_;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m_; ++i) {
        const double a = cell(i, enter);
        if (a <= tol_) continue;
        const double ratio = rhs(i) / a;
        if (leave == m_ || ratio < best - tol_ ||
            (std::abs(ratio - best) <= tol_ && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
    }
  }

  // After phase one, replace artificial basics by structural columns where
  // possible; rows where that fails are redundant and stay at zero.
  void expel_artificials() {
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (std::abs(cell(i, j)) > tol_) {
          pivot(i, j);
          break;
        }
      }
    }
  }

  [[nodiscard]] std::size_t rows() const { return m_; }
  [[nodiscard]] std::size_t structural() const { return n_; }
  [[nodiscard]] std::size_t basic(std::size_t i) const { return basis_[i]; }
  [[nodiscard]] int iterations() const { return iterations_; }

 private:
  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  double tol_;
  std::vector<double> t_;
  std::vector<std::size_t> basis_;
  int iterations_ = 0;
};

}  // namespace

LpSolution solve_simplex(const LinearProgram& lp, double tolerance) {
  if (lp.a.size() != lp.rows * lp.cols || lp.b.size() != lp.rows || lp.c.size() != lp.cols) {
    throw ValidationError("linear program dimensions are inconsistent");
  }
  Tableau tab(lp, tolerance);
  const std::size_t n = lp.cols;
  const std::size_t m = lp.rows;

  std::vector<double> phase_one(n + m, 0.0);
  for (std::size_t i = 0; i < m; ++i) phase_one[n + i] = 1.0;
  tab.set_objective(phase_one);
  tab.optimize(n + m);

  LpSolution sol;
  double infeasibility = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basic(i) >= n) infeasibility += tab.rhs(i);
  }
  double scale = 1.0;
  for (double v : lp.b) scale = std::max(scale, std::abs(v));
  if (infeasibility > tolerance * 100.0 * scale) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = tab.iterations();
    return sol;
  }

  tab.expel_artificials();
  tab.set_objective(lp.c);
  const bool bounded = tab.optimize(n);
  sol.iterations = tab.iterations();
  if (!bounded) {
    sol.status = LpStatus::Unbounded;
    return sol;
  }
  sol.status = LpStatus::Optimal;
  sol.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (tab.basic(i) < n) sol.x[tab.basic(i)] = std::max(0.0, tab.rhs(i));
  }
  sol.objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) sol.objective += lp.c[j] * sol.x[j];
  return sol;
}

}  // namespace qkd
