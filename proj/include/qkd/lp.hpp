#pragma once

#include <cstddef>
#include <vector>

namespace qkd {

/// minimize c.x subject to A x = b, x >= 0. A is row-major, rows x cols.
struct LinearProgram {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  [[nodiscard]] double& at(std::size_t r, std::size_t col) { return a[r * cols + col]; }
};

LinearProgram make_program(std::size_t rows, std::size_t cols);

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> x;
  double objective = 0.0;
  int iterations = 0;
};

/// Dense two-phase simplex with Bland's rule (terminates on degenerate
/// problems). Intended for the small, well-scaled programs of the key-rate
/// bounds.
LpSolution solve_simplex(const LinearProgram& program, double tolerance = 1e-11);

}  // namespace qkd
