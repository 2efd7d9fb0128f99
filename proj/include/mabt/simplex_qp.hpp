#pragma once

#include "mabt/linalg.hpp"

namespace mabt {

// Minimize w'Aw + b'w over the probability simplex.
struct QPSolution {
  Vector weights;
  double objective = 0.0;
  std::vector<std::size_t> active_set;  // indices held at zero
  std::size_t iterations = 0;
  enum class Status { Converged, MaxIterations } status = Status::Converged;

  // max KKT violation: gradient spread on the support plus any below-lambda
  // gradient off the support.
  double kkt_residual = 0.0;
};

// A must be symmetric, b length M (or empty for zero). Positive
// semidefinite inputs go through a primal active-set method started at the
// best vertex; indefinite inputs (possible for the inference Delta matrices)
// are solved exactly by face enumeration while M is small, with an
// away-step fallback above that. A is ridged by 1e-10 tr(A)/M when its
// smallest eigenvalue drops below -1e-10 ||A||.
QPSolution solve_simplex_qp(const Matrix& a, const Vector& b, double tol = 1e-8,
                            std::size_t max_iter = 0);

}  // namespace mabt
