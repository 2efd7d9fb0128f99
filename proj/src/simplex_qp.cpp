#include "mabt/simplex_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mabt/kernels.hpp"

namespace mabt {

namespace {

struct Problem {
  const Matrix& a;
  const Vector& b;
  std::size_t m;

  double objective(const Vector& w) const { return quad_form(a, b, w); }

  Vector gradient(const Vector& w) const {
    Vector g = matvec(a, w);
    for (std::size_t q = 0; q < m; ++q) g[q] = 2.0 * g[q] + b[q];
    return g;
  }
};

// Best vertex under the objective; ties to the smaller index.
std::size_t best_vertex(const Problem& p) {
  std::size_t best = 0;
  double best_val = p.a(0, 0) + p.b[0];
  for (std::size_t q = 1; q < p.m; ++q) {
    const double v = p.a(q, q) + p.b[q];
    if (v < best_val) {
      best = q;
      best_val = v;
    }
  }
  return best;
}

// Stationary point of the objective restricted to the face spanned by
// `farr` (indices with positive weight), via the null-space basis
// d_i = e_{F_i} - e_{F_0}. Returns false when the reduced Hessian is not
// positive definite.
bool face_stationary(const Problem& p, const std::vector<std::size_t>& farr, Vector& w_out) {
  const std::size_t f = farr.size();
  w_out.assign(p.m, 0.0);
  if (f == 1) {
    w_out[farr[0]] = 1.0;
    return true;
  }
  const std::size_t r = f - 1;
  Matrix h(r, r);
  Vector rhs(r);
  const std::size_t f0 = farr[0];
  for (std::size_t i = 0; i < r; ++i) {
    const std::size_t fi = farr[i + 1];
    for (std::size_t j = i; j < r; ++j) {
      const std::size_t fj = farr[j + 1];
      const double v = 2.0 * (p.a(fi, fj) - p.a(fi, f0) - p.a(f0, fj) + p.a(f0, f0));
      h(i, j) = v;
      h(j, i) = v;
    }
    rhs[i] = -(2.0 * (p.a(fi, f0) - p.a(f0, f0)) + p.b[fi] - p.b[f0]);
  }
  Matrix lower;
  if (!cholesky(h, lower)) return false;
  const Vector t = cholesky_solve(lower, rhs);
  double w0 = 1.0;
  for (std::size_t i = 0; i < r; ++i) {
    w_out[farr[i + 1]] = t[i];
    w0 -= t[i];
  }
  w_out[f0] = w0;
  return true;
}

double kkt_residual(const Problem& p, const Vector& w) {
  const Vector g = p.gradient(w);
  double lambda = 0.0;
  std::size_t support = 0;
  for (std::size_t q = 0; q < p.m; ++q) {
    if (w[q] > 0.0) {
      lambda += g[q];
      ++support;
    }
  }
  lambda /= static_cast<double>(support == 0 ? 1 : support);
  double res = 0.0;
  for (std::size_t q = 0; q < p.m; ++q) {
    if (w[q] > 0.0)
      res = std::max(res, std::abs(g[q] - lambda));
    else
      res = std::max(res, lambda - g[q]);
  }
  return res;
}

// Exact feasibility per the contract: negatives within tol are clamped to
// zero (anything larger would be a solver defect and surfaces through the
// KKT residual), then the sum is pinned at 1 in the last bit via the
// largest weight.
void make_feasible(Vector& w, double tol) {
  (void)tol;
  double sum = 0.0;
  for (double& v : w) {
    if (v < 0.0) v = 0.0;
    sum += v;
  }
  if (sum <= 0.0) {
    w.assign(w.size(), 0.0);
    w[0] = 1.0;
    return;
  }
  for (double& v : w) v /= sum;
  std::size_t imax = 0;
  double run = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q) {
    if (w[q] > w[imax]) imax = q;
    run += w[q];
  }
  w[imax] += 1.0 - run;
}

// Primal active-set loop for (near) convex instances.
QPSolution active_set_solve(const Problem& p, double tol, std::size_t max_iter,
                            std::size_t start_vertex) {
  QPSolution sol;
  Vector w(p.m, 0.0);
  w[start_vertex] = 1.0;
  std::vector<bool> free(p.m, false);
  free[start_vertex] = true;

  const double release_tol = tol;
  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    std::vector<std::size_t> farr;
    for (std::size_t q = 0; q < p.m; ++q)
      if (free[q]) farr.push_back(q);

    Vector target;
    bool pd = face_stationary(p, farr, target);
    if (!pd) {
      // Semi-definite face (duplicate columns and the like): nudge the
      // reduced system by a relative jitter through the objective diagonal.
      const std::size_t f = farr.size();
      double scale = 0.0;
      for (std::size_t q : farr) scale = std::max(scale, std::abs(p.a(q, q)));
      Matrix a2 = p.a;
      for (std::size_t q = 0; q < p.m; ++q) a2(q, q) += std::max(scale, 1.0) * 1e-12;
      Problem p2{a2, p.b, p.m};
      pd = face_stationary(p2, farr, target);
      if (!pd) {
        // Genuinely nonconvex face; stay where we are and stop.
        break;
      }
      (void)f;
    }

    double min_target = 0.0;
    for (std::size_t q : farr) min_target = std::min(min_target, target[q]);

    if (min_target >= -1e-14) {
      for (std::size_t q : farr) target[q] = std::max(target[q], 0.0);
      w = target;
      // Multiplier check on the bound constraints.
      const Vector g = p.gradient(w);
      double lambda = 0.0;
      for (std::size_t q : farr) lambda += g[q];
      lambda /= static_cast<double>(farr.size());
      double worst = -release_tol;
      std::size_t worst_q = p.m;
      for (std::size_t q = 0; q < p.m; ++q) {
        if (free[q]) continue;
        const double slack = g[q] - lambda;
        if (slack < worst) {
          worst = slack;
          worst_q = q;
        }
      }
      if (worst_q == p.m) break;  // KKT met
      free[worst_q] = true;
      continue;
    }

    // Step toward the face stationary point until a bound blocks.
    double alpha = 1.0;
    std::size_t blocker = p.m;
    for (std::size_t q : farr) {
      if (target[q] < 0.0 && w[q] > target[q]) {
        const double a_q = w[q] / (w[q] - target[q]);
        if (a_q < alpha) {
          alpha = a_q;
          blocker = q;
        }
      }
    }
    for (std::size_t q : farr) w[q] += alpha * (target[q] - w[q]);
    if (blocker != p.m) {
      w[blocker] = 0.0;
      free[blocker] = false;
      // Keep at least one free coordinate.
      bool any = false;
      for (std::size_t q = 0; q < p.m; ++q) any = any || free[q];
      if (!any) free[blocker] = true;
    }
  }

  sol.weights = std::move(w);
  sol.iterations = iter;
  return sol;
}

// Exhaustive face enumeration: exact global minimum for indefinite
// objectives at small M. Candidates are every vertex and every face whose
// reduced Hessian is positive definite with an interior stationary point.
QPSolution enumerate_solve(const Problem& p) {
  QPSolution sol;
  Vector best(p.m, 0.0);
  best[best_vertex(p)] = 1.0;
  double best_obj = p.objective(best);

  const std::size_t masks = std::size_t{1} << p.m;
  Vector candidate;
  std::vector<std::size_t> farr;
  for (std::size_t mask = 1; mask < masks; ++mask) {
    farr.clear();
    for (std::size_t q = 0; q < p.m; ++q)
      if (mask & (std::size_t{1} << q)) farr.push_back(q);
    if (farr.size() < 2) continue;  // vertices already covered
    if (!face_stationary(p, farr, candidate)) continue;
    bool interior = true;
    for (std::size_t q : farr)
      if (candidate[q] <= 0.0) {
        interior = false;
        break;
      }
    if (!interior) continue;
    const double obj = p.objective(candidate);
    if (obj < best_obj - 1e-15 * std::max(1.0, std::abs(best_obj))) {
      best_obj = obj;
      best = candidate;
    }
  }
  sol.weights = std::move(best);
  sol.iterations = masks;
  return sol;
}

// Frank-Wolfe with away steps and exact quadratic line search; first-order
// fallback for indefinite objectives too large to enumerate.
QPSolution away_fw_solve(const Problem& p, double tol, std::size_t max_iter) {
  QPSolution sol;
  Vector w(p.m, 0.0);
  w[best_vertex(p)] = 1.0;

  std::size_t iter = 0;
  for (; iter < max_iter; ++iter) {
    const Vector g = p.gradient(w);
    std::size_t s = 0, a_idx = 0;
    double gmin = std::numeric_limits<double>::infinity();
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < p.m; ++q) {
      if (g[q] < gmin) {
        gmin = g[q];
        s = q;
      }
      if (w[q] > 0.0 && g[q] > gmax) {
        gmax = g[q];
        a_idx = q;
      }
    }
    const double fw_gap = kern::dot(g, w) - gmin;
    const double away_gap = gmax - kern::dot(g, w);
    const double scale = std::max(1.0, std::abs(gmax) + std::abs(gmin));
    if (std::max(fw_gap, away_gap) <= tol * scale) break;

    Vector d(p.m, 0.0);
    double t_max;
    if (fw_gap >= away_gap) {
      for (std::size_t q = 0; q < p.m; ++q) d[q] = -w[q];
      d[s] += 1.0;
      t_max = 1.0;
    } else {
      for (std::size_t q = 0; q < p.m; ++q) d[q] = w[q];
      d[a_idx] -= 1.0;
      const double wa = w[a_idx];
      t_max = wa >= 1.0 ? std::numeric_limits<double>::infinity() : wa / (1.0 - wa);
    }
    const double slope = kern::dot(g, d);
    const double curv = quad_form(p.a, Vector(p.m, 0.0), d);
    double t;
    if (curv > 0.0) {
      t = std::clamp(-slope / (2.0 * curv), 0.0, t_max);
    } else {
      t = t_max;
    }
    if (!(t > 0.0) || !std::isfinite(t)) break;
    for (std::size_t q = 0; q < p.m; ++q) w[q] += t * d[q];
    for (double& v : w) v = std::max(v, 0.0);
  }

  sol.weights = std::move(w);
  sol.iterations = iter;
  return sol;
}

}  // namespace

QPSolution solve_simplex_qp(const Matrix& a, const Vector& b_in, double tol,
                            std::size_t max_iter) {
  const std::size_t m = a.rows();
  if (m == 0 || a.cols() != m) fail(errc::invalid_size, "simplex qp: A must be square, M >= 1");
  Vector b = b_in.empty() ? Vector(m, 0.0) : b_in;
  if (b.size() != m) fail(errc::dimension_mismatch, "simplex qp: b length mismatch");
  if (!a.all_finite() || !all_finite(b)) fail(errc::non_finite, "simplex qp: non-finite input");
  if (max_iter == 0) max_iter = 10 * m * m + 10;

  if (m == 1) {
    QPSolution sol;
    sol.weights = {1.0};
    sol.objective = a(0, 0) + b[0];
    sol.status = QPSolution::Status::Converged;
    return sol;
  }

  // Symmetrized working copy with the documented convexity ridge.
  Matrix as(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) as(i, j) = 0.5 * (a(i, j) + a(j, i));

  const SymEigen eig = sym_eigen(as);
  const double norm_a = std::max(std::abs(eig.values.front()), std::abs(eig.values.back()));
  double lambda_min = eig.values.front();
  if (lambda_min < -1e-10 * norm_a) {
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) trace += as(i, i);
    const double ridge = 1e-10 * std::abs(trace) / static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) as(i, i) += ridge;
    lambda_min += ridge;
  }

  const Problem prob{as, b, m};
  const bool indefinite = lambda_min < -1e-8 * std::max(norm_a, 1e-300);

  QPSolution sol;
  if (!indefinite) {
    sol = active_set_solve(prob, tol, max_iter, best_vertex(prob));
  } else if (m <= 16) {
    sol = enumerate_solve(prob);
  } else {
    sol = away_fw_solve(prob, tol, max_iter);
  }

  make_feasible(sol.weights, tol);
  sol.objective = quad_form(a, b, sol.weights);
  sol.kkt_residual = kkt_residual(prob, sol.weights);
  const Vector g = prob.gradient(sol.weights);
  double gscale = 1.0;
  for (double v : g) gscale = std::max(gscale, std::abs(v));
  sol.status = sol.kkt_residual <= tol * gscale ? QPSolution::Status::Converged
                                                : QPSolution::Status::MaxIterations;
  sol.active_set.clear();
  for (std::size_t q = 0; q < m; ++q)
    if (sol.weights[q] == 0.0) sol.active_set.push_back(q);
  return sol;
}

}  // namespace mabt
