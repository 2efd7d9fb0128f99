#include "mabt/inference.hpp"

#include <algorithm>
#include <cmath>

#include "mabt/kernels.hpp"
#include "mabt/parallel.hpp"

namespace mabt {

namespace {

// Cholesky factors of the leading k_{M0+r} x k_{M0+r} blocks of Q_hat,
// shared by every draw.
struct BlockFactors {
  std::vector<Matrix> lower;       // one per r = 1..R
  std::vector<std::size_t> dims;   // k_{M0+r}
  Matrix q_inv;                    // full Q_hat^{-1}
};

BlockFactors factor_blocks(const AsymptoticInputs& inputs) {
  BlockFactors out;
  const std::size_t r_count = inputs.r_count();
  out.lower.resize(r_count);
  out.dims.resize(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    const std::size_t kq = inputs.dims[inputs.m0 + r];
    out.dims[r] = kq;
    Matrix block(kq, kq);
    for (std::size_t i = 0; i < kq; ++i)
      for (std::size_t j = 0; j < kq; ++j) block(i, j) = inputs.q_hat(i, j);
    if (!cholesky(block, out.lower[r]))
      fail(errc::singular_q, "limit draws: leading block of Q_hat not positive definite");
  }
  Matrix full_lower;
  if (!cholesky(inputs.q_hat, full_lower))
    fail(errc::singular_q, "limit draws: Q_hat not positive definite");
  out.q_inv = cholesky_inverse(full_lower);
  return out;
}

}  // namespace

const char* limit_kind_name(LimitKind kind) {
  switch (kind) {
    case LimitKind::BTMA: return "btma";
    case LimitKind::MMA: return "mma";
    case LimitKind::JMA: return "jma";
  }
  return "?";
}

std::size_t AsymptoticInputs::position_of(std::size_t j) const {
  for (std::size_t pos = 0; pos < column_order.size(); ++pos)
    if (column_order[pos] + 1 == j) return pos;
  fail(errc::invalid_size, "limit draws: coefficient " + std::to_string(j) +
                               " is not covered by the candidate set");
}

AsymptoticInputs estimate_asymptotics(const Dataset& data, const CandidateModelSet& models,
                                      std::size_t m, std::optional<std::size_t> known_m0) {
  if (!models.nested) fail(errc::invalid_size, "estimate_asymptotics: nested candidates required");
  const std::size_t largest = models.largest_index();
  if (models.models[largest].size() != data.p())
    fail(errc::invalid_size, "estimate_asymptotics: largest model must use every column");

  const std::size_t n = data.n();
  const std::size_t k = data.p();
  if (n <= k) fail(errc::invalid_size, "estimate_asymptotics: n > k required");

  const FitBundle bundle = fit_all(data, models);
  const Vector& resid = bundle.fits[largest].resid;

  AsymptoticInputs out;
  out.n = n;
  out.m = m;
  out.k = k;
  out.dims = models.dims();
  // All block selections below are leading blocks in the candidate prefix
  // ordering, which may permute the dataset's columns.
  out.column_order = models.models[largest];
  out.sigma2_hat = bundle.fits[largest].rss / static_cast<double>(n - k);

  out.q_hat = Matrix(k, k);
  out.xi_hat = Matrix(k, k);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = resid[i] * resid[i];
    for (std::size_t a = 0; a < k; ++a) {
      const double xa = data.x(i, out.column_order[a]);
      for (std::size_t c = a; c < k; ++c) {
        const double prod = xa * data.x(i, out.column_order[c]);
        out.q_hat(a, c) += prod;
        out.xi_hat(a, c) += prod * w;
      }
    }
  }
  // The residual outer-product moment carries the same degrees-of-freedom
  // correction as sigma2_hat; full-model residuals are shrunk by leverage,
  // which at k/n near 1/2 would otherwise halve the simulated spread.
  const double inv_n = 1.0 / static_cast<double>(n);
  const double inv_dof = 1.0 / static_cast<double>(n - k);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t c = a; c < k; ++c) {
      out.q_hat(a, c) *= inv_n;
      out.q_hat(c, a) = out.q_hat(a, c);
      out.xi_hat(a, c) *= inv_dof;
      out.xi_hat(c, a) = out.xi_hat(a, c);
    }

  Matrix lower;
  if (!cholesky(out.q_hat, lower))
    fail(errc::singular_q, "estimate_asymptotics: Q_hat not positive definite");

  if (known_m0.has_value()) {
    if (*known_m0 >= models.count())
      fail(errc::invalid_size, "estimate_asymptotics: M0 must be below the candidate count");
    out.m0 = *known_m0;
    return out;
  }

  // M0 from BIC selection: models strictly below the chosen one.
  std::size_t pick = 0;
  double pick_ic = info_criterion(bundle.fits[0], n, ICKind::BIC);
  for (std::size_t q = 1; q < models.count(); ++q) {
    const double ic = info_criterion(bundle.fits[q], n, ICKind::BIC);
    const bool better =
        ic < pick_ic ||
        (ic == pick_ic && (bundle.fits[q].k < bundle.fits[pick].k ||
                           (bundle.fits[q].k == bundle.fits[pick].k && q < pick)));
    if (better) {
      pick = q;
      pick_ic = ic;
    }
  }
  out.m0 = pick;
  return out;
}

Matrix delta_matrix(const AsymptoticInputs& inputs, std::span<const double> z, LimitKind kind) {
  if (z.size() != inputs.k) fail(errc::dimension_mismatch, "delta_matrix: z length != k");
  const BlockFactors blocks = factor_blocks(inputs);
  const std::size_t r_count = inputs.r_count();

  // z' V_r z per block and z' Q^{-1} z once.
  Vector zvz(r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    const Vector head = cholesky_solve(blocks.lower[r], z.subspan(0, blocks.dims[r]));
    zvz[r] = kern::dot(head, z.subspan(0, blocks.dims[r]));
  }
  const Vector qinv_z = matvec(blocks.q_inv, z);
  const double zqz = kern::dot(qinv_z, z);

  Vector tr_term(r_count, 0.0);
  if (kind == LimitKind::JMA) {
    // tr(Q_r^{-1} Xi_r) for each block.
    for (std::size_t r = 0; r < r_count; ++r) {
      const std::size_t kq = blocks.dims[r];
      Matrix xi_block(kq, kq);
      for (std::size_t a = 0; a < kq; ++a)
        for (std::size_t c = 0; c < kq; ++c) xi_block(a, c) = inputs.xi_hat(a, c);
      double tr = 0.0;
      Vector col(kq);
      for (std::size_t c = 0; c < kq; ++c) {
        for (std::size_t a = 0; a < kq; ++a) col[a] = xi_block(a, c);
        const Vector sol = cholesky_solve(blocks.lower[r], col);
        tr += sol[c];
      }
      tr_term[r] = tr;
    }
  }

  const double ratio = static_cast<double>(inputs.n) * inputs.sigma2_hat /
                       static_cast<double>(inputs.m);
  Matrix delta(r_count, r_count);
  for (std::size_t r = 0; r < r_count; ++r) {
    for (std::size_t t = r; t < r_count; ++t) {
      const std::size_t lo = r, hi = t;
      double v = 0.0;
      switch (kind) {
        case LimitKind::BTMA:
          v = ratio * static_cast<double>(inputs.dims[inputs.m0 + lo]) + (zqz - zvz[hi]);
          break;
        case LimitKind::MMA:
          v = inputs.sigma2_hat * static_cast<double>(inputs.dims[inputs.m0 + r] +
                                                      inputs.dims[inputs.m0 + t]) -
              zvz[hi];
          break;
        case LimitKind::JMA:
          v = tr_term[r] + tr_term[t] - zvz[hi];
          break;
      }
      delta(r, t) = v;
      delta(t, r) = v;
    }
  }
  return delta;
}

LimitDrawSet simulate_limit_draws(const AsymptoticInputs& inputs, std::size_t u_count,
                                  LimitKind kind, const SeedSpec& seeds) {
  if (u_count == 0) fail(errc::invalid_size, "simulate_limit_draws: U >= 1 required");
  const std::size_t k = inputs.k;
  const BlockFactors blocks = factor_blocks(inputs);
  const std::size_t r_count = inputs.r_count();

  // Factor Xi_hat with eigenvalues floored at zero, so z = L g is exactly
  // N(0, Xi_hat^+).
  const SymEigen eig = sym_eigen(inputs.xi_hat);
  Matrix l_factor(k, k);
  for (std::size_t j = 0; j < k; ++j) {
    const double lam = std::max(eig.values[j], 0.0);
    const double s = std::sqrt(lam);
    for (std::size_t i = 0; i < k; ++i) l_factor(i, j) = eig.vectors(i, j) * s;
  }

  // Reusable per-draw pieces of delta_matrix, inlined for the U loop.
  Vector tr_term(r_count, 0.0);
  if (kind == LimitKind::JMA) {
    for (std::size_t r = 0; r < r_count; ++r) {
      const std::size_t kq = blocks.dims[r];
      double tr = 0.0;
      Vector col(kq);
      for (std::size_t c = 0; c < kq; ++c) {
        for (std::size_t a = 0; a < kq; ++a) col[a] = inputs.xi_hat(a, c);
        const Vector sol = cholesky_solve(blocks.lower[r], col);
        tr += sol[c];
      }
      tr_term[r] = tr;
    }
  }
  const double ratio = static_cast<double>(inputs.n) * inputs.sigma2_hat /
                       static_cast<double>(inputs.m);

  LimitDrawSet out;
  out.kind = kind;
  out.u_count = u_count;
  out.draws = Matrix(k, u_count);
  out.nu = Matrix(r_count, u_count);

  parallel_for(u_count, [&](std::size_t u) {
    Rng stream = seeds.stream({u});
    Vector g(k);
    for (std::size_t i = 0; i < k; ++i) g[i] = stream.next_normal();
    const Vector z = matvec(l_factor, g);

    Vector zvz(r_count);
    std::vector<Vector> heads(r_count);
    for (std::size_t r = 0; r < r_count; ++r) {
      heads[r] = cholesky_solve(blocks.lower[r],
                                std::span<const double>(z).subspan(0, blocks.dims[r]));
      zvz[r] = kern::dot(heads[r], std::span<const double>(z).subspan(0, blocks.dims[r]));
    }
    const Vector qinv_z = matvec(blocks.q_inv, z);
    const double zqz = kern::dot(qinv_z, z);

    Matrix delta(r_count, r_count);
    for (std::size_t r = 0; r < r_count; ++r)
      for (std::size_t t = r; t < r_count; ++t) {
        double v = 0.0;
        switch (kind) {
          case LimitKind::BTMA:
            v = ratio * static_cast<double>(inputs.dims[inputs.m0 + r]) + (zqz - zvz[t]);
            break;
          case LimitKind::MMA:
            v = inputs.sigma2_hat * static_cast<double>(inputs.dims[inputs.m0 + r] +
                                                        inputs.dims[inputs.m0 + t]) -
                zvz[t];
            break;
          case LimitKind::JMA:
            v = tr_term[r] + tr_term[t] - zvz[t];
            break;
        }
        delta(r, t) = v;
        delta(t, r) = v;
      }

    QPSolution nu;
    try {
      nu = solve_simplex_qp(delta, Vector(r_count, 0.0));
    } catch (const Error& e) {
      fail(e.code(), "simulate_limit_draws: draw " + std::to_string(u + 1) + ": " + e.what());
    }

    auto draw_col = out.draws.col(u);
    for (std::size_t r = 0; r < r_count; ++r) {
      out.nu(r, u) = nu.weights[r];
      if (nu.weights[r] == 0.0) continue;
      for (std::size_t i = 0; i < blocks.dims[r]; ++i)
        draw_col[i] += nu.weights[r] * heads[r][i];
    }
  });
  return out;
}

double quantile_type7(const Vector& sorted_values, double p) {
  if (sorted_values.empty()) fail(errc::invalid_size, "quantile: empty sample");
  const std::size_t u = sorted_values.size();
  if (u == 1) return sorted_values[0];
  const double h = (static_cast<double>(u) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= u) return sorted_values[u - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

ConfidenceInterval ci_averaging(const Dataset& data, const CandidateModelSet& models,
                                const MethodWeights& weights, const LimitDrawSet& draws,
                                std::size_t j, double level) {
  if (j == 0 || j > data.p()) fail(errc::invalid_size, "ci_averaging: bad coefficient index");
  if (draws.u_count == 0) fail(errc::invalid_size, "ci_averaging: no draws");

  const FitBundle bundle = fit_all(data, models);
  const Vector beta = combine_coefficients(bundle, models, weights.weights, data.p());

  // Draws live in the candidate prefix ordering; map the dataset column to
  // its position there.
  const auto& order = models.models[models.largest_index()];
  std::size_t row = order.size();
  for (std::size_t pos = 0; pos < order.size(); ++pos)
    if (order[pos] == j - 1) row = pos;
  if (row == order.size())
    fail(errc::coefficient_not_in_model,
         "ci_averaging: coefficient " + std::to_string(j) + " not in the largest model");
  Vector comp(draws.u_count);
  for (std::size_t u = 0; u < draws.u_count; ++u) comp[u] = draws.draws(row, u);
  std::sort(comp.begin(), comp.end());

  const double alpha = 1.0 - level;
  const double z_hi = quantile_type7(comp, 1.0 - alpha / 2.0);
  const double z_lo = quantile_type7(comp, alpha / 2.0);
  const double root_n = std::sqrt(static_cast<double>(data.n()));

  ConfidenceInterval ci;
  ci.method = weights.method;
  ci.coef_index = j;
  ci.level = level;
  ci.lower = beta[j - 1] - z_hi / root_n;
  ci.upper = beta[j - 1] - z_lo / root_n;
  return ci;
}

ConfidenceInterval ci_ols_z(const Dataset& data, std::span<const std::size_t> model,
                            std::size_t j, double level, std::optional<double> sigma2) {
  if (j == 0 || j > data.p()) fail(errc::invalid_size, "ci_ols_z: bad coefficient index");
  const auto pos = std::find(model.begin(), model.end(), j - 1);
  if (pos == model.end())
    fail(errc::coefficient_not_in_model,
         "ci_ols_z: coefficient " + std::to_string(j) + " not in the model");
  const std::size_t slot = static_cast<std::size_t>(pos - model.begin());

  const ModelFit fit = fit_ols(data, model);
  const std::size_t n = data.n();
  double s2;
  if (sigma2.has_value()) {
    s2 = *sigma2;
  } else {
    if (n <= fit.k) fail(errc::invalid_size, "ci_ols_z: n must exceed k for a variance estimate");
    s2 = fit.rss / static_cast<double>(n - fit.k);
  }

  // [(X'X)^{-1}]_jj via the Cholesky of the model Gram.
  const Matrix xq = model_design(data, model);
  Matrix lower;
  if (!cholesky(gram(xq), lower)) fail(errc::singular_q, "ci_ols_z: X'X not positive definite");
  Vector e(model.size(), 0.0);
  e[slot] = 1.0;
  const Vector col = cholesky_solve(lower, e);
  const double se = std::sqrt(s2 * col[slot]);

  const double z = level <= 0.0 ? 0.0 : normal_quantile(0.5 + level / 2.0);
  ConfidenceInterval ci;
  ci.method = "ols_z";
  ci.coef_index = j;
  ci.level = level;
  ci.lower = fit.theta_hat[slot] - z * se;
  ci.upper = fit.theta_hat[slot] + z * se;
  return ci;
}

ConfidenceInterval ci_bms_bootstrap(const Dataset& data, const CandidateModelSet& models,
                                    std::size_t m, std::size_t b_reps, std::size_t j,
                                    double level, const SeedSpec& seeds,
                                    std::size_t max_retries) {
  if (j == 0 || j > data.p()) fail(errc::invalid_size, "ci_bms_bootstrap: bad coefficient index");
  if (b_reps == 0) fail(errc::invalid_size, "ci_bms_bootstrap: B >= 1 required");

  // Replicates are drawn once; the same fits provide both the selection
  // criterion diagonal and the per-replicate coefficients.
  std::vector<BootstrapReplicate> reps(b_reps);
  parallel_for(b_reps, [&](std::size_t b) {
    Rng stream = seeds.stream({b});
    reps[b] = bootstrap_replicate(data, models, m, ResampleKind::WithReplacement, stream,
                                  max_retries);
  });

  const std::size_t m_count = models.count();
  const std::size_t n = data.n();
  QuadraticCriterion crit;
  crit.a = Matrix(m_count, m_count);
  for (std::size_t b = 0; b < b_reps; ++b) {
    const Matrix resid = replicate_residual_columns(data, models, reps[b]);
    const Matrix g = gram(resid);
    for (std::size_t i = 0; i < m_count; ++i)
      for (std::size_t l = 0; l < m_count; ++l) crit.a(i, l) += g(i, l);
  }
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(b_reps));
  for (std::size_t i = 0; i < m_count; ++i)
    for (std::size_t l = 0; l < m_count; ++l) crit.a(i, l) *= scale;
  crit.b.assign(m_count, 0.0);
  crit.meta = {"bms", b_reps, m, models.dims()};

  const std::size_t pick = bms_select(crit);
  const auto& cols = models.models[pick];

  const ModelFit fit = fit_ols(data, cols);
  const Vector beta_hat = pad_coefficients(fit.theta_hat, cols, data.p());

  const double root_n = std::sqrt(static_cast<double>(n));
  Vector stats(b_reps);
  double beta_star_last = 0.0;
  for (std::size_t b = 0; b < b_reps; ++b) {
    const Vector beta_star = pad_coefficients(reps[b].theta[pick], cols, data.p());
    stats[b] = std::abs(root_n * (beta_star[j - 1] - beta_hat[j - 1]));
    if (b + 1 == b_reps) beta_star_last = beta_star[j - 1];
  }
  std::sort(stats.begin(), stats.end());
  const double z_star = quantile_type7(stats, level);

  ConfidenceInterval ci;
  ci.method = "bms";
  ci.coef_index = j;
  ci.level = level;
  ci.lower = beta_star_last - z_star / root_n;
  ci.upper = beta_star_last + z_star / root_n;
  return ci;
}

}  // namespace mabt
