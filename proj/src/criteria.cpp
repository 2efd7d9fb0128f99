#include "mabt/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mabt/kernels.hpp"
#include "mabt/parallel.hpp"

namespace mabt {

namespace {

Matrix expand_rows(const Matrix& x, std::span<const std::size_t> cols,
                   const std::vector<std::uint32_t>& indices) {
  Matrix out(indices.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    auto src = x.col(cols[j]);
    auto dst = out.col(j);
    for (std::size_t i = 0; i < indices.size(); ++i) dst[i] = src[indices[i]];
  }
  return out;
}

// Fits all candidates on one resampled dataset, or reports failure so the
// caller can redraw. The nested path shares a single unpivoted factorization
// of the largest design; prefixes of it are exactly the smaller models.
bool try_fit_resample(const Dataset& data, const CandidateModelSet& models,
                      const ResamplePlan& plan, BootstrapReplicate& out) {
  const std::size_t m_rows = plan.m;
  Vector ys(m_rows);
  for (std::size_t i = 0; i < m_rows; ++i) ys[i] = data.y[plan.indices[i]];

  const auto dims = models.dims();
  out.theta.assign(models.count(), {});
  out.rss_star.assign(models.count(), 0.0);

  if (models.nested) {
    const std::size_t largest = models.largest_index();
    const auto& cols = models.models[largest];
    if (m_rows < cols.size()) return false;
    const Matrix xs = expand_rows(data.x, cols, plan.indices);
    const HouseholderQR qr(xs, /*pivot=*/false);
    if (qr.rank() < cols.size()) return false;
    Vector qty = ys;
    qr.apply_qt(qty);
    const double total = kern::sumsq(ys);
    double head = 0.0;
    std::size_t consumed = 0;
    for (std::size_t q = 0; q < models.count(); ++q) {
      const std::size_t k = dims[q];
      out.theta[q] = qr.solve_prefix(k, qty);
      while (consumed < k) {
        head += qty[consumed] * qty[consumed];
        ++consumed;
      }
      out.rss_star[q] = std::max(0.0, total - head);
    }
    return true;
  }

  for (std::size_t q = 0; q < models.count(); ++q) {
    const auto& cols = models.models[q];
    if (m_rows < cols.size()) return false;
    const Matrix xs = expand_rows(data.x, cols, plan.indices);
    const HouseholderQR qr(xs, /*pivot=*/true);
    if (qr.rank() < cols.size()) return false;
    out.theta[q] = qr.solve(ys);
    const Vector mu = matvec(xs, out.theta[q]);
    out.rss_star[q] = kern::sq_diff_sum(ys, mu);
  }
  return true;
}

struct CpTieLess {
  const std::vector<std::size_t>& dims;
  bool operator()(std::pair<double, std::size_t> lhs, std::pair<double, std::size_t> rhs) const {
    if (lhs.first != rhs.first) return lhs.first < rhs.first;
    if (dims[lhs.second] != dims[rhs.second]) return dims[lhs.second] < dims[rhs.second];
    return lhs.second < rhs.second;
  }
};

QuadraticCriterion resampled_gram_criterion(const Dataset& data, const CandidateModelSet& models,
                                            std::size_t m, std::size_t b_reps,
                                            ResampleKind kind, const SeedSpec& seeds,
                                            std::size_t max_retries, const char* method) {
  if (b_reps == 0) fail(errc::invalid_size, std::string(method) + ": B >= 1 required");
  const std::size_t m_count = models.count();
  const std::size_t n = data.n();

  std::vector<Matrix> grams(b_reps);
  parallel_for(b_reps, [&](std::size_t b) {
    Rng stream = seeds.stream({b});
    try {
      const BootstrapReplicate rep =
          bootstrap_replicate(data, models, m, kind, stream, max_retries);
      const Matrix resid = replicate_residual_columns(data, models, rep);
      grams[b] = gram(resid);
    } catch (const Error& e) {
      if (e.code() == errc::rank_retry_exhausted)
        fail(errc::rank_retry_exhausted,
             std::string(method) + ": replicate " + std::to_string(b + 1) + ": " + e.what());
      throw;
    }
  });

  QuadraticCriterion crit;
  crit.a = Matrix(m_count, m_count);
  const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(b_reps));
  for (std::size_t b = 0; b < b_reps; ++b) {
    const Matrix& g = grams[b];
    for (std::size_t i = 0; i < m_count; ++i)
      for (std::size_t j = 0; j < m_count; ++j) crit.a(i, j) += g(i, j);
  }
  for (std::size_t i = 0; i < m_count; ++i)
    for (std::size_t j = 0; j < m_count; ++j) crit.a(i, j) *= scale;

  crit.b.assign(m_count, 0.0);
  crit.c = 0.0;
  crit.meta = {method, b_reps, m, models.dims()};
  return crit;
}

}  // namespace

BootstrapReplicate bootstrap_replicate(const Dataset& data, const CandidateModelSet& models,
                                       std::size_t m, ResampleKind kind, Rng& stream,
                                       std::size_t max_retries) {
  if (max_retries == 0) fail(errc::invalid_size, "bootstrap_replicate: max_retries >= 1");
  BootstrapReplicate rep;
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    rep.plan = draw_plan(data.n(), m, kind, stream);
    if (try_fit_resample(data, models, rep.plan, rep)) return rep;
  }
  fail(errc::rank_retry_exhausted,
       "no full-rank resample in " + std::to_string(max_retries) + " tries (m = " +
           std::to_string(m) + ")");
}

Matrix replicate_residual_columns(const Dataset& data, const CandidateModelSet& models,
                                  const BootstrapReplicate& rep) {
  const std::size_t n = data.n();
  Matrix resid(n, models.count());
  for (std::size_t q = 0; q < models.count(); ++q) {
    auto col = resid.col(q);
    std::copy(data.y.begin(), data.y.end(), col.begin());
    const auto& cols = models.models[q];
    for (std::size_t j = 0; j < cols.size(); ++j)
      kern::axpy(-rep.theta[q][j], data.x.col(cols[j]), col);
  }
  return resid;
}

QuadraticCriterion btma_criterion(const Dataset& data, const CandidateModelSet& models,
                                  std::size_t m, std::size_t b_reps, const SeedSpec& seeds,
                                  std::size_t max_retries) {
  return resampled_gram_criterion(data, models, m, b_reps, ResampleKind::WithReplacement, seeds,
                                  max_retries, "btma");
}

QuadraticCriterion subsampling_criterion(const Dataset& data, const CandidateModelSet& models,
                                         std::size_t m, std::size_t b_reps, const SeedSpec& seeds,
                                         std::size_t max_retries) {
  return resampled_gram_criterion(data, models, m, b_reps, ResampleKind::WithoutReplacement,
                                  seeds, max_retries, "subsampling");
}

QuadraticCriterion mma_criterion(const FitBundle& bundle, std::size_t n) {
  if (!(bundle.sigma2_full > 0.0))
    fail(errc::degenerate_fit, "mma_criterion: sigma2_full unavailable");
  QuadraticCriterion crit;
  crit.a = gram(bundle.residual_matrix);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < bundle.fits.size(); ++i)
    for (std::size_t j = 0; j < bundle.fits.size(); ++j) crit.a(i, j) *= inv_n;
  crit.b.resize(bundle.fits.size());
  crit.meta.dims.resize(bundle.fits.size());
  for (std::size_t q = 0; q < bundle.fits.size(); ++q) {
    crit.b[q] = 2.0 * bundle.sigma2_full * static_cast<double>(bundle.fits[q].k) * inv_n;
    crit.meta.dims[q] = bundle.fits[q].k;
  }
  crit.c = 0.0;
  crit.meta.method = "mma";
  return crit;
}

QuadraticCriterion jma_criterion(const FitBundle& bundle, const Dataset& data) {
  const std::size_t n = data.n();
  Matrix loo(n, bundle.fits.size());
  for (std::size_t q = 0; q < bundle.fits.size(); ++q) {
    const ModelFit& fit = bundle.fits[q];
    auto col = loo.col(q);
    for (std::size_t i = 0; i < n; ++i) {
      const double h = fit.hat_diag[i];
      if (h >= 1.0 - 1e-12)
        fail(errc::leverage_one, "jma_criterion: leverage 1 at row " + std::to_string(i + 1) +
                                     ", model " + std::to_string(q + 1));
      col[i] = fit.resid[i] / (1.0 - h);
    }
  }
  QuadraticCriterion crit;
  crit.a = gram(loo);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < bundle.fits.size(); ++i)
    for (std::size_t j = 0; j < bundle.fits.size(); ++j) crit.a(i, j) *= inv_n;
  crit.b.assign(bundle.fits.size(), 0.0);
  crit.c = 0.0;
  crit.meta.method = "jma";
  crit.meta.dims.resize(bundle.fits.size());
  for (std::size_t q = 0; q < bundle.fits.size(); ++q) crit.meta.dims[q] = bundle.fits[q].k;
  return crit;
}

MethodWeights smoothed_ic_weights(const FitBundle& bundle, std::size_t n, ICKind kind) {
  const std::size_t m_count = bundle.fits.size();
  Vector ic(m_count);
  double ic_min = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q < m_count; ++q) {
    ic[q] = info_criterion(bundle.fits[q], n, kind);
    ic_min = std::min(ic_min, ic[q]);
  }

  MethodWeights out;
  out.method = kind == ICKind::AIC ? "saic" : "sbic";
  out.objective = std::numeric_limits<double>::quiet_NaN();  // not an optimization
  out.weights.assign(m_count, 0.0);

  if (std::isinf(ic_min)) {
    // Degenerate fits (rss = 0): split the mass evenly among them.
    std::size_t hits = 0;
    for (std::size_t q = 0; q < m_count; ++q)
      if (std::isinf(ic[q])) ++hits;
    for (std::size_t q = 0; q < m_count; ++q)
      if (std::isinf(ic[q])) out.weights[q] = 1.0 / static_cast<double>(hits);
    return out;
  }

  double total = 0.0;
  for (std::size_t q = 0; q < m_count; ++q) {
    out.weights[q] = std::exp(-0.5 * (ic[q] - ic_min));
    total += out.weights[q];
  }
  for (double& w : out.weights) w /= total;
  return out;
}

std::size_t bms_select(const QuadraticCriterion& criterion) {
  const std::size_t m_count = criterion.a.rows();
  if (criterion.meta.dims.size() != m_count)
    fail(errc::invalid_size, "bms_select: criterion lacks model dimensions");
  CpTieLess less{criterion.meta.dims};
  std::pair<double, std::size_t> best{criterion.a(0, 0) + criterion.b[0], 0};
  for (std::size_t q = 1; q < m_count; ++q) {
    const std::pair<double, std::size_t> cur{criterion.a(q, q) + criterion.b[q], q};
    if (less(cur, best)) best = cur;
  }
  return best.second;
}

Vector bagging_cp_predict(const Dataset& data, const CandidateModelSet& models,
                          const Matrix& x_new, std::size_t b_reps, std::size_t m,
                          const SeedSpec& seeds, std::size_t max_retries) {
  if (b_reps == 0) fail(errc::invalid_size, "bagging: B >= 1 required");
  if (x_new.cols() != data.p()) fail(errc::dimension_mismatch, "bagging: x_new column mismatch");
  const auto dims = models.dims();
  const std::size_t k_max = *std::max_element(dims.begin(), dims.end());
  if (m <= k_max) fail(errc::invalid_size, "bagging: m must exceed the largest model dimension");

  std::vector<Vector> preds(b_reps);
  parallel_for(b_reps, [&](std::size_t b) {
    Rng stream = seeds.stream({b});
    const BootstrapReplicate rep =
        bootstrap_replicate(data, models, m, ResampleKind::WithReplacement, stream, max_retries);

    const std::size_t largest = models.largest_index();
    const double sigma2_star =
        rep.rss_star[largest] / static_cast<double>(m - dims[largest]);
    CpTieLess less{dims};
    std::pair<double, std::size_t> best{std::numeric_limits<double>::infinity(), 0};
    const double dm = static_cast<double>(m);
    for (std::size_t q = 0; q < models.count(); ++q) {
      const double cp =
          rep.rss_star[q] / dm + 2.0 * sigma2_star * static_cast<double>(dims[q]) / dm;
      const std::pair<double, std::size_t> cur{cp, q};
      if (less(cur, best)) best = cur;
    }

    const auto& cols = models.models[best.second];
    Vector pred(x_new.rows(), 0.0);
    for (std::size_t j = 0; j < cols.size(); ++j)
      kern::axpy(rep.theta[best.second][j], x_new.col(cols[j]), pred);
    preds[b] = std::move(pred);
  });

  Vector out(x_new.rows(), 0.0);
  for (std::size_t b = 0; b < b_reps; ++b)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += preds[b][i];
  for (double& v : out) v /= static_cast<double>(b_reps);
  return out;
}

GcvChoice gcv_select_m(const Dataset& data, const CandidateModelSet& models,
                       const std::vector<std::size_t>& candidate_ms, std::size_t b_reps,
                       const SeedSpec& seeds, std::size_t max_retries) {
  if (candidate_ms.empty()) fail(errc::invalid_size, "gcv_select_m: empty candidate list");
  const FitBundle bundle = fit_all(data, models);
  const double dn = static_cast<double>(data.n());

  GcvChoice choice;
  bool have_best = false;
  std::pair<double, std::size_t> best{0.0, 0};  // (score, m)
  for (std::size_t m : candidate_ms) {
    QuadraticCriterion crit = btma_criterion(data, models, m, b_reps, seeds.derived({m}),
                                             max_retries);
    MethodWeights w = minimize_criterion(crit);
    const Vector mu = combine_mu(bundle, w.weights);
    const double rss = kern::sq_diff_sum(data.y, mu);
    double eff_dim = 0.0;
    for (std::size_t q = 0; q < models.count(); ++q)
      eff_dim += w.weights[q] * static_cast<double>(bundle.fits[q].k);
    const double denom = 1.0 - eff_dim / dn;
    if (!(denom > 0.0)) fail(errc::invalid_size, "gcv_select_m: effective dimension >= n");
    const double score = (rss / dn) / (denom * denom);
    choice.scores.emplace_back(m, score);

    const std::pair<double, std::size_t> cur{score, m};
    if (!have_best || cur < best) {
      have_best = true;
      best = cur;
      choice.selected_m = m;
      choice.weights = std::move(w);
      choice.criterion = std::move(crit);
    }
  }
  return choice;
}

MethodWeights minimize_criterion(const QuadraticCriterion& criterion) {
  const QPSolution sol = solve_simplex_qp(criterion.a, criterion.b);
  MethodWeights out;
  out.weights = sol.weights;
  out.method = criterion.meta.method;
  out.objective = sol.objective + criterion.c;
  out.iterations = sol.iterations;
  return out;
}

Vector combine_mu(const FitBundle& bundle, std::span<const double> weights) {
  if (weights.size() != bundle.fits.size())
    fail(errc::dimension_mismatch, "combine_mu: weight length mismatch");
  Vector mu(bundle.fits.front().mu_hat.size(), 0.0);
  for (std::size_t q = 0; q < bundle.fits.size(); ++q)
    kern::axpy(weights[q], bundle.fits[q].mu_hat, mu);
  return mu;
}

Vector combine_coefficients(const FitBundle& bundle, const CandidateModelSet& models,
                            std::span<const double> weights, std::size_t p) {
  Vector beta(p, 0.0);
  for (std::size_t q = 0; q < models.count(); ++q) {
    const auto& cols = models.models[q];
    for (std::size_t j = 0; j < cols.size(); ++j)
      beta[cols[j]] += weights[q] * bundle.fits[q].theta_hat[j];
  }
  return beta;
}

}  // namespace mabt
