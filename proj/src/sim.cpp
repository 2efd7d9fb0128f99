#include "mabt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mabt/kernels.hpp"
#include "mabt/parallel.hpp"

namespace mabt {

namespace {

// Stream-derivation tags: every consumer of randomness inside a replication
// owns a distinct path so methods can be added or removed without disturbing
// each other.
constexpr std::uint64_t kTagData = 1;
constexpr std::uint64_t kTagMethod = 2;
constexpr std::uint64_t kTagGcv = 3;
constexpr std::uint64_t kTagLimit = 4;
constexpr std::uint64_t kTagBms = 5;

// The harness retries rank-deficient resamples far longer than the library
// default: with m close to the largest model dimension a valid draw can be
// rare (n = 20, m = 10 succeeds ~6.5% of the time), yet exhaustion should
// stay a pathology rather than a routine outcome.
constexpr std::size_t kHarnessMaxRetries = 1000;

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double se_of_mean(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double var = ss / static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

template <typename Score>
std::size_t select_min(const FitBundle& bundle, Score&& score) {
  std::size_t best = 0;
  double best_val = score(0);
  for (std::size_t q = 1; q < bundle.fits.size(); ++q) {
    const double v = score(q);
    const bool better = v < best_val ||
                        (v == best_val && (bundle.fits[q].k < bundle.fits[best].k ||
                                           (bundle.fits[q].k == bundle.fits[best].k && q < best)));
    if (better) {
      best = q;
      best_val = v;
    }
  }
  return best;
}

}  // namespace

std::vector<std::size_t> gcv_candidate_list(const ResamplePolicy& policy, std::size_t n,
                                            std::size_t k_max) {
  std::vector<std::size_t> raw = policy.gcv_candidates;
  if (raw.empty()) {
    raw = {(n + 3) / 4, (n + 1) / 2, (3 * n + 3) / 4, n};
  }
  std::vector<std::size_t> out;
  for (std::size_t m : raw) {
    if (m < k_max) continue;
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty())
    fail(errc::invalid_size, "gcv: no candidate resample size reaches the largest model dimension");
  return out;
}

ResolvedM resolve_resample_size(const ResamplePolicy& policy, const Dataset& data,
                                const CandidateModelSet& models, std::size_t b_reps,
                                const SeedSpec& seeds, std::size_t max_retries) {
  ResolvedM out;
  switch (policy.kind) {
    case ResamplePolicy::Kind::Fixed:
      if (policy.fixed_m == 0) fail(errc::invalid_size, "m: fixed policy needs m >= 1");
      out.m = policy.fixed_m;
      return out;
    case ResamplePolicy::Kind::HalfN:
      out.m = std::max<std::size_t>(1, data.n() / 2);
      return out;
    case ResamplePolicy::Kind::Gcv: {
      const auto dims = models.dims();
      const std::size_t k_max = *std::max_element(dims.begin(), dims.end());
      const auto candidates = gcv_candidate_list(policy, data.n(), k_max);
      out.gcv = gcv_select_m(data, models, candidates, b_reps, seeds, max_retries);
      out.m = out.gcv->selected_m;
      return out;
    }
  }
  fail(errc::invalid_config, "m: unknown policy");
}

const char* method_name(Method m) {
  switch (m) {
    case Method::Aic: return "aic";
    case Method::Bic: return "bic";
    case Method::Mallows: return "mallows";
    case Method::Saic: return "saic";
    case Method::Sbic: return "sbic";
    case Method::Mma: return "mma";
    case Method::Jma: return "jma";
    case Method::Bms: return "bms";
    case Method::Sub1: return "sub1";
    case Method::Sub2: return "sub2";
    case Method::Bag: return "bag";
    case Method::Btma: return "btma";
    case Method::Just: return "just";
    case Method::Full: return "full";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  static constexpr std::pair<std::string_view, Method> kTable[] = {
      {"aic", Method::Aic},   {"bic", Method::Bic},     {"mallows", Method::Mallows},
      {"saic", Method::Saic}, {"s-aic", Method::Saic},  {"sbic", Method::Sbic},
      {"s-bic", Method::Sbic},{"mma", Method::Mma},     {"jma", Method::Jma},
      {"bms", Method::Bms},   {"sub1", Method::Sub1},   {"sub", Method::Sub1},
      {"sub2", Method::Sub2}, {"bag", Method::Bag},     {"btma", Method::Btma},
      {"just", Method::Just}, {"full", Method::Full},
  };
  for (const auto& [key, value] : kTable)
    if (key == name) return value;
  return std::nullopt;
}

std::size_t HansenConfig::model_count() const {
  return static_cast<std::size_t>(std::floor(3.0 * std::cbrt(static_cast<double>(n))));
}

void HansenConfig::validate() const {
  if (n < 4) fail(errc::invalid_config, "hansen: n too small");
  if (!(r2 > 0.0 && r2 < 1.0)) fail(errc::invalid_config, "hansen: R^2 must lie in (0,1)");
  if (!(alpha > 0.0)) fail(errc::invalid_config, "hansen: alpha must be positive");
  if (p == 0 || reps == 0 || b_reps == 0) fail(errc::invalid_config, "hansen: counts must be positive");
  const std::size_t m_count = model_count();
  if (m_count == 0 || m_count > std::min(n - 1, p))
    fail(errc::invalid_config, "hansen: candidate count out of range");
}

void CICaseConfig::validate() const {
  if (case_id != 1 && case_id != 2) fail(errc::invalid_config, "ci case: case must be 1 or 2");
  if (k != 10) fail(errc::invalid_config, "ci case: k is fixed at 10 in this design");
  if (n <= k) fail(errc::invalid_config, "ci case: n must exceed k");
  if (reps == 0 || u_draws == 0 || b_reps == 0)
    fail(errc::invalid_config, "ci case: counts must be positive");
  if (!(level > 0.0 && level <= 1.0)) fail(errc::invalid_config, "ci case: level in (0,1]");
  if (!(eta > 0.0)) fail(errc::invalid_config, "ci case: eta must be positive");
}

HansenDraw gen_hansen(const HansenConfig& config, Rng& stream) {
  config.validate();
  const std::size_t n = config.n, p = config.p;
  HansenDraw draw;
  draw.data.x = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) draw.data.x(i, 0) = 1.0;
  for (std::size_t j = 1; j < p; ++j) {
    auto col = draw.data.x.col(j);
    for (std::size_t i = 0; i < n; ++i) col[i] = stream.next_normal();
  }

  const double c = std::sqrt(config.r2 / (1.0 - config.r2));
  Vector theta(p);
  for (std::size_t j = 0; j < p; ++j)
    theta[j] = c * std::sqrt(2.0 * config.alpha) *
               std::pow(static_cast<double>(j + 1), -config.alpha - 0.5);

  draw.mu_true.assign(n, 0.0);
  for (std::size_t j = 0; j < p; ++j) kern::axpy(theta[j], draw.data.x.col(j), draw.mu_true);

  draw.data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) draw.data.y[i] = draw.mu_true[i] + stream.next_normal();

  draw.models = CandidateModelSet::nested_first_columns(config.model_count());
  return draw;
}

CICaseDraw gen_ci_case(const CICaseConfig& config, Rng& stream) {
  config.validate();
  const std::size_t n = config.n, k = config.k;

  Matrix sigma_x(k - 1, k - 1);
  for (std::size_t i = 0; i + 1 < k; ++i)
    for (std::size_t j = 0; j + 1 < k; ++j)
      sigma_x(i, j) = i == j ? config.rho : config.rho * config.rho;
  Matrix lower;
  if (!cholesky(sigma_x, lower))
    fail(errc::sigma_not_pd, "ci case: covariance matrix not positive definite");

  CICaseDraw draw;
  draw.data.x = Matrix(n, k);
  Vector g(k - 1), row(k - 1);
  for (std::size_t i = 0; i < n; ++i) {
    draw.data.x(i, 0) = 1.0;
    for (std::size_t j = 0; j + 1 < k; ++j) g[j] = stream.next_normal();
    std::fill(row.begin(), row.end(), 0.0);
    for (std::size_t j = 0; j + 1 < k; ++j)
      for (std::size_t l = 0; l <= j; ++l) row[j] += lower(j, l) * g[l];
    for (std::size_t j = 0; j + 1 < k; ++j) draw.data.x(i, j + 1) = row[j];
  }

  const double c = config.c;
  draw.beta_true.assign(k, 0.0);
  draw.beta_true[0] = 1.0;
  draw.beta_true[1] = 1.0;
  if (config.case_id == 1) {
    draw.beta_true[2] = c;
    draw.beta_true[3] = c * c;
    draw.beta_true[4] = c * c * c;
    draw.beta_true[5] = c * c * c * c;
  } else {
    draw.beta_true[2] = c * c * c * c;
    draw.beta_true[3] = c * c * c;
    draw.beta_true[4] = c * c;
    draw.beta_true[5] = c;
  }

  const Vector mu = matvec(draw.data.x, draw.beta_true);
  draw.data.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    draw.data.y[i] = mu[i] + config.eta * stream.next_normal();

  // Core regressors {1, x_2}; candidates add one auxiliary column at a time.
  std::vector<std::size_t> order(k);
  std::vector<std::size_t> sizes;
  for (std::size_t j = 0; j < k; ++j) order[j] = j;
  for (std::size_t kq = 2; kq <= k; ++kq) sizes.push_back(kq);
  draw.models = CandidateModelSet::nested_prefixes(order, sizes);
  draw.m0_true = 4;
  return draw;
}

Vector estimate_mu(Method method, const Dataset& data, const CandidateModelSet& models,
                   const FitBundle& bundle, const ResamplePolicy& policy, std::size_t b_reps,
                   const SeedSpec& seeds, std::size_t max_retries) {
  const std::size_t n = data.n();
  switch (method) {
    case Method::Aic:
    case Method::Bic: {
      const ICKind kind = method == Method::Aic ? ICKind::AIC : ICKind::BIC;
      const std::size_t q = select_min(
          bundle, [&](std::size_t i) { return info_criterion(bundle.fits[i], n, kind); });
      return bundle.fits[q].mu_hat;
    }
    case Method::Mallows: {
      const std::size_t q = select_min(bundle, [&](std::size_t i) {
        return mallows_cp(bundle.fits[i], bundle.sigma2_full, n);
      });
      return bundle.fits[q].mu_hat;
    }
    case Method::Saic:
      return combine_mu(bundle, smoothed_ic_weights(bundle, n, ICKind::AIC).weights);
    case Method::Sbic:
      return combine_mu(bundle, smoothed_ic_weights(bundle, n, ICKind::BIC).weights);
    case Method::Mma:
      return combine_mu(bundle, minimize_criterion(mma_criterion(bundle, n)).weights);
    case Method::Jma:
      return combine_mu(bundle, minimize_criterion(jma_criterion(bundle, data)).weights);
    case Method::Btma: {
      const ResolvedM resolved =
          resolve_resample_size(policy, data, models, b_reps, seeds.derived({0}), max_retries);
      if (resolved.gcv) return combine_mu(bundle, resolved.gcv->weights.weights);
      const QuadraticCriterion crit =
          btma_criterion(data, models, resolved.m, b_reps, seeds.derived({1}), max_retries);
      return combine_mu(bundle, minimize_criterion(crit).weights);
    }
    case Method::Bms: {
      const ResolvedM resolved =
          resolve_resample_size(policy, data, models, b_reps, seeds.derived({0}), max_retries);
      const QuadraticCriterion crit =
          resolved.gcv ? resolved.gcv->criterion
                       : btma_criterion(data, models, resolved.m, b_reps, seeds.derived({1}),
                                        max_retries);
      return bundle.fits[bms_select(crit)].mu_hat;
    }
    case Method::Sub1:
    case Method::Sub2: {
      const std::size_t m =
          method == Method::Sub1
              ? static_cast<std::size_t>(std::floor(0.632 * static_cast<double>(n)))
              : static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n) *
                                                              static_cast<double>(n))));
      const QuadraticCriterion crit =
          subsampling_criterion(data, models, m, b_reps, seeds.derived({1}), max_retries);
      return combine_mu(bundle, minimize_criterion(crit).weights);
    }
    case Method::Bag:
      return bagging_cp_predict(data, models, data.x, b_reps, n, seeds.derived({1}), max_retries);
    case Method::Just:
    case Method::Full:
      fail(errc::invalid_config, "estimate_mu: just/full are interval baselines only");
  }
  fail(errc::invalid_config, "estimate_mu: unknown method");
}

RiskReport run_risk_experiment(const HansenConfig& config, const std::vector<Method>& methods,
                               const SeedSpec& seeds) {
  config.validate();
  if (methods.empty()) fail(errc::invalid_config, "risk experiment: no methods");
  for (Method m : methods)
    if (m == Method::Just || m == Method::Full)
      fail(errc::invalid_config, "risk experiment: just/full not in the risk registry");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Vector> losses(config.reps, Vector(methods.size(), nan));

  parallel_for(config.reps, [&](std::size_t rep) {
    const SeedSpec rep_seeds = seeds.derived({rep});
    Rng data_stream = rep_seeds.stream({kTagData});
    const HansenDraw draw = gen_hansen(config, data_stream);
    const FitBundle bundle = fit_all(draw.data, draw.models);
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      try {
        const Vector mu = estimate_mu(
            methods[mi], draw.data, draw.models, bundle, config.m_policy, config.b_reps,
            rep_seeds.derived({kTagMethod, static_cast<std::uint64_t>(methods[mi])}),
            kHarnessMaxRetries);
        losses[rep][mi] = kern::sq_diff_sum(mu, draw.mu_true);
      } catch (const Error&) {
        // Recorded below as a failed replication for this method.
      }
    }
  });

  RiskReport report;
  report.config = config;
  report.seed = seeds.master_seed;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    RiskRow row;
    row.method = methods[mi];
    std::vector<double> ok;
    ok.reserve(config.reps);
    for (std::size_t rep = 0; rep < config.reps; ++rep) {
      if (std::isnan(losses[rep][mi]))
        ++row.failures;
      else
        ok.push_back(losses[rep][mi]);
    }
    if (!ok.empty()) {
      row.mean_risk = mean_of(ok);
      row.mc_se = se_of_mean(ok, row.mean_risk);
    } else {
      row.mean_risk = nan;
      row.mc_se = nan;
    }
    report.rows.push_back(row);
  }
  return report;
}

namespace {

struct Cell {
  bool ok = false;
  bool covered = false;
  double length = 0.0;
};

ConfidenceInterval degenerate_zero_interval(std::size_t j, double level, const char* method) {
  ConfidenceInterval ci;
  ci.method = method;
  ci.coef_index = j;
  ci.level = level;
  ci.lower = 0.0;
  ci.upper = 0.0;
  return ci;
}

}  // namespace

CoverageReport run_coverage_experiment(const CICaseConfig& config,
                                       const std::vector<Method>& methods,
                                       const SeedSpec& seeds) {
  config.validate();
  if (methods.empty()) fail(errc::invalid_config, "coverage experiment: no methods");
  static constexpr Method kAllowed[] = {Method::Just, Method::Full, Method::Aic, Method::Bic,
                                        Method::Bms,  Method::Mma,  Method::Jma, Method::Btma};
  for (Method m : methods)
    if (std::find(std::begin(kAllowed), std::end(kAllowed), m) == std::end(kAllowed))
      fail(errc::invalid_config, std::string("coverage experiment: method ") + method_name(m) +
                                     " has no interval construction");

  const std::vector<std::size_t> targets = {3, 4};
  const std::size_t cells_per_rep = methods.size() * targets.size();
  std::vector<std::vector<Cell>> cells(config.reps, std::vector<Cell>(cells_per_rep));

  const bool needs_m = std::find(methods.begin(), methods.end(), Method::Btma) != methods.end() ||
                       std::find(methods.begin(), methods.end(), Method::Bms) != methods.end();
  const bool needs_limit =
      std::find(methods.begin(), methods.end(), Method::Btma) != methods.end() ||
      std::find(methods.begin(), methods.end(), Method::Mma) != methods.end() ||
      std::find(methods.begin(), methods.end(), Method::Jma) != methods.end();

  parallel_for(config.reps, [&](std::size_t rep) {
    const SeedSpec rep_seeds = seeds.derived({rep});
    Rng data_stream = rep_seeds.stream({kTagData});
    const CICaseDraw draw = gen_ci_case(config, data_stream);
    const FitBundle bundle = fit_all(draw.data, draw.models);
    const std::size_t n = config.n;

    ResolvedM resolved;
    resolved.m = std::max<std::size_t>(1, n / 2);
    if (needs_m) {
      resolved = resolve_resample_size(config.m_policy, draw.data, draw.models, config.b_reps,
                                       rep_seeds.derived({kTagGcv}), kHarnessMaxRetries);
    }

    // The design's under-fitted count is known here; real-data paths fall
    // back to the BIC estimate inside estimate_asymptotics.
    AsymptoticInputs asym;
    if (needs_limit)
      asym = estimate_asymptotics(draw.data, draw.models, resolved.m, draw.m0_true);

    auto record = [&](std::size_t mi, std::size_t ti, const ConfidenceInterval& ci) {
      Cell& cell = cells[rep][mi * targets.size() + ti];
      cell.ok = true;
      const double truth = draw.beta_true[targets[ti] - 1];
      cell.covered = ci.lower <= truth && truth <= ci.upper;
      cell.length = ci.upper - ci.lower;
    };

    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      const Method method = methods[mi];
      try {
        switch (method) {
          case Method::Just:
          case Method::Full: {
            const auto& model = method == Method::Just ? draw.models.models[draw.m0_true]
                                                       : draw.models.models.back();
            for (std::size_t ti = 0; ti < targets.size(); ++ti)
              record(mi, ti, ci_ols_z(draw.data, model, targets[ti], config.level));
            break;
          }
          case Method::Aic:
          case Method::Bic: {
            const ICKind kind = method == Method::Aic ? ICKind::AIC : ICKind::BIC;
            const std::size_t q = select_min(bundle, [&](std::size_t i) {
              return info_criterion(bundle.fits[i], n, kind);
            });
            const auto& model = draw.models.models[q];
            for (std::size_t ti = 0; ti < targets.size(); ++ti) {
              const std::size_t j = targets[ti];
              const bool in_model =
                  std::find(model.begin(), model.end(), j - 1) != model.end();
              // Post-selection interval: an unselected coefficient is the
              // point estimate 0 with no sampling spread.
              record(mi, ti,
                     in_model ? ci_ols_z(draw.data, model, j, config.level)
                              : degenerate_zero_interval(j, config.level, method_name(method)));
            }
            break;
          }
          case Method::Bms: {
            for (std::size_t ti = 0; ti < targets.size(); ++ti)
              record(mi, ti,
                     ci_bms_bootstrap(draw.data, draw.models, resolved.m, config.b_reps,
                                      targets[ti], config.level, rep_seeds.derived({kTagBms}),
                                      kHarnessMaxRetries));
            break;
          }
          case Method::Mma:
          case Method::Jma:
          case Method::Btma: {
            MethodWeights weights;
            LimitKind kind = LimitKind::BTMA;
            if (method == Method::Mma) {
              kind = LimitKind::MMA;
              weights = minimize_criterion(mma_criterion(bundle, n));
            } else if (method == Method::Jma) {
              kind = LimitKind::JMA;
              weights = minimize_criterion(jma_criterion(bundle, draw.data));
            } else {
              weights = resolved.gcv
                            ? resolved.gcv->weights
                            : minimize_criterion(btma_criterion(
                                  draw.data, draw.models, resolved.m, config.b_reps,
                                  rep_seeds.derived({kTagMethod, static_cast<std::uint64_t>(
                                                                     Method::Btma)}),
                                  kHarnessMaxRetries));
            }
            const LimitDrawSet draws = simulate_limit_draws(
                asym, config.u_draws, kind,
                rep_seeds.derived({kTagLimit, static_cast<std::uint64_t>(kind)}));
            for (std::size_t ti = 0; ti < targets.size(); ++ti)
              record(mi, ti,
                     ci_averaging(draw.data, draw.models, weights, draws, targets[ti],
                                  config.level));
            break;
          }
          default:
            break;
        }
      } catch (const Error&) {
        // Cells stay !ok and are counted as failures.
      }
    }
  });

  CoverageReport report;
  report.config = config;
  report.seed = seeds.master_seed;
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    for (std::size_t ti = 0; ti < targets.size(); ++ti) {
      CoverageRow row;
      row.method = methods[mi];
      row.coef_index = targets[ti];
      std::vector<double> lengths;
      std::size_t covered = 0, ok_count = 0;
      for (std::size_t rep = 0; rep < config.reps; ++rep) {
        const Cell& cell = cells[rep][mi * targets.size() + ti];
        if (!cell.ok) {
          ++row.failures;
          continue;
        }
        ++ok_count;
        covered += cell.covered ? 1 : 0;
        lengths.push_back(cell.length);
      }
      if (ok_count > 0) {
        row.cp = static_cast<double>(covered) / static_cast<double>(ok_count);
        row.cp_se = std::sqrt(row.cp * (1.0 - row.cp) / static_cast<double>(ok_count));
        row.mean_length = mean_of(lengths);
        row.length_se = se_of_mean(lengths, row.mean_length);
      } else {
        row.cp = row.cp_se = row.mean_length = row.length_se =
            std::numeric_limits<double>::quiet_NaN();
      }
      report.rows.push_back(row);
    }
  }
  return report;
}

}  // namespace mabt
