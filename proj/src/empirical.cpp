#include "mabt/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mabt/kernels.hpp"
#include "mabt/parallel.hpp"

namespace mabt {

namespace {

constexpr std::uint64_t kTagSplit = 1;
constexpr std::uint64_t kTagMethod = 2;
constexpr std::size_t kHarnessMaxRetries = 1000;

Dataset take_rows(const Dataset& data, const std::vector<std::size_t>& rows) {
  Dataset out;
  out.column_names = data.column_names;
  out.y.resize(rows.size());
  out.x = Matrix(rows.size(), data.p());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.y[i] = data.y[rows[i]];
    for (std::size_t j = 0; j < data.p(); ++j) out.x(i, j) = data.x(rows[i], j);
  }
  return out;
}

}  // namespace

std::vector<std::size_t> order_variables_cp(const Dataset& data) {
  data.validate();
  const std::size_t p = data.p();
  const std::size_t n = data.n();

  if (n <= p) fail(errc::invalid_size, "order_variables_cp: n must exceed p");
  // Full-pool variance from the projection onto the pool's column space;
  // with collinear columns the dof follow the numerical rank.
  const HouseholderQR full_qr(data.x, /*pivot=*/true);
  const std::size_t rank = full_qr.rank();
  if (rank == 0 || n <= rank) fail(errc::rank_deficient, "order_variables_cp: degenerate pool");
  Vector qty(data.y.begin(), data.y.end());
  full_qr.apply_qt(qty);
  double explained = 0.0;
  for (std::size_t j = 0; j < rank; ++j) explained += qty[j] * qty[j];
  const double rss_full = std::max(0.0, kern::sumsq(data.y) - explained);
  const double sigma2 = rss_full / static_cast<double>(n - rank);

  std::vector<std::size_t> selected = {0};
  std::vector<std::size_t> remaining;
  for (std::size_t j = 1; j < p; ++j) remaining.push_back(j);

  double current_rss = std::numeric_limits<double>::infinity();
  {
    const ModelFit base = fit_ols(data, selected);
    current_rss = base.rss;
  }

  std::vector<std::size_t> order;
  while (!remaining.empty()) {
    const double dk = static_cast<double>(selected.size() + 1);
    double best_cp = std::numeric_limits<double>::infinity();
    std::size_t best_pos = 0;
    double best_rss = current_rss;
    for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
      std::vector<std::size_t> trial = selected;
      trial.push_back(remaining[pos]);
      double rss;
      try {
        rss = fit_ols(data, trial).rss;
      } catch (const Error& e) {
        if (e.code() != errc::rank_deficient) throw;
        rss = current_rss;  // a collinear column cannot reduce the fit
      }
      const double cp = rss / static_cast<double>(n) + 2.0 * sigma2 * dk / static_cast<double>(n);
      if (cp < best_cp) {
        best_cp = cp;
        best_pos = pos;
        best_rss = rss;
      }
    }
    order.push_back(remaining[best_pos]);
    selected.push_back(remaining[best_pos]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
    current_rss = best_rss;
  }
  return order;
}

Vector predict_mu(Method method, const Dataset& train, const CandidateModelSet& models,
                  const FitBundle& bundle, const Matrix& x_test, const ResamplePolicy& policy,
                  std::size_t b_reps, const SeedSpec& seeds, std::size_t max_retries) {
  const std::size_t n = train.n();
  auto from_weights = [&](const Vector& w) {
    const Vector beta = combine_coefficients(bundle, models, w, train.p());
    return matvec(x_test, beta);
  };

  switch (method) {
    case Method::Aic:
    case Method::Bic:
    case Method::Mallows:
    case Method::Bms: {
      // Selection methods: predict with the chosen model's coefficients.
      Vector w(models.count(), 0.0);
      if (method == Method::Bms) {
        const ResolvedM resolved =
            resolve_resample_size(policy, train, models, b_reps, seeds.derived({0}), max_retries);
        const QuadraticCriterion crit =
            resolved.gcv ? resolved.gcv->criterion
                         : btma_criterion(train, models, resolved.m, b_reps, seeds.derived({1}),
                                          max_retries);
        w[bms_select(crit)] = 1.0;
      } else if (method == Method::Mallows) {
        std::size_t best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < bundle.fits.size(); ++q) {
          const double v = mallows_cp(bundle.fits[q], bundle.sigma2_full, n);
          if (v < best_val) {
            best = q;
            best_val = v;
          }
        }
        w[best] = 1.0;
      } else {
        const ICKind kind = method == Method::Aic ? ICKind::AIC : ICKind::BIC;
        std::size_t best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (std::size_t q = 0; q < bundle.fits.size(); ++q) {
          const double v = info_criterion(bundle.fits[q], n, kind);
          if (v < best_val) {
            best = q;
            best_val = v;
          }
        }
        w[best] = 1.0;
      }
      return from_weights(w);
    }
    case Method::Saic:
      return from_weights(smoothed_ic_weights(bundle, n, ICKind::AIC).weights);
    case Method::Sbic:
      return from_weights(smoothed_ic_weights(bundle, n, ICKind::BIC).weights);
    case Method::Mma:
      return from_weights(minimize_criterion(mma_criterion(bundle, n)).weights);
    case Method::Jma:
      return from_weights(minimize_criterion(jma_criterion(bundle, train)).weights);
    case Method::Btma: {
      const ResolvedM resolved =
          resolve_resample_size(policy, train, models, b_reps, seeds.derived({0}), max_retries);
      if (resolved.gcv) return from_weights(resolved.gcv->weights.weights);
      const QuadraticCriterion crit =
          btma_criterion(train, models, resolved.m, b_reps, seeds.derived({1}), max_retries);
      return from_weights(minimize_criterion(crit).weights);
    }
    case Method::Sub1:
    case Method::Sub2: {
      const std::size_t m =
          method == Method::Sub1
              ? static_cast<std::size_t>(std::floor(0.632 * static_cast<double>(n)))
              : static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n) *
                                                              static_cast<double>(n))));
      const QuadraticCriterion crit =
          subsampling_criterion(train, models, m, b_reps, seeds.derived({1}), max_retries);
      return from_weights(minimize_criterion(crit).weights);
    }
    case Method::Bag:
      return bagging_cp_predict(train, models, x_test, b_reps, n, seeds.derived({1}),
                                max_retries);
    case Method::Just:
    case Method::Full:
      fail(errc::invalid_config, "predict: just/full are interval baselines only");
  }
  fail(errc::invalid_config, "predict: unknown method");
}

PredictionReport evaluate_splits(const Dataset& data, const PredictionConfig& config,
                                 const SeedSpec& seeds) {
  data.validate();
  if (config.methods.empty()) fail(errc::invalid_config, "predict: no methods");
  if (config.splits == 0) fail(errc::invalid_config, "predict: splits >= 1");
  const std::size_t total_n = data.n();
  if (config.train_n == 0 || config.train_n >= total_n)
    fail(errc::invalid_config, "predict: train size must satisfy 0 < n < N");
  for (Method m : config.methods)
    if (m == Method::Just || m == Method::Full)
      fail(errc::invalid_config, "predict: just/full not in the prediction registry");

  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<Vector> mspe(config.splits, Vector(config.methods.size(), nan));

  parallel_for(config.splits, [&](std::size_t split) {
    const SeedSpec split_seeds = seeds.derived({split});
    Rng stream = split_seeds.stream({kTagSplit});

    // Uniform random train subset; rows kept in file order on both sides.
    std::vector<std::size_t> pool(total_n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < config.train_n; ++i) {
      const std::size_t j = i + stream.uniform_below(total_n - i);
      std::swap(pool[i], pool[j]);
    }
    std::vector<std::size_t> train_rows(pool.begin(),
                                        pool.begin() + static_cast<std::ptrdiff_t>(config.train_n));
    std::sort(train_rows.begin(), train_rows.end());
    std::vector<std::size_t> test_rows(pool.begin() + static_cast<std::ptrdiff_t>(config.train_n),
                                       pool.end());
    std::sort(test_rows.begin(), test_rows.end());

    try {
      const Dataset train_raw = take_rows(data, train_rows);
      const Dataset test_raw = take_rows(data, test_rows);
      const Standardized train_std = standardize(train_raw);
      const Dataset test_std = train_std.transform.apply(test_raw);

      const std::vector<std::size_t> cp_order = order_variables_cp(train_std.data);
      std::vector<std::size_t> column_order = {0};
      column_order.insert(column_order.end(), cp_order.begin(), cp_order.end());
      std::vector<std::size_t> sizes(column_order.size());
      std::iota(sizes.begin(), sizes.end(), std::size_t{1});
      CandidateModelSet models = CandidateModelSet::nested_prefixes(column_order, sizes);
      models.validate(train_std.data);

      const FitBundle bundle = fit_all(train_std.data, models);
      for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
        try {
          const Vector pred = predict_mu(
              config.methods[mi], train_std.data, models, bundle, test_std.x, config.m_policy,
              config.b_reps,
              split_seeds.derived({kTagMethod, static_cast<std::uint64_t>(config.methods[mi])}),
              kHarnessMaxRetries);
          mspe[split][mi] =
              kern::sq_diff_sum(test_std.y, pred) / static_cast<double>(test_rows.size());
        } catch (const Error&) {
          // Counted below.
        }
      }
    } catch (const Error&) {
      // Whole-split failure (standardization or ordering); all methods count.
    }
  });

  PredictionReport report;
  report.config = config;
  report.seed = seeds.master_seed;
  report.total_n = total_n;
  for (std::size_t mi = 0; mi < config.methods.size(); ++mi) {
    PredictionRow row;
    row.method = config.methods[mi];
    std::vector<double> ok;
    for (std::size_t s = 0; s < config.splits; ++s) {
      if (std::isnan(mspe[s][mi]))
        ++row.failures;
      else
        ok.push_back(mspe[s][mi]);
    }
    if (!ok.empty()) {
      double mean = 0.0;
      for (double v : ok) mean += v;
      mean /= static_cast<double>(ok.size());
      double var = 0.0;
      for (double v : ok) var += (v - mean) * (v - mean);
      var = ok.size() > 1 ? var / static_cast<double>(ok.size() - 1) : 0.0;
      row.mspe_mean = mean;
      row.mspe_variance = var;
    } else {
      row.mspe_mean = row.mspe_variance = nan;
    }
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace mabt
