#pragma once

#include "mabt/csvio.hpp"
#include "mabt/sim.hpp"

namespace mabt {

// Greedy forward ordering of the non-intercept regressors by Mallows' Cp
// (variance from the full model); ties to the smaller column index. Returns
// non-intercept column indices in inclusion order.
std::vector<std::size_t> order_variables_cp(const Dataset& data);

struct PredictionConfig {
  std::size_t train_n = 0;
  std::size_t splits = 1000;
  std::size_t b_reps = 500;
  ResamplePolicy m_policy = ResamplePolicy::half_n();
  std::vector<Method> methods;
};

struct PredictionRow {
  Method method;
  double mspe_mean = 0.0;
  double mspe_variance = 0.0;
  std::size_t failures = 0;
};

struct PredictionReport {
  PredictionConfig config;
  std::uint64_t seed = 0;
  std::size_t total_n = 0;
  std::vector<PredictionRow> rows;
};

// Repeated random train/test splits: standardization and Cp ordering are
// redone on each training set (statistics never leak from the test rows),
// nested candidates are prefixes of the ordered pool, and each method's test
// MSPE is averaged over splits.
PredictionReport evaluate_splits(const Dataset& data, const PredictionConfig& config,
                                 const SeedSpec& seeds);

// Test predictions for one method on a fitted training set: the averaged
// coefficients applied to the (already transformed) test design.
Vector predict_mu(Method method, const Dataset& train, const CandidateModelSet& models,
                  const FitBundle& bundle, const Matrix& x_test, const ResamplePolicy& policy,
                  std::size_t b_reps, const SeedSpec& seeds, std::size_t max_retries);

}  // namespace mabt
