#pragma once

#include <string>

#include "mabt/regression.hpp"
#include "mabt/resampling.hpp"
#include "mabt/simplex_qp.hpp"

namespace mabt {

struct CriterionMeta {
  std::string method;
  std::size_t b_reps = 0;
  std::size_t m = 0;
  std::vector<std::size_t> dims;  // model dimensions, in candidate order
};

// Weight-selection objective as data: w'Aw + b'w + c over the simplex.
struct QuadraticCriterion {
  Matrix a;
  Vector b;
  double c = 0.0;
  CriterionMeta meta;

  double value(std::span<const double> w) const { return quad_form(a, b, w) + c; }
};

struct MethodWeights {
  Vector weights;
  std::string method;
  double objective = 0.0;
  std::size_t iterations = 0;
};

// One inner bootstrap replicate: draw a plan, redraw
// while the resampled design is rank deficient, then refit every candidate
// on the resampled pairs. rss_star is the residual sum of squares on the
// resampled data (what replicate-level Cp selection needs).
struct BootstrapReplicate {
  std::vector<Vector> theta;
  std::vector<double> rss_star;
  ResamplePlan plan;
};

BootstrapReplicate bootstrap_replicate(const Dataset& data, const CandidateModelSet& models,
                                       std::size_t m, ResampleKind kind, Rng& stream,
                                       std::size_t max_retries = kDefaultMaxRetries);

// Residual columns against the original data: column q = y - X_(q) theta[q].
Matrix replicate_residual_columns(const Dataset& data, const CandidateModelSet& models,
                                  const BootstrapReplicate& rep);

// Monte Carlo bootstrap criterion: A = (1/(nB)) sum_b E_b' E_b, b = 0, c = 0.
// Replicate b draws from the stream derived as seeds.stream({b}).
QuadraticCriterion btma_criterion(const Dataset& data, const CandidateModelSet& models,
                                  std::size_t m, std::size_t b_reps, const SeedSpec& seeds,
                                  std::size_t max_retries = kDefaultMaxRetries);

// Same construction with without-replacement plans.
QuadraticCriterion subsampling_criterion(const Dataset& data, const CandidateModelSet& models,
                                         std::size_t m, std::size_t b_reps, const SeedSpec& seeds,
                                         std::size_t max_retries = kDefaultMaxRetries);

// A = E'E / n, b_q = (2 sigma2_full / n) k_q. Unit weights give Mallows' Cp.
QuadraticCriterion mma_criterion(const FitBundle& bundle, std::size_t n);

// Leave-one-out shortcut: column q scaled by 1/(1 - h_ii(q)); A is the Gram
// of those columns over n. Throws LeverageOne at a saturated point.
QuadraticCriterion jma_criterion(const FitBundle& bundle, const Dataset& data);

// w_q proportional to exp(-IC_q / 2), stabilized by subtracting the minimum.
MethodWeights smoothed_ic_weights(const FitBundle& bundle, std::size_t n, ICKind kind);

// argmin over unit weights = argmin of diag(A); ties toward the smaller
// dimension, then the smaller index. Returns a 0-based candidate index.
std::size_t bms_select(const QuadraticCriterion& criterion);

// Per replicate: full-rank resample, refit, Cp-select on the replicate, and
// predict at x_new; predictions averaged over b_reps. Requires m > k_max so
// the replicate variance estimate exists.
Vector bagging_cp_predict(const Dataset& data, const CandidateModelSet& models,
                          const Matrix& x_new, std::size_t b_reps, std::size_t m,
                          const SeedSpec& seeds,
                          std::size_t max_retries = kDefaultMaxRetries);

struct GcvChoice {
  std::size_t selected_m = 0;
  std::vector<std::pair<std::size_t, double>> scores;  // (m, score) in input order
  MethodWeights weights;          // weights at the selected m
  QuadraticCriterion criterion;   // criterion at the selected m
};

// Scores GCV(m) = (||y - mu(w_m)||^2 / n) / (1 - sum_q w_q k_q / n)^2 over
// the candidate list; ties to the smaller m. Candidate streams derive from
// seeds by the value of m.
GcvChoice gcv_select_m(const Dataset& data, const CandidateModelSet& models,
                       const std::vector<std::size_t>& candidate_ms, std::size_t b_reps,
                       const SeedSpec& seeds, std::size_t max_retries = kDefaultMaxRetries);

// Simplex minimization of a criterion, tagged with its method name.
MethodWeights minimize_criterion(const QuadraticCriterion& criterion);

// mu(w) = sum_q w_q mu_q from in-sample fits.
Vector combine_mu(const FitBundle& bundle, std::span<const double> weights);

// sum_q w_q theta_q, padded to the full pool length p.
Vector combine_coefficients(const FitBundle& bundle, const CandidateModelSet& models,
                            std::span<const double> weights, std::size_t p);

}  // namespace mabt
