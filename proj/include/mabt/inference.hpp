#pragma once

#include <optional>

#include "mabt/criteria.hpp"

namespace mabt {

// Moment estimates feeding the simulated limit distribution. Models must be
// a nested chain whose largest member uses every column of the dataset; all
// selection matrices are then leading-block extractors.
struct AsymptoticInputs {
  double sigma2_hat = 0.0;
  Matrix q_hat;   // (1/n) sum x_i x_i', in candidate column order
  Matrix xi_hat;  // residual-weighted moment, same order, dof-normalized
  std::size_t n = 0;
  std::size_t m = 0;  // resample size used by the weight criterion
  std::size_t k = 0;  // full model dimension
  std::size_t m0 = 0; // number of under-fitted models
  std::vector<std::size_t> dims;  // k_q for all M candidates
  // Original dataset column behind each position of the prefix ordering.
  std::vector<std::size_t> column_order;

  std::size_t r_count() const { return dims.size() - m0; }

  // Position of a 1-based dataset column index in the prefix ordering.
  std::size_t position_of(std::size_t j) const;
};

enum class LimitKind { BTMA, MMA, JMA };

const char* limit_kind_name(LimitKind kind);

// Full-model residual moments. M0 is taken as given when known (simulation
// designs know it); otherwise it defaults to the BIC-selected index, so the
// selected model itself counts as correct. Throws SingularQ when X'X/n is
// not positive definite.
AsymptoticInputs estimate_asymptotics(const Dataset& data, const CandidateModelSet& models,
                                      std::size_t m,
                                      std::optional<std::size_t> known_m0 = std::nullopt);

// R x R matrix of the simulated weight problem for one normal draw z.
Matrix delta_matrix(const AsymptoticInputs& inputs, std::span<const double> z, LimitKind kind);

struct LimitDrawSet {
  Matrix draws;  // k x U; column u = sum_r nu_r V_r z^(u)
  Matrix nu;     // R x U simplex weights per draw
  LimitKind kind = LimitKind::BTMA;
  std::size_t u_count = 0;
};

// Draw z^(u) ~ N(0, Xi_hat) (eigenvalues floored at zero), build the draw's
// Delta, minimize over the R-simplex, and accumulate sum_r nu_r V_r z.
LimitDrawSet simulate_limit_draws(const AsymptoticInputs& inputs, std::size_t u_count,
                                  LimitKind kind, const SeedSpec& seeds);

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;
  std::string method;
  std::size_t coef_index = 0;  // 1-based
};

// Interval for beta_j from the averaging estimator and a simulated limit
// distribution; the upper quantile is subtracted for the lower endpoint.
ConfidenceInterval ci_averaging(const Dataset& data, const CandidateModelSet& models,
                                const MethodWeights& weights, const LimitDrawSet& draws,
                                std::size_t j, double level);

// Classical z interval under a single model; sigma2 defaults to the
// model-specific rss_q / (n - k_q). Serves the JUST/FULL/AIC/BIC baselines.
ConfidenceInterval ci_ols_z(const Dataset& data, std::span<const std::size_t> model,
                            std::size_t j, double level,
                            std::optional<double> sigma2 = std::nullopt);

// Bootstrap-selection interval: symmetric about the final replicate's
// estimate, half-width from the level-quantile of |sqrt(n)(beta* - beta_hat)|.
ConfidenceInterval ci_bms_bootstrap(const Dataset& data, const CandidateModelSet& models,
                                    std::size_t m, std::size_t b_reps, std::size_t j,
                                    double level, const SeedSpec& seeds,
                                    std::size_t max_retries = kDefaultMaxRetries);

// Sorted-order linear interpolation quantile: position 1 + (U-1)p.
double quantile_type7(const Vector& sorted_values, double p);

}  // namespace mabt
