#pragma once

#include <optional>

#include "mabt/inference.hpp"

namespace mabt {

// Resample-size policy shared by the harness and the CLI.
struct ResamplePolicy {
  enum class Kind { Fixed, HalfN, Gcv } kind = Kind::HalfN;
  std::size_t fixed_m = 0;
  std::vector<std::size_t> gcv_candidates;  // empty = n/4, n/2, 3n/4, n

  static ResamplePolicy fixed(std::size_t m) { return {Kind::Fixed, m, {}}; }
  static ResamplePolicy half_n() { return {Kind::HalfN, 0, {}}; }
  static ResamplePolicy gcv(std::vector<std::size_t> candidates = {}) {
    return {Kind::Gcv, 0, std::move(candidates)};
  }
};

// Candidate m list for GCV: the policy's own list, or quarters of n, with
// anything below the largest model dimension dropped (such an m can never
// produce a full-rank resample).
std::vector<std::size_t> gcv_candidate_list(const ResamplePolicy& policy, std::size_t n,
                                            std::size_t k_max);

struct ResolvedM {
  std::size_t m = 0;
  std::optional<GcvChoice> gcv;  // set when the policy ran GCV
};

ResolvedM resolve_resample_size(const ResamplePolicy& policy, const Dataset& data,
                                const CandidateModelSet& models, std::size_t b_reps,
                                const SeedSpec& seeds, std::size_t max_retries);

enum class Method {
  Aic,
  Bic,
  Mallows,
  Saic,
  Sbic,
  Mma,
  Jma,
  Bms,
  Sub1,
  Sub2,
  Bag,
  Btma,
  Just,
  Full,
};

const char* method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

// ------------------------------------------------------------ configs ---

struct HansenConfig {
  std::size_t n = 150;
  double alpha = 1.0;
  double r2 = 0.5;
  std::size_t p = 100;
  std::size_t reps = 200;
  std::size_t b_reps = 500;
  ResamplePolicy m_policy = ResamplePolicy::half_n();

  std::size_t model_count() const;  // floor(3 n^{1/3})
  void validate() const;
};

struct CICaseConfig {
  int case_id = 1;  // 1 or 2
  std::size_t n = 100;
  double eta = 0.5;
  double rho = 0.7;
  double c = 0.5;
  std::size_t k = 10;
  std::size_t reps = 500;
  std::size_t u_draws = 500;
  std::size_t b_reps = 500;
  double level = 0.95;
  ResamplePolicy m_policy = ResamplePolicy::gcv();

  void validate() const;
};

struct HansenDraw {
  Dataset data;
  Vector mu_true;
  CandidateModelSet models;
};

struct CICaseDraw {
  Dataset data;
  Vector beta_true;
  CandidateModelSet models;
  std::size_t m0_true = 0;
};

HansenDraw gen_hansen(const HansenConfig& config, Rng& stream);
CICaseDraw gen_ci_case(const CICaseConfig& config, Rng& stream);

// ------------------------------------------------------------ reports ---

struct RiskRow {
  Method method;
  double mean_risk = 0.0;
  double mc_se = 0.0;
  std::size_t failures = 0;
};

struct RiskReport {
  HansenConfig config;
  std::uint64_t seed = 0;
  std::vector<RiskRow> rows;
};

struct CoverageRow {
  Method method;
  std::size_t coef_index = 0;  // j
  double cp = 0.0;
  double cp_se = 0.0;
  double mean_length = 0.0;
  double length_se = 0.0;
  std::size_t failures = 0;
};

struct CoverageReport {
  CICaseConfig config;
  std::uint64_t seed = 0;
  std::vector<CoverageRow> rows;
};

// Monte Carlo risk study over the Hansen designs: per replication, each
// method's ||mu_hat - mu||^2 against the known mean. Per-rep failures are
// excluded from the averages and counted.
RiskReport run_risk_experiment(const HansenConfig& config, const std::vector<Method>& methods,
                               const SeedSpec& seeds);

// Coverage study over the finite-regressor cases; targets are beta_3 and
// beta_4 at the configured nominal level.
CoverageReport run_coverage_experiment(const CICaseConfig& config,
                                       const std::vector<Method>& methods,
                                       const SeedSpec& seeds);

// One method's mu estimate on a fitted dataset (shared by the risk study
// and the CLI fit path). Bootstrap-based methods derive their streams from
// seeds with their own method tag.
Vector estimate_mu(Method method, const Dataset& data, const CandidateModelSet& models,
                   const FitBundle& bundle, const ResamplePolicy& policy, std::size_t b_reps,
                   const SeedSpec& seeds, std::size_t max_retries);

}  // namespace mabt
