#pragma once

#include <cstdint>

#include "mabt/dataset.hpp"
#include "mabt/rng.hpp"

namespace mabt {

enum class ResampleKind { WithReplacement, WithoutReplacement };

// A realized bootstrap/subsampling draw: the drawn row indices plus the
// per-row selection counts pi (sum = m).
struct ResamplePlan {
  ResampleKind kind = ResampleKind::WithReplacement;
  std::size_t m = 0;
  std::vector<std::uint32_t> counts;   // length n
  std::vector<std::uint32_t> indices;  // length m, draw order
};

// Master seed plus counter-based stream derivation, so replicate b sees the
// same stream no matter how work is scheduled.
struct SeedSpec {
  std::uint64_t master_seed = 0;

  Rng stream(std::initializer_list<std::uint64_t> path) const {
    return Rng(derive_seed(master_seed, path));
  }
  SeedSpec derived(std::initializer_list<std::uint64_t> path) const {
    return SeedSpec{derive_seed(master_seed, path)};
  }
};

constexpr std::size_t kDefaultMaxRetries = 100;

// WithReplacement: m i.i.d. uniform draws on 0..n-1 (counts multinomial).
// WithoutReplacement: simple random sample of m distinct rows.
ResamplePlan draw_plan(std::size_t n, std::size_t m, ResampleKind kind, Rng& stream);

// Redraws until the resampled design of the largest model has full numerical
// rank (every candidate design, for non-nested sets). Throws
// RankRetryExhausted after max_retries failures.
ResamplePlan draw_fullrank_plan(const Dataset& data, const CandidateModelSet& models,
                                std::size_t m, ResampleKind kind, Rng& stream,
                                std::size_t max_retries = kDefaultMaxRetries);

// OLS coefficients on the resampled pairs (index-expansion path).
Vector resampled_fit(const Dataset& data, std::span<const std::size_t> model,
                     const ResamplePlan& plan);

}  // namespace mabt
