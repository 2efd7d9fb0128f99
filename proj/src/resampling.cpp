#include "mabt/resampling.hpp"

#include <numeric>

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

bool plan_full_rank(const Dataset& data, const CandidateModelSet& models,
                    const ResamplePlan& plan) {
  auto check = [&](const std::vector<std::size_t>& model) {
    if (plan.m < model.size()) return false;
    const Matrix xs = expand_rows(data.x, model, plan.indices);
    const HouseholderQR qr(xs, /*pivot=*/true);
    return qr.rank() == model.size();
  };
  if (models.nested) return check(models.models[models.largest_index()]);
  for (const auto& model : models.models)
    if (!check(model)) return false;
  return true;
}

}  // namespace

ResamplePlan draw_plan(std::size_t n, std::size_t m, ResampleKind kind, Rng& stream) {
  if (n == 0 || m == 0) fail(errc::invalid_size, "draw_plan: n and m must be positive");
  if (kind == ResampleKind::WithoutReplacement && m > n)
    fail(errc::invalid_size, "draw_plan: m > n without replacement");

  ResamplePlan plan;
  plan.kind = kind;
  plan.m = m;
  plan.counts.assign(n, 0);
  plan.indices.resize(m);

  if (kind == ResampleKind::WithReplacement) {
    for (std::size_t i = 0; i < m; ++i) {
      const auto r = static_cast<std::uint32_t>(stream.uniform_below(n));
      plan.indices[i] = r;
      ++plan.counts[r];
    }
  } else {
    // Partial Fisher-Yates over 0..n-1.
    std::vector<std::uint32_t> pool(n);
    std::iota(pool.begin(), pool.end(), 0u);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + stream.uniform_below(n - i);
      std::swap(pool[i], pool[j]);
      plan.indices[i] = pool[i];
      ++plan.counts[pool[i]];
    }
  }
  return plan;
}

ResamplePlan draw_fullrank_plan(const Dataset& data, const CandidateModelSet& models,
                                std::size_t m, ResampleKind kind, Rng& stream,
                                std::size_t max_retries) {
  if (max_retries == 0) fail(errc::invalid_size, "draw_fullrank_plan: max_retries >= 1");
  for (std::size_t attempt = 0; attempt < max_retries; ++attempt) {
    ResamplePlan plan = draw_plan(data.n(), m, kind, stream);
    if (plan_full_rank(data, models, plan)) return plan;
  }
  fail(errc::rank_retry_exhausted,
       "draw_fullrank_plan: no full-rank resample in " + std::to_string(max_retries) +
           " tries (m = " + std::to_string(m) + " too small for the largest model?)");
}

Vector resampled_fit(const Dataset& data, std::span<const std::size_t> model,
                     const ResamplePlan& plan) {
  if (plan.counts.size() != data.n())
    fail(errc::dimension_mismatch, "resampled_fit: plan drawn for a different n");
  const Matrix xs = expand_rows(data.x, model, plan.indices);
  Vector ys(plan.m);
  for (std::size_t i = 0; i < plan.m; ++i) ys[i] = data.y[plan.indices[i]];

  const HouseholderQR qr(xs, /*pivot=*/true);
  if (qr.rank() < model.size())
    fail(errc::rank_deficient, "resampled_fit: resampled design rank deficient");
  return qr.solve(ys);
}

}  // namespace mabt
