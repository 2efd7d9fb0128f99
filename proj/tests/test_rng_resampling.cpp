#include <doctest.h>

#include <cmath>

#include "mabt/resampling.hpp"

using namespace mabt;

namespace {

Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t p) {
  Rng rng(seed);
  Dataset d;
  d.x = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) d.x(i, 0) = 1.0;
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) d.x(i, j) = rng.next_normal();
  d.y.resize(n);
  for (double& v : d.y) v = rng.next_normal();
  return d;
}

}  // namespace

TEST_CASE("streams replay exactly and derived paths differ") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  const SeedSpec seeds{99};
  CHECK(derive_seed(99, {1}) != derive_seed(99, {2}));
  CHECK(derive_seed(99, {1, 2}) != derive_seed(99, {2, 1}));
  Rng s1 = seeds.stream({7});
  Rng s2 = seeds.stream({7});
  CHECK(s1.next_u64() == s2.next_u64());
}

TEST_CASE("uniform_below stays in range and covers the support") {
  Rng rng(3);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 7000; ++i) ++hits[rng.uniform_below(7)];
  for (int h : hits) CHECK(h > 800);  // roughly uniform
}

TEST_CASE("normal draws have the right first moments") {
  Rng rng(11);
  double sum = 0.0, sumsq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(sumsq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("draw_plan with n = 1 concentrates all mass") {
  Rng rng(1);
  const ResamplePlan plan = draw_plan(1, 3, ResampleKind::WithReplacement, rng);
  REQUIRE(plan.counts.size() == 1);
  CHECK(plan.counts[0] == 3);
  CHECK(plan.indices == std::vector<std::uint32_t>{0, 0, 0});
}

TEST_CASE("without-replacement full draw is a permutation") {
  Rng rng(2);
  const ResamplePlan plan = draw_plan(5, 5, ResampleKind::WithoutReplacement, rng);
  std::uint32_t total = 0;
  for (std::uint32_t c : plan.counts) {
    CHECK(c == 1);
    total += c;
  }
  CHECK(total == 5);
}

TEST_CASE("without-replacement counts are 0/1 and sum to m") {
  Rng rng(4);
  const ResamplePlan plan = draw_plan(20, 8, ResampleKind::WithoutReplacement, rng);
  std::uint32_t total = 0;
  for (std::uint32_t c : plan.counts) {
    CHECK(c <= 1);
    total += c;
  }
  CHECK(total == 8);
}

TEST_CASE("multinomial count moments match theory") {
  const std::size_t n = 50, m = 25;
  const std::size_t draws = 20000;
  Rng rng(123);
  // Track count j = 0 and the (0, 1) covariance.
  double s0 = 0.0, ss0 = 0.0, s01 = 0.0, s1 = 0.0;
  for (std::size_t t = 0; t < draws; ++t) {
    const ResamplePlan plan = draw_plan(n, m, ResampleKind::WithReplacement, rng);
    const double c0 = plan.counts[0], c1 = plan.counts[1];
    s0 += c0;
    ss0 += c0 * c0;
    s1 += c1;
    s01 += c0 * c1;
  }
  const double dn = draws;
  const double mean0 = s0 / dn;
  const double var0 = ss0 / dn - mean0 * mean0;
  const double cov01 = s01 / dn - mean0 * (s1 / dn);

  const double mean_theory = static_cast<double>(m) / n;                 // 0.5
  const double var_theory = static_cast<double>(m) * (n - 1) / (n * n);  // 0.49
  const double cov_theory = -static_cast<double>(m) / (n * n);           // -0.01

  // 5 MC standard errors (approximating the count as Poisson-like for the
  // fourth moment).
  CHECK(std::abs(mean0 - mean_theory) < 5.0 * std::sqrt(var_theory / dn));
  CHECK(std::abs(var0 - var_theory) < 5.0 * 1.2 / std::sqrt(dn));
  CHECK(std::abs(cov01 - cov_theory) < 5.0 * 0.6 / std::sqrt(dn));
}

TEST_CASE("draw_fullrank_plan returns a full-rank resample") {
  const Dataset d = random_dataset(8, 30, 3);
  auto models = CandidateModelSet::nested_first_columns(3);
  models.validate(d);
  Rng rng(14);
  const ResamplePlan plan = draw_fullrank_plan(d, models, 15, ResampleKind::WithReplacement, rng);
  CHECK(plan.m == 15);

  // Oracle: rank of the expanded design via pivoted QR.
  Matrix xs(15, 3);
  for (std::size_t j = 0; j < 3; ++j)
    for (std::size_t i = 0; i < 15; ++i) xs(i, j) = d.x(plan.indices[i], j);
  const HouseholderQR qr(xs, true);
  CHECK(qr.rank() == 3);
}

TEST_CASE("draw_fullrank_plan exhausts retries when m is below k") {
  const Dataset d = random_dataset(9, 10, 2);
  auto models = CandidateModelSet::nested_first_columns(2);
  models.validate(d);
  Rng rng(15);
  CHECK_THROWS_AS(
      (void)draw_fullrank_plan(d, models, 1, ResampleKind::WithReplacement, rng, 20),
      Error);
}

TEST_CASE("permutation resample keeps the design full rank on the first try") {
  // Identity-block design: any permutation of its rows is full rank.
  Dataset d;
  d.x = Matrix(5, 2);
  for (std::size_t i = 0; i < 5; ++i) {
    d.x(i, 0) = 1.0;
    d.x(i, 1) = static_cast<double>(i);
  }
  d.y.assign(5, 1.0);
  auto models = CandidateModelSet::nested_first_columns(2);
  models.validate(d);
  Rng rng(16);
  const ResamplePlan plan =
      draw_fullrank_plan(d, models, 5, ResampleKind::WithoutReplacement, rng, 1);
  CHECK(plan.m == 5);
}

TEST_CASE("identity plan reproduces the in-sample fit exactly") {
  const Dataset d = random_dataset(21, 12, 3);
  std::vector<std::size_t> model = {0, 1, 2};

  ResamplePlan plan;
  plan.kind = ResampleKind::WithoutReplacement;
  plan.m = 12;
  plan.counts.assign(12, 1);
  plan.indices.resize(12);
  for (std::uint32_t i = 0; i < 12; ++i) plan.indices[i] = i;

  const Vector theta_star = resampled_fit(d, model, plan);
  const HouseholderQR qr(d.x, true);
  const Vector theta_hat = qr.solve(d.y);
  for (std::size_t j = 0; j < 3; ++j) CHECK(theta_star[j] == doctest::Approx(theta_hat[j]));
}

TEST_CASE("index expansion equals count-weighted least squares") {
  const Dataset d = random_dataset(22, 10, 3);
  std::vector<std::size_t> model = {0, 1, 2};

  // pi = (2,0,2,0,...): rows 0,0,2,2,4,4,... up to m = 10.
  ResamplePlan plan;
  plan.kind = ResampleKind::WithReplacement;
  plan.m = 10;
  plan.counts.assign(10, 0);
  plan.indices.clear();
  for (std::uint32_t i = 0; i < 10; i += 2) {
    plan.indices.push_back(i);
    plan.indices.push_back(i);
    plan.counts[i] = 2;
  }
  const Vector theta_star = resampled_fit(d, model, plan);

  // Weighted normal equations oracle: sum_i pi_i x_i x_i' theta = sum_i pi_i x_i y_i.
  Matrix wxx(3, 3);
  Vector wxy(3, 0.0);
  for (std::size_t i = 0; i < 10; ++i) {
    const double w = plan.counts[i];
    if (w == 0.0) continue;
    for (std::size_t a = 0; a < 3; ++a) {
      wxy[a] += w * d.x(i, a) * d.y[i];
      for (std::size_t b = 0; b < 3; ++b) wxx(a, b) += w * d.x(i, a) * d.x(i, b);
    }
  }
  Matrix lower;
  REQUIRE(cholesky(wxx, lower));
  const Vector theta_w = cholesky_solve(lower, wxy);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(theta_star[j] == doctest::Approx(theta_w[j]).epsilon(1e-10));
}

TEST_CASE("saturated model interpolates the resampled responses") {
  Dataset d;
  d.x = Matrix::identity(4);
  d.y = {1.0, -2.0, 3.0, 0.5};
  std::vector<std::size_t> model = {0, 1, 2, 3};

  ResamplePlan plan;
  plan.kind = ResampleKind::WithReplacement;
  plan.m = 8;
  plan.counts.assign(4, 2);
  plan.indices = {0, 0, 1, 1, 2, 2, 3, 3};
  const Vector theta = resampled_fit(d, model, plan);
  for (std::size_t j = 0; j < 4; ++j) CHECK(theta[j] == doctest::Approx(d.y[j]));
}

TEST_CASE("plans replay identically for identical stream paths") {
  const SeedSpec seeds{777};
  Rng s1 = seeds.stream({5});
  Rng s2 = seeds.stream({5});
  const ResamplePlan p1 = draw_plan(40, 20, ResampleKind::WithReplacement, s1);
  const ResamplePlan p2 = draw_plan(40, 20, ResampleKind::WithReplacement, s2);
  CHECK(p1.indices == p2.indices);
  CHECK(p1.counts == p2.counts);
}
