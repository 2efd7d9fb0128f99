#include <doctest.h>

#include <cmath>

#include "mabt/regression.hpp"
#include "mabt/rng.hpp"

using namespace mabt;

namespace {

Dataset hansen_like(std::uint64_t seed, std::size_t n, std::size_t p) {
  Rng rng(seed);
  Dataset d;
  d.x = Matrix(n, p);
  for (std::size_t i = 0; i < n; ++i) d.x(i, 0) = 1.0;
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) d.x(i, j) = rng.next_normal();
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    d.y[i] = 1.0 + 0.7 * d.x(i, 1) + 0.3 * (p > 2 ? d.x(i, 2) : 0.0) + rng.next_normal();
  return d;
}

}  // namespace

TEST_CASE("intercept-only fit is the sample mean") {
  Dataset d;
  d.x = Matrix(2, 1, 1.0);
  d.y = {2.0, 4.0};
  const std::vector<std::size_t> model = {0};
  const ModelFit fit = fit_ols(d, model);
  CHECK(fit.theta_hat[0] == doctest::Approx(3.0));
  CHECK(fit.resid[0] == doctest::Approx(-1.0));
  CHECK(fit.resid[1] == doctest::Approx(1.0));
  CHECK(fit.hat_diag[0] == doctest::Approx(0.5));
  CHECK(fit.hat_diag[1] == doctest::Approx(0.5));
}

TEST_CASE("saturated fit interpolates") {
  Dataset d;
  d.x = Matrix::identity(2);
  d.y = {-1.5, 2.5};
  const std::vector<std::size_t> model = {0, 1};
  const ModelFit fit = fit_ols(d, model);
  CHECK(fit.theta_hat[0] == doctest::Approx(-1.5));
  CHECK(fit.theta_hat[1] == doctest::Approx(2.5));
  CHECK(fit.rss == doctest::Approx(0.0));
  CHECK(fit.hat_diag[0] == doctest::Approx(1.0));
  CHECK(fit.hat_diag[1] == doctest::Approx(1.0));
}

TEST_CASE("coefficients satisfy the normal equations against a direct solve") {
  const Dataset d = hansen_like(31, 12, 3);
  const std::vector<std::size_t> model = {0, 1, 2};
  const ModelFit fit = fit_ols(d, model);

  const Matrix xtx = gram(d.x);
  const Vector xty = tmatvec(d.x, d.y);
  Matrix lower;
  REQUIRE(cholesky(xtx, lower));
  const Vector oracle = cholesky_solve(lower, xty);
  for (std::size_t j = 0; j < 3; ++j)
    CHECK(fit.theta_hat[j] == doctest::Approx(oracle[j]).epsilon(1e-10));
}

TEST_CASE("hat diagonal sums to k and the projector is idempotent") {
  const Dataset d = hansen_like(32, 30, 4);
  const std::vector<std::size_t> model = {0, 1, 2, 3};
  const ModelFit fit = fit_ols(d, model);

  double trace = 0.0;
  for (double h : fit.hat_diag) {
    trace += h;
    CHECK(h >= -1e-12);
    CHECK(h <= 1.0 + 1e-12);
  }
  CHECK(trace == doctest::Approx(4.0).epsilon(1e-8));

  // Explicit projector H = X (X'X)^{-1} X' on this small n.
  const Matrix xtx = gram(d.x);
  Matrix lower;
  REQUIRE(cholesky(xtx, lower));
  const Matrix inv = cholesky_inverse(lower);
  Matrix h(30, 30);
  for (std::size_t i = 0; i < 30; ++i)
    for (std::size_t j = 0; j < 30; ++j) {
      double v = 0.0;
      for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b) v += d.x(i, a) * inv(a, b) * d.x(j, b);
      h(i, j) = v;
    }
  for (std::size_t i = 0; i < 30; ++i)
    CHECK(h(i, i) == doctest::Approx(fit.hat_diag[i]).epsilon(1e-8));
  // H^2 = H on a few sampled entries.
  for (std::size_t i = 0; i < 30; i += 7)
    for (std::size_t j = 0; j < 30; j += 5) {
      double hij = 0.0;
      for (std::size_t l = 0; l < 30; ++l) hij += h(i, l) * h(l, j);
      CHECK(hij == doctest::Approx(h(i, j)).epsilon(1e-8));
    }
}

TEST_CASE("fit_all: single model bundle uses that model's variance") {
  const Dataset d = hansen_like(33, 15, 2);
  CandidateModelSet models;
  models.models = {{0, 1}};
  models.validate(d);
  const FitBundle bundle = fit_all(d, models);
  REQUIRE(bundle.fits.size() == 1);
  CHECK(bundle.sigma2_full == doctest::Approx(bundle.fits[0].rss / (15.0 - 2.0)));
}

TEST_CASE("fit_all flags the collinear candidate by index") {
  Dataset d = hansen_like(34, 10, 3);
  for (std::size_t i = 0; i < 10; ++i) d.x(i, 2) = d.x(i, 1);
  CandidateModelSet models;
  models.nested = true;
  models.models = {{0, 1}, {0, 1, 2}};
  models.validate(d);
  try {
    (void)fit_all(d, models);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.code() == errc::rank_deficient);
    CHECK(std::string(e.what()).find("model 2") != std::string::npos);
  }
}

TEST_CASE("fit_all residual matrix equals per-model fit_ols output exactly") {
  const Dataset d = hansen_like(35, 50, 12);
  auto models = CandidateModelSet::nested_first_columns(11);
  models.validate(d);
  const FitBundle bundle = fit_all(d, models);
  for (std::size_t q = 0; q < models.count(); ++q) {
    const ModelFit solo = fit_ols(d, models.models[q]);
    auto col = bundle.residual_matrix.col(q);
    for (std::size_t i = 0; i < d.n(); ++i) {
      CHECK(col[i] == solo.resid[i]);  // bitwise: same code path
      CHECK(col[i] == bundle.fits[q].resid[i]);
    }
  }
}

TEST_CASE("nested bundles have monotone rss") {
  const Dataset d = hansen_like(36, 40, 8);
  auto models = CandidateModelSet::nested_first_columns(8);
  models.validate(d);
  const FitBundle bundle = fit_all(d, models);
  for (std::size_t q = 1; q < bundle.fits.size(); ++q)
    CHECK(bundle.fits[q].rss <= bundle.fits[q - 1].rss + 1e-9);
}

TEST_CASE("averaged fitted values are affine in the weights") {
  const Dataset d = hansen_like(37, 25, 5);
  auto models = CandidateModelSet::nested_first_columns(4);
  models.validate(d);
  const FitBundle bundle = fit_all(d, models);

  const Vector w = {0.1, 0.2, 0.3, 0.4};
  Vector mu_mix(d.n(), 0.0);
  for (std::size_t q = 0; q < 4; ++q)
    for (std::size_t i = 0; i < d.n(); ++i) mu_mix[i] += w[q] * bundle.fits[q].mu_hat[i];

  // Same combination through padded coefficients.
  Vector beta(d.p(), 0.0);
  for (std::size_t q = 0; q < 4; ++q) {
    const Vector padded = pad_coefficients(bundle.fits[q].theta_hat, models.models[q], d.p());
    for (std::size_t c = 0; c < d.p(); ++c) beta[c] += w[q] * padded[c];
  }
  const Vector mu_from_beta = matvec(d.x, beta);
  for (std::size_t i = 0; i < d.n(); ++i)
    CHECK(mu_mix[i] == doctest::Approx(mu_from_beta[i]).epsilon(1e-12));
}

TEST_CASE("mallows_cp formula") {
  ModelFit fit;
  fit.k = 2;
  fit.rss = 0.0;
  CHECK(mallows_cp(fit, 1.0, 10) == doctest::Approx(0.4));

  ModelFit f1, f2;
  f1.k = 3;
  f2.k = 4;
  f1.rss = f2.rss = 5.0;
  const double gap = mallows_cp(f2, 2.0, 20) - mallows_cp(f1, 2.0, 20);
  CHECK(gap == doctest::Approx(2.0 * 2.0 / 20.0));

  Rng rng(38);
  ModelFit f3;
  f3.k = 5;
  f3.rss = 12.345;
  const double sigma2 = 1.7;
  const std::size_t n = 20;
  CHECK(mallows_cp(f3, sigma2, n) ==
        doctest::Approx((f3.rss + 2.0 * sigma2 * 5.0) / 20.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)mallows_cp(f3, 0.0, n), Error);
}

TEST_CASE("information criteria match the profile formulas") {
  ModelFit fit;
  fit.k = 2;
  fit.rss = 100.0;  // rss/n = 1 at n = 100
  CHECK(info_criterion(fit, 100, ICKind::AIC) == doctest::Approx(4.0));
  CHECK(info_criterion(fit, 100, ICKind::BIC) == doctest::Approx(2.0 * std::log(100.0)));

  // Equal rss, k differing by one: AIC gap 2, BIC gap log n.
  ModelFit f1, f2;
  f1.k = 3;
  f2.k = 4;
  f1.rss = f2.rss = 7.5;
  for (std::size_t n : {7u, 100u}) {
    CHECK(info_criterion(f2, n, ICKind::AIC) - info_criterion(f1, n, ICKind::AIC) ==
          doctest::Approx(2.0));
    CHECK(info_criterion(f2, n, ICKind::BIC) - info_criterion(f1, n, ICKind::BIC) ==
          doctest::Approx(std::log(static_cast<double>(n))));
  }

  ModelFit degenerate;
  degenerate.k = 1;
  degenerate.rss = 0.0;
  CHECK(std::isinf(info_criterion(degenerate, 10, ICKind::AIC)));
  CHECK(info_criterion(degenerate, 10, ICKind::AIC) < 0.0);

  Rng rng(39);
  ModelFit f3;
  f3.k = 4;
  f3.rss = 3.21;
  const std::size_t n = 50;
  CHECK(info_criterion(f3, n, ICKind::AIC) ==
        doctest::Approx(50.0 * std::log(3.21 / 50.0) + 8.0).epsilon(1e-14));
  CHECK(info_criterion(f3, n, ICKind::BIC) ==
        doctest::Approx(50.0 * std::log(3.21 / 50.0) + 4.0 * std::log(50.0)).epsilon(1e-14));
}

TEST_CASE("candidate set validation rules") {
  const Dataset d = hansen_like(40, 10, 4);
  CandidateModelSet empty;
  CHECK_THROWS_AS(empty.validate(const_cast<Dataset&>(d)), Error);

  CandidateModelSet venn;
  venn.nested = true;
  venn.models = {{0, 1}, {0, 2}};
  CHECK_THROWS_AS(venn.validate(const_cast<Dataset&>(d)), Error);

  // Nested subsets given out of prefix order are canonicalized.
  CandidateModelSet subset;
  subset.nested = true;
  subset.models = {{1, 0}, {2, 0, 1}};
  subset.validate(const_cast<Dataset&>(d));
  CHECK(subset.models[0] == std::vector<std::size_t>{1, 0});
  CHECK(subset.models[1] == std::vector<std::size_t>{1, 0, 2});

  CandidateModelSet too_big;
  too_big.models = {{0, 1, 2, 3}};
  Dataset tiny = d;
  tiny.y.resize(4);
  tiny.x = Matrix(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) tiny.x(i, j) = d.x(i, j);
  CHECK_THROWS_AS(too_big.validate(tiny), Error);  // k > n - 1
}
