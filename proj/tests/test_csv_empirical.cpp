#include <doctest.h>

#include <cmath>

#include "mabt/empirical.hpp"
#include "mabt/kernels.hpp"

using namespace mabt;

namespace {

Dataset synthetic(std::uint64_t seed, std::size_t n, std::size_t p, double noise = 0.5) {
  Rng rng(seed);
  Dataset d;
  d.x = Matrix(n, p);
  d.column_names.resize(p);
  d.column_names[0] = "(intercept)";
  for (std::size_t i = 0; i < n; ++i) d.x(i, 0) = 1.0;
  for (std::size_t j = 1; j < p; ++j) {
    d.column_names[j] = "x" + std::to_string(j);
    for (std::size_t i = 0; i < n; ++i) d.x(i, j) = rng.next_normal();
  }
  d.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    d.y[i] = 2.0 + 1.0 * d.x(i, 1) + (p > 2 ? 0.5 * d.x(i, 2) : 0.0) + noise * rng.next_normal();
  }
  return d;
}

}  // namespace

TEST_CASE("csv parsing basics") {
  const Dataset d = load_csv_text("y,a\n1.5,2\n-0.5,3\n", "y");
  CHECK(d.n() == 2);
  CHECK(d.p() == 2);  // intercept + a (the response slot is replaced)
  CHECK(d.column_names[0] == "(intercept)");
  CHECK(d.column_names[1] == "a");
  CHECK(d.y[0] == doctest::Approx(1.5));
  CHECK(d.x(1, 1) == doctest::Approx(3.0));
}

TEST_CASE("csv column accounting") {
  const Dataset d = load_csv_text("y,a,b\n1,2,3\n4,5,6\n", "y");
  CHECK(d.n() == 2);
  CHECK(d.p() == 3);  // intercept, a, b
  CHECK(d.x(0, 0) == 1.0);
  CHECK(d.x(0, 1) == doctest::Approx(2.0));
  CHECK(d.x(1, 2) == doctest::Approx(6.0));
}

TEST_CASE("csv errors carry position information") {
  CHECK_THROWS_AS((void)load_csv_text("y,a\n1,2\n", "missing"), Error);
  try {
    (void)load_csv_text("y,a\n1,oops\n", "y");
    FAIL("expected NonNumeric");
  } catch (const Error& e) {
    CHECK(e.code() == errc::non_numeric);
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  try {
    (void)load_csv_text("y,a\n1\n", "y");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == errc::parse_error);
  }
  CHECK_THROWS_AS((void)load_csv_text("", "y"), Error);
  CHECK_THROWS_AS((void)load_csv_text("y,a\n", "y"), Error);
}

TEST_CASE("binary 0/1 columns pass through the numeric parser") {
  const Dataset d = load_csv_text("y,flag\n1.0,0\n2.0,1\n3.0,0\n", "y");
  CHECK(d.x(0, 1) == 0.0);
  CHECK(d.x(1, 1) == 1.0);
}

TEST_CASE("standardization: moments, idempotence, and the two-point column") {
  const Dataset d = synthetic(60, 50, 4);
  const Standardized std1 = standardize(d);

  for (std::size_t j = 1; j < d.p(); ++j) {
    double mean = 0.0, sd = 0.0;
    for (std::size_t i = 0; i < d.n(); ++i) mean += std1.data.x(i, j);
    mean /= static_cast<double>(d.n());
    for (std::size_t i = 0; i < d.n(); ++i)
      sd += (std1.data.x(i, j) - mean) * (std1.data.x(i, j) - mean);
    sd = std::sqrt(sd / static_cast<double>(d.n() - 1));
    CHECK(std::abs(mean) < 1e-12);
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Intercept untouched.
  for (std::size_t i = 0; i < d.n(); ++i) CHECK(std1.data.x(i, 0) == 1.0);

  // Idempotent within tolerance.
  const Standardized std2 = standardize(std1.data);
  for (std::size_t j = 0; j < d.p(); ++j)
    for (std::size_t i = 0; i < d.n(); ++i)
      CHECK(std2.data.x(i, j) == doctest::Approx(std1.data.x(i, j)).epsilon(1e-12));

  // Two-point column (0, 2) maps to (-1/sqrt2, 1/sqrt2) x sqrt2 = +-0.7071.
  Dataset two;
  two.x = Matrix(2, 2);
  two.x(0, 0) = two.x(1, 0) = 1.0;
  two.x(0, 1) = 0.0;
  two.x(1, 1) = 2.0;
  two.y = {1.0, 3.0};
  const Standardized stwo = standardize(two);
  CHECK(stwo.data.x(0, 1) == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(stwo.data.x(1, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));

  Dataset flat = two;
  flat.x(0, 1) = flat.x(1, 1) = 5.0;
  CHECK_THROWS_AS((void)standardize(flat), Error);
}

TEST_CASE("cp ordering: single regressor, orthogonal correlations, duplicates") {
  // One regressor: trivially first.
  const Dataset single = synthetic(61, 30, 2);
  CHECK(order_variables_cp(single) == std::vector<std::size_t>{1});

  // Orthogonal design: order follows |correlation| with y.
  Dataset ortho;
  const std::size_t n = 32;
  ortho.x = Matrix(n, 4);
  for (std::size_t i = 0; i < n; ++i) {
    ortho.x(i, 0) = 1.0;
    ortho.x(i, 1) = (i % 2 == 0) ? 1.0 : -1.0;
    ortho.x(i, 2) = (i % 4 < 2) ? 1.0 : -1.0;
    ortho.x(i, 3) = (i % 8 < 4) ? 1.0 : -1.0;
  }
  ortho.y.resize(n);
  Rng rng(62);
  for (std::size_t i = 0; i < n; ++i)
    ortho.y[i] = 0.2 * ortho.x(i, 1) + 0.9 * ortho.x(i, 2) + 0.5 * ortho.x(i, 3) +
                 0.05 * rng.next_normal();
  const auto order = order_variables_cp(ortho);
  CHECK(order == std::vector<std::size_t>{2, 3, 1});

  // A duplicated column is picked last.
  Dataset dup = synthetic(63, 25, 3);
  Dataset with_dup;
  with_dup.x = Matrix(25, 4);
  with_dup.y = dup.y;
  for (std::size_t i = 0; i < 25; ++i) {
    with_dup.x(i, 0) = dup.x(i, 0);
    with_dup.x(i, 1) = dup.x(i, 1);
    with_dup.x(i, 2) = dup.x(i, 2);
    with_dup.x(i, 3) = dup.x(i, 1);  // duplicate of column 1
  }
  const auto order_dup = order_variables_cp(with_dup);
  CHECK(order_dup.back() == 3);
}

TEST_CASE("evaluate_splits: perfect linear data has near-zero MSPE") {
  Dataset d = synthetic(64, 30, 3, 0.0);  // no noise
  PredictionConfig config;
  config.train_n = 20;
  config.splits = 3;
  config.b_reps = 20;
  config.methods = {Method::Mma, Method::Btma};
  const PredictionReport report = evaluate_splits(d, config, SeedSpec{3});
  for (const PredictionRow& row : report.rows) {
    CHECK(row.failures == 0);
    CHECK(row.mspe_mean < 1e-12);
  }
}

TEST_CASE("evaluate_splits: one split reduces to a single MSPE with zero variance") {
  const Dataset d = synthetic(65, 30, 4);
  PredictionConfig config;
  config.train_n = 22;
  config.splits = 1;
  config.b_reps = 25;
  config.methods = {Method::Saic};
  const PredictionReport report = evaluate_splits(d, config, SeedSpec{11});
  REQUIRE(report.rows.size() == 1);
  CHECK(report.rows[0].mspe_variance == 0.0);
  CHECK(report.rows[0].mspe_mean > 0.0);
}

TEST_CASE("training-only standardization differs from a leaky pipeline") {
  const Dataset d = synthetic(66, 40, 3, 1.0);
  const std::size_t train_n = 28;

  // Correct pipeline: transform from the training rows only.
  std::vector<std::size_t> train_rows, test_rows;
  for (std::size_t i = 0; i < d.n(); ++i)
    (i < train_n ? train_rows : test_rows).push_back(i);

  auto take = [&](const std::vector<std::size_t>& rows) {
    Dataset out;
    out.column_names = d.column_names;
    out.y.resize(rows.size());
    out.x = Matrix(rows.size(), d.p());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out.y[i] = d.y[rows[i]];
      for (std::size_t j = 0; j < d.p(); ++j) out.x(i, j) = d.x(rows[i], j);
    }
    return out;
  };
  const Dataset train = take(train_rows), test = take(test_rows);

  const Standardized honest = standardize(train);
  const Dataset test_honest = honest.transform.apply(test);

  // Leaky pipeline: statistics from the full dataset.
  const Standardized leaky_full = standardize(d);
  const Dataset test_leaky = leaky_full.transform.apply(test);
  const Dataset train_leaky = leaky_full.transform.apply(train);

  auto mspe_of = [&](const Dataset& tr, const Dataset& te) {
    auto models = CandidateModelSet::nested_first_columns(3);
    models.validate(tr);
    const FitBundle bundle = fit_all(tr, models);
    const MethodWeights w = smoothed_ic_weights(bundle, tr.n(), ICKind::AIC);
    const Vector beta = combine_coefficients(bundle, models, w.weights, tr.p());
    const Vector pred = matvec(te.x, beta);
    return kern::sq_diff_sum(te.y, pred) / static_cast<double>(te.n());
  };
  const double honest_mspe = mspe_of(honest.data, test_honest);
  const double leaky_mspe = mspe_of(train_leaky, test_leaky);
  CHECK(honest_mspe != doctest::Approx(leaky_mspe).epsilon(1e-12));
}

TEST_CASE("subsampling size arithmetic from the empirical protocol") {
  CHECK(static_cast<std::size_t>(std::floor(0.632 * 47.0)) == 29);
  CHECK(static_cast<std::size_t>(std::floor(0.632 * 42.0)) == 26);
}
