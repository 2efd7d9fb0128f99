#pragma once

#include "mabt/dataset.hpp"

namespace mabt {

// Per-model least squares artifacts. theta_hat follows the model's subset
// order; everything else is length n.
struct ModelFit {
  Vector theta_hat;
  Vector mu_hat;
  Vector resid;
  Vector hat_diag;
  std::size_t k = 0;
  double rss = 0.0;
};

struct FitBundle {
  std::vector<ModelFit> fits;
  Matrix residual_matrix;  // n x M, column q = fits[q].resid
  double sigma2_full = 0.0;  // from the largest model
  std::size_t largest_index = 0;
};

// Exact least squares via pivoted Householder QR; hat diagonals come from the
// thin orthogonal factor. Throws RankDeficient when the numerical rank of the
// selected columns is below k.
ModelFit fit_ols(const Dataset& data, std::span<const std::size_t> model);

// fit_ols for every candidate, plus the residual matrix and the full-model
// variance estimate rss_M / (n - k_M).
FitBundle fit_all(const Dataset& data, const CandidateModelSet& models);

// ||y - mu_q||^2 / n + (2 sigma2 / n) k_q
double mallows_cp(const ModelFit& fit, double sigma2, std::size_t n);

enum class ICKind { AIC, BIC };

// Gaussian profile form without additive constants: n log(rss/n) + penalty.
// A zero-rss fit is degenerate and reported as -infinity.
double info_criterion(const ModelFit& fit, std::size_t n, ICKind kind);

// Extract the submatrix of the model's columns.
Matrix model_design(const Dataset& data, std::span<const std::size_t> model);

// Coefficient vector padded to length p: entries placed at the model's
// column positions, zero elsewhere.
Vector pad_coefficients(std::span<const double> theta, std::span<const std::size_t> model,
                        std::size_t p);

}  // namespace mabt
