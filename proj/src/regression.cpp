#include "mabt/regression.hpp"

#include <cmath>
#include <limits>

#include "mabt/kernels.hpp"

namespace mabt {

Matrix model_design(const Dataset& data, std::span<const std::size_t> model) {
  Matrix sub(data.n(), model.size());
  for (std::size_t j = 0; j < model.size(); ++j) {
    if (model[j] >= data.p()) fail(errc::dimension_mismatch, "model indexes column out of range");
    auto dst = sub.col(j);
    auto src = data.x.col(model[j]);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return sub;
}

Vector pad_coefficients(std::span<const double> theta, std::span<const std::size_t> model,
                        std::size_t p) {
  Vector out(p, 0.0);
  for (std::size_t j = 0; j < model.size(); ++j) out[model[j]] = theta[j];
  return out;
}

ModelFit fit_ols(const Dataset& data, std::span<const std::size_t> model) {
  if (model.empty()) fail(errc::invalid_size, "fit_ols: empty model");
  const Matrix xq = model_design(data, model);
  const HouseholderQR qr(xq, /*pivot=*/true);
  if (qr.rank() < model.size())
    fail(errc::rank_deficient, "fit_ols: design numerically rank deficient (rank " +
                                   std::to_string(qr.rank()) + " < k " +
                                   std::to_string(model.size()) + ")");

  ModelFit fit;
  fit.k = model.size();
  fit.theta_hat = qr.solve(data.y);
  fit.mu_hat = matvec(xq, fit.theta_hat);

  fit.resid.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) fit.resid[i] = data.y[i] - fit.mu_hat[i];
  fit.rss = kern::sumsq(fit.resid);

  const Matrix q_thin = qr.thin_q();
  fit.hat_diag.assign(data.n(), 0.0);
  for (std::size_t j = 0; j < fit.k; ++j) {
    auto col = q_thin.col(j);
    for (std::size_t i = 0; i < data.n(); ++i) fit.hat_diag[i] += col[i] * col[i];
  }
  return fit;
}

FitBundle fit_all(const Dataset& data, const CandidateModelSet& models) {
  FitBundle bundle;
  bundle.fits.reserve(models.count());
  for (std::size_t q = 0; q < models.count(); ++q) {
    try {
      bundle.fits.push_back(fit_ols(data, models.models[q]));
    } catch (const Error& e) {
      if (e.code() == errc::rank_deficient)
        fail(errc::rank_deficient, "fit_all: model " + std::to_string(q + 1) + ": " + e.what());
      throw;
    }
  }

  bundle.residual_matrix = Matrix(data.n(), models.count());
  for (std::size_t q = 0; q < models.count(); ++q) {
    auto dst = bundle.residual_matrix.col(q);
    std::copy(bundle.fits[q].resid.begin(), bundle.fits[q].resid.end(), dst.begin());
  }

  bundle.largest_index = models.largest_index();
  const ModelFit& largest = bundle.fits[bundle.largest_index];
  bundle.sigma2_full = data.n() > largest.k
                           ? largest.rss / static_cast<double>(data.n() - largest.k)
                           : std::numeric_limits<double>::quiet_NaN();
  return bundle;
}

double mallows_cp(const ModelFit& fit, double sigma2, std::size_t n) {
  if (!(sigma2 > 0.0)) fail(errc::invalid_size, "mallows_cp: sigma2 must be positive");
  const double dn = static_cast<double>(n);
  return fit.rss / dn + 2.0 * sigma2 * static_cast<double>(fit.k) / dn;
}

double info_criterion(const ModelFit& fit, std::size_t n, ICKind kind) {
  if (fit.rss <= 0.0) return -std::numeric_limits<double>::infinity();
  const double dn = static_cast<double>(n);
  const double dk = static_cast<double>(fit.k);
  const double penalty = kind == ICKind::AIC ? 2.0 * dk : dk * std::log(dn);
  return dn * std::log(fit.rss / dn) + penalty;
}

}  // namespace mabt
