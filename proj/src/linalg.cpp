#include "mabt/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mabt/kernels.hpp"

namespace mabt {

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

bool Matrix::all_finite() const { return mabt::all_finite({data_.data(), data_.size()}); }

Vector matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) fail(errc::dimension_mismatch, "matvec: size mismatch");
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) kern::axpy(x[j], a.col(j), y);
  return y;
}

Vector tmatvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) fail(errc::dimension_mismatch, "tmatvec: size mismatch");
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = kern::dot(a.col(j), x);
  return y;
}

Matrix gram(const Matrix& a) {
  const std::size_t k = a.cols();
  Matrix g(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    g(i, i) = kern::sumsq(a.col(i));
    for (std::size_t j = i + 1; j < k; ++j) {
      const double v = kern::dot(a.col(i), a.col(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

double quad_form(const Matrix& a, std::span<const double> b, std::span<const double> x) {
  const Vector ax = matvec(a, x);
  double v = kern::dot(ax, x);
  if (!b.empty()) v += kern::dot(b, x);
  return v;
}

// ------------------------------------------------------------------- QR ---

HouseholderQR::HouseholderQR(const Matrix& a, bool pivot)
    : n_(a.rows()), k_(a.cols()), pivoted_(pivot), qr_(a), tau_(a.cols(), 0.0),
      perm_(a.cols()) {
  if (n_ == 0 || k_ == 0) fail(errc::invalid_size, "qr: empty matrix");
  for (std::size_t j = 0; j < k_; ++j) perm_[j] = j;

  std::vector<double> colnorm2(k_);
  double max_norm = 0.0;
  for (std::size_t j = 0; j < k_; ++j) {
    colnorm2[j] = kern::sumsq(qr_.col(j));
    max_norm = std::max(max_norm, std::sqrt(colnorm2[j]));
  }
  tol_ = static_cast<double>(n_) * std::numeric_limits<double>::epsilon() * max_norm;

  std::vector<double> partial(k_, 0.0);
  const std::size_t steps = std::min(n_, k_);
  for (std::size_t j = 0; j < steps; ++j) {
    if (pivoted_) {
      // Trailing norms are recomputed each step; the matrices here are small
      // enough that exactness beats the classical downdate.
      for (std::size_t l = j; l < k_; ++l) partial[l] = kern::sumsq(qr_.col(l).subspan(j));
      std::size_t best = j;
      for (std::size_t l = j + 1; l < k_; ++l)
        if (partial[l] > partial[best]) best = l;
      if (best != j) {
        for (std::size_t i = 0; i < n_; ++i) std::swap(qr_(i, j), qr_(i, best));
        std::swap(perm_[j], perm_[best]);
      }
    }

    const std::size_t len = n_ - j;
    auto colj = qr_.col(j).subspan(j);
    const double norm = std::sqrt(kern::sumsq(colj));
    if (norm == 0.0) {
      tau_[j] = 0.0;
      continue;
    }
    const double alpha = colj[0] >= 0 ? -norm : norm;
    const double v0 = colj[0] - alpha;
    colj[0] = alpha;  // R diagonal
    // Reflector v = (1, col[1:]/v0); tau = -v0/alpha.
    for (std::size_t i = 1; i < len; ++i) colj[i] /= v0;
    tau_[j] = -v0 / alpha;

    for (std::size_t l = j + 1; l < k_; ++l) {
      auto coll = qr_.col(l).subspan(j);
      double w = coll[0];
      for (std::size_t i = 1; i < len; ++i) w += colj[i] * coll[i];
      w *= tau_[j];
      coll[0] -= w;
      for (std::size_t i = 1; i < len; ++i) coll[i] -= w * colj[i];
    }
  }

  rank_ = 0;
  for (std::size_t j = 0; j < steps; ++j) {
    if (std::abs(qr_(j, j)) > tol_)
      ++rank_;
    else
      break;
  }
}

void HouseholderQR::apply_qt(std::span<double> y) const {
  if (y.size() != n_) fail(errc::dimension_mismatch, "apply_qt: size mismatch");
  const std::size_t steps = std::min(n_, k_);
  for (std::size_t j = 0; j < steps; ++j) {
    if (tau_[j] == 0.0) continue;
    auto v = qr_.col(j).subspan(j);
    double w = y[j];
    for (std::size_t i = 1; i < v.size(); ++i) w += v[i] * y[j + i];
    w *= tau_[j];
    y[j] -= w;
    for (std::size_t i = 1; i < v.size(); ++i) y[j + i] -= w * v[i];
  }
}

Vector HouseholderQR::solve(std::span<const double> y) const {
  if (rank_ < k_) fail(errc::rank_deficient, "qr solve: rank deficient");
  Vector qty(y.begin(), y.end());
  apply_qt(qty);
  Vector beta(k_, 0.0);
  for (std::size_t jj = k_; jj-- > 0;) {
    double v = qty[jj];
    for (std::size_t l = jj + 1; l < k_; ++l) v -= qr_(jj, l) * beta[l];
    beta[jj] = v / qr_(jj, jj);
  }
  if (pivoted_) {
    Vector out(k_);
    for (std::size_t j = 0; j < k_; ++j) out[perm_[j]] = beta[j];
    return out;
  }
  return beta;
}

Vector HouseholderQR::solve_prefix(std::size_t j, std::span<const double> qty) const {
  if (pivoted_) fail(errc::invalid_size, "solve_prefix requires an unpivoted factorization");
  if (j > k_ || j > rank_) fail(errc::rank_deficient, "solve_prefix: block rank deficient");
  Vector beta(j, 0.0);
  for (std::size_t jj = j; jj-- > 0;) {
    double v = qty[jj];
    for (std::size_t l = jj + 1; l < j; ++l) v -= qr_(jj, l) * beta[l];
    beta[jj] = v / qr_(jj, jj);
  }
  return beta;
}

Matrix HouseholderQR::thin_q() const {
  const std::size_t q_cols = std::min(n_, k_);
  Matrix q(n_, q_cols);
  for (std::size_t c = 0; c < q_cols; ++c) {
    q(c, c) = 1.0;
    auto col = q.col(c);
    for (std::size_t j = std::min(c + 1, q_cols); j-- > 0;) {
      if (tau_[j] == 0.0) continue;
      auto v = qr_.col(j).subspan(j);
      double w = col[j];
      for (std::size_t i = 1; i < v.size(); ++i) w += v[i] * col[j + i];
      w *= tau_[j];
      col[j] -= w;
      for (std::size_t i = 1; i < v.size(); ++i) col[j + i] -= w * v[i];
    }
  }
  return q;
}

// ------------------------------------------------------------- Cholesky ---

bool cholesky(const Matrix& a, Matrix& lower) {
  const std::size_t n = a.rows();
  if (a.cols() != n) fail(errc::dimension_mismatch, "cholesky: not square");
  lower = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t l = 0; l < j; ++l) d -= lower(j, l) * lower(j, l);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a(i, j);
      for (std::size_t l = 0; l < j; ++l) v -= lower(i, l) * lower(j, l);
      lower(i, j) = v / ljj;
    }
  }
  return true;
}

Vector cholesky_solve(const Matrix& lower, std::span<const double> b) {
  const std::size_t n = lower.rows();
  Vector x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    double v = x[i];
    for (std::size_t l = 0; l < i; ++l) v -= lower(i, l) * x[l];
    x[i] = v / lower(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t l = ii + 1; l < n; ++l) v -= lower(l, ii) * x[l];
    x[ii] = v / lower(ii, ii);
  }
  return x;
}

Matrix cholesky_inverse(const Matrix& lower) {
  const std::size_t n = lower.rows();
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector x = cholesky_solve(lower, e);
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = x[i];
    e[j] = 0.0;
  }
  // Symmetrize against round-off.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = 0.5 * (inv(i, j) + inv(j, i));
      inv(i, j) = v;
      inv(j, i) = v;
    }
  return inv;
}

// ---------------------------------------------------------------- Jacobi ---

SymEigen sym_eigen(const Matrix& a) {
  const std::size_t n = a.rows();
  if (a.cols() != n) fail(errc::dimension_mismatch, "sym_eigen: not square");
  Matrix m = a;
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += m(i, j) * m(i, j);
    double diag = 0.0;
    for (std::size_t i = 0; i < n; ++i) diag += m(i, i) * m(i, i);
    if (off <= (diag + off) * 1e-30 + 1e-300) break;

    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = m(p, q);
        if (apq == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double mip = m(i, p), miq = m(i, q);
          m(i, p) = c * mip - s * miq;
          m(i, q) = s * mip + c * miq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double mpi = m(p, i), mqi = m(q, i);
          m(p, i) = c * mpi - s * mqi;
          m(q, i) = s * mpi + c * mqi;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return m(i, i) < m(j, j); });

  SymEigen out;
  out.values.resize(n);
  out.vectors = Matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    out.values[j] = m(order[j], order[j]);
    for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
  }
  return out;
}

// ------------------------------------------------------ normal quantile ---

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    if (p == 0.0) return -std::numeric_limits<double>::infinity();
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    fail(errc::invalid_size, "normal_quantile: p outside [0,1]");
  }
  // Wichura (1988), algorithm AS241, PPND16.
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

}  // namespace mabt
