#include "hte/linalg.hpp"

#include <cmath>

namespace hte {

namespace {

// In-place lower Cholesky factor; false if a pivot is not positive.
bool cholesky_factor(std::vector<double>& a, std::size_t p) {
  for (std::size_t j = 0; j < p; ++j) {
    double diag = a[j * p + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * p + k] * a[j * p + k];
    if (!(diag > 0.0) || !std::isfinite(diag)) return false;
    const double root = std::sqrt(diag);
    a[j * p + j] = root;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = a[i * p + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * p + k] * a[j * p + k];
      a[i * p + j] = v / root;
    }
  }
  return true;
}

void solve_with_factor(const std::vector<double>& l, std::size_t p,
                       const std::vector<double>& b, std::vector<double>& x) {
  x = b;
  for (std::size_t i = 0; i < p; ++i) {
    double v = x[i];
    for (std::size_t k = 0; k < i; ++k) v -= l[i * p + k] * x[k];
    x[i] = v / l[i * p + i];
  }
  for (std::size_t ii = p; ii-- > 0;) {
    double v = x[ii];
    for (std::size_t k = ii + 1; k < p; ++k) v -= l[k * p + ii] * x[k];
    x[ii] = v / l[ii * p + ii];
  }
}

}  // namespace

bool cholesky_solve(std::vector<double> a, std::size_t p, const std::vector<double>& b,
                    std::vector<double>& x) {
  if (!cholesky_factor(a, p)) return false;
  solve_with_factor(a, p, b, x);
  return true;
}

bool spd_inverse(std::vector<double> a, std::size_t p, std::vector<double>& inv) {
  if (!cholesky_factor(a, p)) return false;
  inv.assign(p * p, 0.0);
  std::vector<double> unit(p, 0.0), column;
  for (std::size_t j = 0; j < p; ++j) {
    unit.assign(p, 0.0);
    unit[j] = 1.0;
    solve_with_factor(a, p, unit, column);
    for (std::size_t i = 0; i < p; ++i) inv[i * p + j] = column[i];
  }
  return true;
}

}  // namespace hte
