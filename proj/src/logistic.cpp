#include <algorithm>
#include <cmath>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/linalg.hpp"

namespace hte {

namespace {

double penalized_loglik(const Matrix& X, const std::vector<double>& y,
                        const std::vector<double>& w, const std::vector<double>& beta,
                        double ridge_eps) {
  double ll = 0.0;
  for (std::size_t i = 0; i < X.rows(); ++i) {
    double eta = beta[0];
    const auto row = X.row(i);
    for (std::size_t j = 0; j < X.cols(); ++j) eta += beta[j + 1] * row[j];
    const double p = clip_probability(expit(eta));
    ll += w[i] * (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
  }
  for (std::size_t j = 1; j < beta.size(); ++j) ll -= 0.5 * ridge_eps * beta[j] * beta[j];
  return ll;
}

LogisticModel irls(const Matrix& X, const std::vector<double>& y,
                   const std::vector<double>& weights, double ridge_eps) {
  const std::size_t n = X.rows();
  const std::size_t p = X.cols() + 1;  // intercept first

  LogisticModel model;
  model.coefficients.assign(p, 0.0);

  std::vector<double> eta(n, 0.0), prob(n), score(p), info(p * p), step(p);
  constexpr int kMaxIterations = 100;
  constexpr double kScoreTol = 1e-8;

  for (int iter = 1; iter <= kMaxIterations; ++iter) {
    model.iterations = iter;

    for (std::size_t i = 0; i < n; ++i) {
      double v = model.coefficients[0];
      const auto row = X.row(i);
      for (std::size_t j = 0; j < X.cols(); ++j) v += model.coefficients[j + 1] * row[j];
      if (!std::isfinite(v)) raise(ErrorCode::NonFinite, "linear predictor overflow");
      eta[i] = v;
      prob[i] = expit(v);
    }

    std::fill(score.begin(), score.end(), 0.0);
    std::fill(info.begin(), info.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double resid = weights[i] * (y[i] - prob[i]);
      const double wi = std::max(weights[i] * prob[i] * (1.0 - prob[i]), 1e-12);
      const auto row = X.row(i);
      score[0] += resid;
      info[0] += wi;
      for (std::size_t j = 0; j < X.cols(); ++j) {
        score[j + 1] += resid * row[j];
        info[j + 1] += wi * row[j];
        info[(j + 1) * p] += wi * row[j];
        for (std::size_t k = 0; k <= j; ++k) {
          info[(j + 1) * p + (k + 1)] += wi * row[j] * row[k];
        }
      }
    }
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = j + 1; k < p; ++k) info[j * p + k] = info[k * p + j];
    }
    for (std::size_t j = 1; j < p; ++j) {
      score[j] -= ridge_eps * model.coefficients[j];
      info[j * p + j] += ridge_eps;
    }

    double max_score = 0.0;
    for (double s : score) max_score = std::max(max_score, std::abs(s));
    if (max_score < kScoreTol) {
      model.converged = true;
      return model;
    }

    if (!cholesky_solve(info, p, score, step)) {
      raise(ErrorCode::SingularDesign, "IRLS normal equations not solvable");
    }

    // Step-halve when the penalized log-likelihood would decrease.
    const double before = penalized_loglik(X, y, weights, model.coefficients, ridge_eps);
    double scale = 1.0;
    std::vector<double> candidate(p);
    for (int halving = 0; halving < 30; ++halving) {
      for (std::size_t j = 0; j < p; ++j) candidate[j] = model.coefficients[j] + scale * step[j];
      const double after = penalized_loglik(X, y, weights, candidate, ridge_eps);
      if (std::isfinite(after) && after >= before - 1e-12) break;
      scale *= 0.5;
    }
    for (std::size_t j = 0; j < p; ++j) model.coefficients[j] += scale * step[j];
    for (double c : model.coefficients) {
      if (!std::isfinite(c)) raise(ErrorCode::NonFinite, "coefficient overflow");
    }
  }
  return model;  // iteration cap hit; converged stays false
}

}  // namespace

LogisticModel fit_logistic_weighted(const Matrix& X, const std::vector<double>& y,
                                    const std::vector<double>& weights, double ridge_eps) {
  if (y.size() != X.rows() || weights.size() != X.rows()) {
    raise(ErrorCode::LengthMismatch, "target/weights length != rows");
  }
  try {
    return irls(X, y, weights, ridge_eps);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::SingularDesign || ridge_eps >= 1e-4) throw;
    // Quasi-separation is common in one-hot trial designs; retry stiffer.
    return irls(X, y, weights, 1e-4);
  }
}

LogisticModel fit_logistic(const Matrix& X, const std::vector<int>& y, double ridge_eps) {
  std::vector<double> target(y.begin(), y.end());
  std::vector<double> weights(y.size(), 1.0);
  return fit_logistic_weighted(X, target, weights, ridge_eps);
}

std::vector<double> logistic_information(const LogisticModel& model, const Matrix& X,
                                         double ridge_eps) {
  const std::size_t p = X.cols() + 1;
  std::vector<double> info(p * p, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    const double prob = model.predict_proba(row);
    const double wi = std::max(prob * (1.0 - prob), 1e-12);
    info[0] += wi;
    for (std::size_t j = 0; j < X.cols(); ++j) {
      info[j + 1] += wi * row[j];
      info[(j + 1) * p] += wi * row[j];
      for (std::size_t k = 0; k <= j; ++k) info[(j + 1) * p + (k + 1)] += wi * row[j] * row[k];
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) info[j * p + k] = info[k * p + j];
  }
  for (std::size_t j = 1; j < p; ++j) info[j * p + j] += ridge_eps;
  return info;
}

LinearRegressionModel fit_linear_regression(const Matrix& X, const std::vector<double>& y,
                                            double ridge_eps) {
  if (y.size() != X.rows()) raise(ErrorCode::LengthMismatch, "target length != rows");
  const std::size_t p = X.cols() + 1;
  std::vector<double> xtx(p * p, 0.0), xty(p, 0.0);
  for (std::size_t i = 0; i < X.rows(); ++i) {
    const auto row = X.row(i);
    xty[0] += y[i];
    xtx[0] += 1.0;
    for (std::size_t j = 0; j < X.cols(); ++j) {
      xty[j + 1] += row[j] * y[i];
      xtx[j + 1] += row[j];
      xtx[(j + 1) * p] += row[j];
      for (std::size_t k = 0; k <= j; ++k) xtx[(j + 1) * p + (k + 1)] += row[j] * row[k];
    }
  }
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t k = j + 1; k < p; ++k) xtx[j * p + k] = xtx[k * p + j];
  }
  for (std::size_t j = 1; j < p; ++j) xtx[j * p + j] += ridge_eps;

  LinearRegressionModel model;
  if (!cholesky_solve(xtx, p, xty, model.coefficients)) {
    for (std::size_t j = 1; j < p; ++j) xtx[j * p + j] += 1e-4 - ridge_eps;
    if (!cholesky_solve(xtx, p, xty, model.coefficients)) {
      raise(ErrorCode::SingularDesign, "normal equations not solvable");
    }
  }
  return model;
}

}  // namespace hte
