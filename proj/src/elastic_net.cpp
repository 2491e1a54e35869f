#include <algorithm>
#include <cmath>
#include <numeric>

#include "hte/base_learners.hpp"
#include "hte/error.hpp"
#include "hte/rng.hpp"

namespace hte {

namespace {

struct Standardized {
  Matrix X;
  std::vector<double> means;
  std::vector<double> scales;
};

Standardized standardize(const Matrix& X) {
  const std::size_t n = X.rows(), p = X.cols();
  Standardized out;
  out.X = Matrix(n, p);
  out.means.assign(p, 0.0);
  out.scales.assign(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += X(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = X(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    if (var <= 0.0) {
      raise(ErrorCode::AllZeroVariance, "feature " + std::to_string(j) + " is constant");
    }
    const double scale = std::sqrt(var);
    out.means[j] = mean;
    out.scales[j] = scale;
    for (std::size_t i = 0; i < n; ++i) out.X(i, j) = (X(i, j) - mean) / scale;
  }
  return out;
}

// One elastic-net logistic fit at fixed lambda on standardized X, warm-started
// from beta/intercept. Outer IRLS quadratic approximation, inner coordinate
// descent with soft thresholding.
void coordinate_descent_fit(const Matrix& X, const std::vector<int>& y, double alpha,
                            double lambda, double& intercept, std::vector<double>& beta) {
  const std::size_t n = X.rows(), p = X.cols();
  const double inv_n = 1.0 / static_cast<double>(n);

  std::vector<double> eta(n), w(n), z(n);
  constexpr int kOuter = 50;
  constexpr int kInner = 200;
  constexpr double kTol = 1e-7;

  for (int outer = 0; outer < kOuter; ++outer) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = intercept;
      const auto row = X.row(i);
      for (std::size_t j = 0; j < p; ++j) v += beta[j] * row[j];
      eta[i] = v;
      const double prob = expit(v);
      const double wi = std::max(prob * (1.0 - prob), 1e-5);
      w[i] = wi;
      z[i] = v + (static_cast<double>(y[i]) - prob) / wi;
    }

    // residual r_i = z_i - eta_i maintained across coordinate updates
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = z[i] - eta[i];

    double outer_change = 0.0;
    for (int inner = 0; inner < kInner; ++inner) {
      double max_change = 0.0;

      double wsum = 0.0, wr = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        wsum += w[i];
        wr += w[i] * r[i];
      }
      const double new_intercept = intercept + wr / wsum;
      const double dint = new_intercept - intercept;
      if (dint != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= dint;
        intercept = new_intercept;
        max_change = std::max(max_change, std::abs(dint));
      }

      for (std::size_t j = 0; j < p; ++j) {
        double num = 0.0, denom = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double xij = X(i, j);
          num += w[i] * xij * (r[i] + xij * beta[j]);
          denom += w[i] * xij * xij;
        }
        num *= inv_n;
        denom *= inv_n;
        const double threshold = lambda * alpha;
        double updated = 0.0;
        if (num > threshold) {
          updated = (num - threshold) / (denom + lambda * (1.0 - alpha));
        } else if (num < -threshold) {
          updated = (num + threshold) / (denom + lambda * (1.0 - alpha));
        }
        const double delta = updated - beta[j];
        if (delta != 0.0) {
          for (std::size_t i = 0; i < n; ++i) r[i] -= delta * X(i, j);
          beta[j] = updated;
          max_change = std::max(max_change, std::abs(delta));
        }
      }
      outer_change = std::max(outer_change, max_change);
      if (max_change < kTol) break;
    }
    if (outer_change < kTol) break;
  }

  for (double b : beta) {
    if (!std::isfinite(b)) raise(ErrorCode::NonFinite, "elastic net diverged");
  }
}

double heldout_deviance(const Matrix& X, const std::vector<int>& y,
                        const std::vector<std::size_t>& rows, double intercept,
                        const std::vector<double>& beta) {
  double deviance = 0.0;
  for (std::size_t i : rows) {
    double eta = intercept;
    const auto row = X.row(i);
    for (std::size_t j = 0; j < X.cols(); ++j) eta += beta[j] * row[j];
    const double prob = clip_probability(expit(eta));
    deviance -= 2.0 * (y[i] * std::log(prob) + (1 - y[i]) * std::log(1.0 - prob));
  }
  return deviance / static_cast<double>(rows.size());
}

}  // namespace

double elastic_net_lambda_max(const Matrix& X, const std::vector<int>& y, double alpha) {
  const Standardized std_x = standardize(X);
  const std::size_t n = X.rows();
  double ybar = 0.0;
  for (int v : y) ybar += v;
  ybar /= static_cast<double>(n);
  double best = 0.0;
  for (std::size_t j = 0; j < X.cols(); ++j) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += std_x.X(i, j) * (static_cast<double>(y[i]) - ybar);
    best = std::max(best, std::abs(dot) / static_cast<double>(n));
  }
  return best / std::max(alpha, 1e-3);
}

ElasticNetLogisticModel fit_elastic_net_logistic(const Matrix& X, const std::vector<int>& y,
                                                 double alpha,
                                                 std::vector<double> lambda_grid,
                                                 int cv_folds, std::uint64_t seed) {
  if (cv_folds < 2) raise(ErrorCode::InvalidArgument, "cv_folds must be >= 2");
  if (!(alpha >= 0.0 && alpha <= 1.0)) raise(ErrorCode::InvalidArgument, "alpha outside [0,1]");
  if (y.size() != X.rows()) raise(ErrorCode::LengthMismatch, "target length != rows");

  const Standardized std_x = standardize(X);
  const std::size_t n = X.rows(), p = X.cols();

  if (lambda_grid.empty()) {
    const double lambda_max = elastic_net_lambda_max(X, y, alpha);
    constexpr int kGridSize = 50;
    constexpr double kDecades = 4.0;
    lambda_grid.reserve(kGridSize);
    for (int g = 0; g < kGridSize; ++g) {
      const double t = static_cast<double>(g) / (kGridSize - 1);
      lambda_grid.push_back(lambda_max * std::pow(10.0, -kDecades * t));
    }
  }
  // Largest first so warm starts move from sparse to dense.
  std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<>());

  std::vector<double> cv_deviance(lambda_grid.size(), 0.0);
  if (lambda_grid.size() > 1) {
    Rng rng(seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    std::vector<int> fold_of(n);
    for (std::size_t i = 0; i < n; ++i) fold_of[order[i]] = static_cast<int>(i % cv_folds);

    for (int fold = 0; fold < cv_folds; ++fold) {
      std::vector<std::size_t> train_rows, test_rows;
      for (std::size_t i = 0; i < n; ++i) {
        (fold_of[i] == fold ? test_rows : train_rows).push_back(i);
      }
      const Matrix x_train = std_x.X.select_rows(train_rows);
      const std::vector<int> y_train = select(y, train_rows);

      double intercept = 0.0;
      std::vector<double> beta(p, 0.0);
      for (std::size_t g = 0; g < lambda_grid.size(); ++g) {
        coordinate_descent_fit(x_train, y_train, alpha, lambda_grid[g], intercept, beta);
        cv_deviance[g] += heldout_deviance(std_x.X, y, test_rows, intercept, beta);
      }
    }
    for (double& d : cv_deviance) d /= cv_folds;
  }

  // Grid is sorted decreasing; first minimum = most-regularized tie winner.
  std::size_t best = 0;
  for (std::size_t g = 1; g < lambda_grid.size(); ++g) {
    if (cv_deviance[g] < cv_deviance[best]) best = g;
  }

  double intercept = 0.0;
  std::vector<double> beta(p, 0.0);
  for (std::size_t g = 0; g <= best; ++g) {
    coordinate_descent_fit(std_x.X, y, alpha, lambda_grid[g], intercept, beta);
  }

  ElasticNetLogisticModel model;
  model.alpha = alpha;
  model.lambda = lambda_grid[best];
  model.feature_means = std_x.means;
  model.feature_scales = std_x.scales;
  model.lambda_grid = lambda_grid;
  model.cv_deviance = cv_deviance;
  model.coefficients.assign(p + 1, 0.0);
  double adjust = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    model.coefficients[j + 1] = beta[j] / std_x.scales[j];
    adjust += beta[j] * std_x.means[j] / std_x.scales[j];
  }
  model.coefficients[0] = intercept - adjust;
  return model;
}

}  // namespace hte
