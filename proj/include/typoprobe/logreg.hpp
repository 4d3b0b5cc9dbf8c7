#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "typoprobe/text.hpp"

namespace typoprobe {

struct LogregOptions {
  double C = 1e-3;
  double gradient_tolerance = 1e-6;
  std::size_t max_iterations = 1000;
};

struct Classifier {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // 0 marks a constant column
  Eigen::VectorXd weights;
  double bias = 0.0;
  std::size_t iterations = 0;
  double gradient_norm = 0.0;  // max-norm at the returned solution
  std::vector<double> objective_history;

  std::size_t parameter_count() const { return static_cast<std::size_t>(weights.size()) + 1; }

  Eigen::VectorXd standardize(const Eigen::VectorXd& x) const {
    Eigen::VectorXd z(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) z(k) = scale(k) > 0.0 ? (x(k) - mean(k)) / scale(k) : 0.0;
    return z;
  }

  double decision(const Eigen::VectorXd& x) const { return weights.dot(standardize(x)) + bias; }

  double probability(const Eigen::VectorXd& x) const { return 1.0 / (1.0 + std::exp(-decision(x))); }

  int predict(const Eigen::VectorXd& x) const { return probability(x) >= 0.5 ? 1 : 0; }
};

namespace detail {

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

// L2-regularized logistic regression on standardized columns with balanced
// class weights: minimizes 0.5*|w|^2 + C * sum_i c_i * logloss_i, bias
// unpenalized, by damped Newton steps.
inline Classifier fit_logreg(const Eigen::MatrixXd& X, const std::vector<int>& y, const LogregOptions& opts = {}) {
  const auto n = X.rows();
  const auto d = X.cols();
  if (static_cast<std::size_t>(n) != y.size()) throw Error("fit_logreg: row count does not match label count");
  if (n == 0) throw Error("fit_logreg: no training examples");
  if (!X.allFinite()) throw Error("fit_logreg: non-finite input");
  Eigen::Index n_pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw Error("fit_logreg: labels must be 0 or 1");
    n_pos += v;
  }
  if (n_pos == 0 || n_pos == n) throw Error("fit_logreg: training labels contain a single class");

  Classifier clf;
  clf.mean = X.colwise().mean().transpose();
  clf.scale.resize(d);
  Eigen::MatrixXd Z(n, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    const double var = (X.col(k).array() - clf.mean(k)).square().mean();
    const double sd = std::sqrt(var);
    const bool constant = sd <= 1e-10 * std::max(1.0, std::abs(clf.mean(k)));
    clf.scale(k) = constant ? 0.0 : sd;
    if (constant)
      Z.col(k).setZero();
    else
      Z.col(k) = (X.col(k).array() - clf.mean(k)) / sd;
  }

  Eigen::VectorXd c(n), t(n);
  const double w_pos = static_cast<double>(n) / (2.0 * static_cast<double>(n_pos));
  const double w_neg = static_cast<double>(n) / (2.0 * static_cast<double>(n - n_pos));
  for (Eigen::Index i = 0; i < n; ++i) {
    t(i) = y[static_cast<std::size_t>(i)];
    c(i) = opts.C * (y[static_cast<std::size_t>(i)] ? w_pos : w_neg);
  }

  Eigen::VectorXd w = Eigen::VectorXd::Zero(d);
  double b = 0.0;
  auto objective = [&](const Eigen::VectorXd& ww, double bb) {
    const Eigen::VectorXd z = Z * ww + Eigen::VectorXd::Constant(n, bb);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) loss += c(i) * (detail::softplus(z(i)) - t(i) * z(i));
    return 0.5 * ww.squaredNorm() + loss;
  };

  double f = objective(w, b);
  clf.objective_history.push_back(f);
  Eigen::VectorXd p(n), r(n), grad(d + 1);
  Eigen::MatrixXd H(d + 1, d + 1);
  std::size_t it = 0;
  for (;; ++it) {
    const Eigen::VectorXd z = Z * w + Eigen::VectorXd::Constant(n, b);
    for (Eigen::Index i = 0; i < n; ++i) p(i) = detail::sigmoid(z(i));
    r = c.cwiseProduct(p - t);
    grad.head(d) = w + Z.transpose() * r;
    grad(d) = r.sum();
    clf.gradient_norm = grad.cwiseAbs().maxCoeff();
    if (clf.gradient_norm <= opts.gradient_tolerance || it >= opts.max_iterations) break;

    const Eigen::VectorXd D = c.cwiseProduct(p.cwiseProduct(Eigen::VectorXd::Ones(n) - p));
    H.topLeftCorner(d, d).noalias() = Z.transpose() * D.asDiagonal() * Z;
    H.topLeftCorner(d, d).diagonal().array() += 1.0;
    H.topRightCorner(d, 1).noalias() = Z.transpose() * D;
    H.bottomLeftCorner(1, d) = H.topRightCorner(d, 1).transpose();
    H(d, d) = D.sum();
    const Eigen::VectorXd step = -H.ldlt().solve(grad);
    const double slope = grad.dot(step);

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      const Eigen::VectorXd w_new = w + alpha * step.head(d);
      const double b_new = b + alpha * step(d);
      const double f_new = objective(w_new, b_new);
      if (f_new <= f + 1e-4 * alpha * slope) {
        w = w_new;
        b = b_new;
        f = f_new;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    clf.objective_history.push_back(f);
  }
  clf.iterations = it;
  clf.weights = std::move(w);
  clf.bias = b;
  return clf;
}

}  // namespace typoprobe
