#pragma once

// Reference computations used as independent oracles by the test suites.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace typoprobe::testing {

// Cyclic Jacobi eigenvalue iteration for symmetric matrices.
inline std::vector<double> jacobi_eigenvalues(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev;
  for (std::size_t i = 0; i < n; ++i) ev.push_back(a[i][i]);
  return ev;
}

// Frobenius error of projecting `a` onto the span of the embedding columns.
inline double projection_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& emb) {
  Eigen::MatrixXd u = emb;
  for (Eigen::Index c = 0; c < u.cols(); ++c) u.col(c).normalize();
  return (a - u * u.transpose() * a).norm();
}

// Exact binomial(n, 0.5) central interval [lo, hi] with at most `tail` mass
// below lo and at most `tail` mass above hi.
inline std::pair<std::size_t, std::size_t> binomial_half_interval(std::size_t n, double tail) {
  std::vector<double> pmf(n + 1);
  for (std::size_t k = 0; k <= n; ++k)
    pmf[k] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) - n * std::log(2.0));
  std::size_t lo = 0;
  double below = 0.0;
  while (lo < n && below + pmf[lo] <= tail) below += pmf[lo++];
  std::size_t hi = n;
  double above = 0.0;
  while (hi > 0 && above + pmf[hi] <= tail) above += pmf[hi--];
  return {lo, hi};
}

}  // namespace typoprobe::testing
