#include "polygrad/quadrature.hpp"

#include <cmath>
#include <stdexcept>

#include "polygrad/basis.hpp"

namespace polygrad {

namespace {

// Legendre P_n and P_n' at y by the three-term recurrence.
void legendre_pair(int n, double y, double& p, double& dp) {
  double p0 = 1.0, p1 = y;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * y * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = pk;
  }
  p = p1;
  dp = n * (y * p1 - p0) / (y * y - 1.0);
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::domain_error("gauss_legendre: need n >= 1");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double pi = 3.14159265358979323846;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.weights[i] = w;
    rule.nodes[n - 1 - i] = x;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule gauss_jacobi(int n, double a, double b) {
  if (n < 1) throw std::domain_error("gauss_jacobi: need n >= 1");
  if (a <= -1.0 || b <= -1.0) throw std::domain_error("gauss_jacobi: parameters must exceed -1");

  // Symmetric tridiagonal Jacobi matrix of the orthonormal recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  const double apb = a + b;
  T(0, 0) = (b - a) / (apb + 2.0);
  for (int k = 1; k < n; ++k) {
    const double t = 2.0 * k + apb;
    T(k, k) = (b * b - a * a) / (t * (t + 2.0));
    double off2;
    if (k == 1) {
      off2 = 4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + apb) * (2.0 + apb) * (3.0 + apb));
    } else {
      off2 = 4.0 * k * (k + a) * (k + b) * (k + apb) / (t * t * (t + 1.0) * (t - 1.0));
    }
    const double off = std::sqrt(off2);
    T(k, k - 1) = off;
    T(k - 1, k) = off;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  if (es.info() != Eigen::Success) throw std::runtime_error("gauss_jacobi: eigensolver failed");

  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  const double mass = jacobi_weight_mass(a, b);
  for (int i = 0; i < n; ++i) {
    const double v0 = es.eigenvectors()(0, i);
    rule.weights[i] = mass * v0 * v0;
  }
  return rule;
}

}  // namespace polygrad
