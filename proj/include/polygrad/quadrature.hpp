#pragma once

#include <Eigen/Dense>

namespace polygrad {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};

// n-point Gauss-Legendre rule on (-1,1) for the measure dy (total mass 2).
// Nodes are found by Newton iteration on the Legendre roots.
QuadratureRule gauss_legendre(int n);

// n-point Gauss-Jacobi rule for the weight (1-y)^a (1+y)^b on (-1,1),
// computed by Golub-Welsch.  Exact for polynomials of degree <= 2n-1.
QuadratureRule gauss_jacobi(int n, double a, double b);

}  // namespace polygrad
