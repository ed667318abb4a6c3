#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "polygrad/rng.hpp"

namespace polygrad {

enum class BasisKind { Jacobi, Fourier };

// One-dimensional orthonormal basis descriptor.  The Jacobi family covers
// Legendre (alpha = beta = 0) and Chebyshev (alpha = beta = -1/2); the
// Fourier basis exp(i pi n y) lives on the torus [-1,1).
struct BasisFamily {
  BasisKind kind = BasisKind::Jacobi;
  double alpha = 0.0;
  double beta = 0.0;

  static BasisFamily legendre() { return {BasisKind::Jacobi, 0.0, 0.0}; }
  static BasisFamily chebyshev() { return {BasisKind::Jacobi, -0.5, -0.5}; }
  static BasisFamily jacobi(double a, double b);
  static BasisFamily fourier() { return {BasisKind::Fourier, 0.0, 0.0}; }

  bool is_fourier() const { return kind == BasisKind::Fourier; }
  bool is_legendre() const { return kind == BasisKind::Jacobi && alpha == 0.0 && beta == 0.0; }
  bool is_chebyshev() const { return kind == BasisKind::Jacobi && alpha == -0.5 && beta == -0.5; }
  std::string name() const;
};

enum class DensityKind { MatchOrthogonality, ChebyshevArcsine, UniformOnTorus };

// Per-coordinate sampling density on (-1,1) (or the torus).  Evaluable
// pointwise and sampleable; integrates to 1.
struct Density {
  DensityKind kind = DensityKind::MatchOrthogonality;
  BasisFamily family;  // the family whose orthogonality density is matched

  static Density matching(const BasisFamily& f) { return {DensityKind::MatchOrthogonality, f}; }
  static Density chebyshev() { return {DensityKind::ChebyshevArcsine, BasisFamily::chebyshev()}; }
  static Density uniform() { return {DensityKind::UniformOnTorus, BasisFamily::legendre()}; }

  double pdf1(double y) const;                     // one coordinate
  double pdf(std::span<const double> y) const;     // tensor product
  double sample1(RngStream& rng) const;
  std::string name() const;
};

// --- Jacobi polynomial primitives -----------------------------------------

// Unnormalized Jacobi polynomial P_n^{(a,b)}(y).
double jacobi_poly(int n, double a, double b, double y);
// d/dy P_n^{(a,b)}(y), via P_n' = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}.
double jacobi_poly_deriv(int n, double a, double b, double y);
// L^2 norm-square of P_n^{(a,b)} against the weight (1-y)^a (1+y)^b,
// evaluated in the log-Gamma domain.
double jacobi_norm_const(double a, double b, int n);
// Total mass of the weight (1-y)^a (1+y)^b over (-1,1).
double jacobi_weight_mass(double a, double b);

// --- Orthonormal basis evaluation -----------------------------------------

// phi_n(y): orthonormal with respect to the family's probability density.
// Jacobi families only; use eval_basis_fourier for the Fourier basis.
double eval_basis(const BasisFamily& f, int n, double y);
double eval_basis_deriv(const BasisFamily& f, int n, double y);

std::complex<double> eval_basis_fourier(int n, double y);
std::complex<double> eval_basis_deriv_fourier(int n, double y);

// Sturm-Liouville eigenvalue of phi_n.
double eigenvalue(const BasisFamily& f, int n);

// Orthogonality probability density nu and Sturm-Liouville weight chi.
double density_nu(const BasisFamily& f, double y);
double weight_chi(const BasisFamily& f, double y);

// Tables phi_0..phi_nmax (and derivatives) at a point; used by assembly and
// approximant evaluation.  out spans must have size nmax+1.
void eval_basis_table(const BasisFamily& f, int nmax, double y,
                      std::span<double> values, std::span<double> derivs);
// Normalization multipliers for degrees 0..nmax; precompute these when
// tabulating at many points.
std::vector<double> orthonormal_scales(const BasisFamily& f, int nmax);
void eval_basis_table_scaled(const BasisFamily& f, int nmax, double y,
                             std::span<const double> scales, std::span<double> values,
                             std::span<double> derivs);
// Fourier table over the signed range [nmin, nmax]; spans sized nmax-nmin+1.
void eval_basis_table_fourier(int nmin, int nmax, double y,
                              std::span<std::complex<double>> values,
                              std::span<std::complex<double>> derivs);

// i.i.d. draws from a sampling density.
std::vector<double> sample_1d(const Density& mu, int count, RngStream& rng);

}  // namespace polygrad
