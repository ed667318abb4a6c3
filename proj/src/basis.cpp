#include "polygrad/basis.hpp"

#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace polygrad {

namespace {

constexpr double kPi = 3.14159265358979323846;
// Singular densities are evaluated no closer than this to the endpoints.
constexpr double kEndpointClamp = 1e-12;

void check_jacobi(const BasisFamily& f) {
  if (f.kind != BasisKind::Jacobi)
    throw std::domain_error("operation requires a Jacobi-type family");
}

void check_point(double y) {
  if (!(y >= -1.0 && y <= 1.0)) throw std::domain_error("point outside [-1,1]");
}

double clamp_interior(double y) {
  const double lim = 1.0 - kEndpointClamp;
  if (y > lim) return lim;
  if (y < -lim) return -lim;
  return y;
}

// log of the norm-square of P_n^{(a,b)} against (1-y)^a (1+y)^b.
double log_jacobi_norm_const(double a, double b, int n) {
  const double apb = a + b;
  if (n == 0) {
    // (2n+a+b+1) Gamma(n+a+b+1) degenerates at n = 0 when a+b+1 -> 0;
    // combine into Gamma(a+b+2) which is regular.
    return (apb + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
           std::lgamma(apb + 2.0);
  }
  return (apb + 1.0) * std::log(2.0) + std::lgamma(n + a + 1.0) + std::lgamma(n + b + 1.0) -
         std::lgamma(n + 1.0) - std::log(2.0 * n + apb + 1.0) - std::lgamma(n + apb + 1.0);
}

double log_weight_mass(double a, double b) {
  return (a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
         std::lgamma(a + b + 2.0);
}

// sqrt(c^{(a,b)} / kappa_n^{(a,b)}): multiplier taking P_n to the basis
// orthonormal under the probability density.
double orthonormal_scale(double a, double b, int n) {
  return std::exp(0.5 * (log_weight_mass(a, b) - log_jacobi_norm_const(a, b, n)));
}

void jacobi_table(int nmax, double a, double b, double y, std::span<double> out) {
  out[0] = 1.0;
  if (nmax == 0) return;
  out[1] = 0.5 * (a + b + 2.0) * y + 0.5 * (a - b);
  for (int n = 2; n <= nmax; ++n) {
    const double t = 2.0 * n + a + b;
    const double c1 = 2.0 * n * (n + a + b) * (t - 2.0);
    const double c2 = (t - 1.0) * (a * a - b * b);
    const double c3 = (t - 2.0) * (t - 1.0) * t;
    const double c4 = 2.0 * (n + a - 1.0) * (n + b - 1.0) * t;
    out[n] = ((c2 + c3 * y) * out[n - 1] - c4 * out[n - 2]) / c1;
  }
}

}  // namespace

BasisFamily BasisFamily::jacobi(double a, double b) {
  if (a <= -1.0 || b <= -1.0) throw std::domain_error("Jacobi parameters must exceed -1");
  return {BasisKind::Jacobi, a, b};
}

std::string BasisFamily::name() const {
  if (is_fourier()) return "fourier";
  if (is_legendre()) return "legendre";
  if (is_chebyshev()) return "chebyshev";
  std::ostringstream os;
  os << "jacobi(" << alpha << "," << beta << ")";
  return os.str();
}

std::string Density::name() const {
  switch (kind) {
    case DensityKind::UniformOnTorus:
      return "uniform";
    case DensityKind::ChebyshevArcsine:
      return "chebyshev";
    case DensityKind::MatchOrthogonality:
      return "matching";
  }
  return "?";
}

double jacobi_poly(int n, double a, double b, double y) {
  if (n < 0) throw std::domain_error("polynomial degree must be nonnegative");
  std::vector<double> buf(n + 1);
  jacobi_table(n, a, b, y, buf);
  return buf[n];
}

double jacobi_poly_deriv(int n, double a, double b, double y) {
  if (n < 0) throw std::domain_error("polynomial degree must be nonnegative");
  if (n == 0) return 0.0;
  return 0.5 * (n + a + b + 1.0) * jacobi_poly(n - 1, a + 1.0, b + 1.0, y);
}

double jacobi_norm_const(double a, double b, int n) {
  if (a <= -1.0 || b <= -1.0) throw std::domain_error("Jacobi parameters must exceed -1");
  if (n < 0) throw std::domain_error("polynomial degree must be nonnegative");
  return std::exp(log_jacobi_norm_const(a, b, n));
}

double jacobi_weight_mass(double a, double b) {
  if (a <= -1.0 || b <= -1.0) throw std::domain_error("Jacobi parameters must exceed -1");
  return std::exp(log_weight_mass(a, b));
}

double eval_basis(const BasisFamily& f, int n, double y) {
  check_jacobi(f);
  if (n < 0) throw std::domain_error("basis index must be nonnegative");
  check_point(y);
  return orthonormal_scale(f.alpha, f.beta, n) * jacobi_poly(n, f.alpha, f.beta, y);
}

double eval_basis_deriv(const BasisFamily& f, int n, double y) {
  check_jacobi(f);
  if (n < 0) throw std::domain_error("basis index must be nonnegative");
  check_point(y);
  return orthonormal_scale(f.alpha, f.beta, n) * jacobi_poly_deriv(n, f.alpha, f.beta, y);
}

std::complex<double> eval_basis_fourier(int n, double y) {
  check_point(y);
  return std::polar(1.0, kPi * n * y);
}

std::complex<double> eval_basis_deriv_fourier(int n, double y) {
  check_point(y);
  return std::complex<double>(0.0, kPi * n) * std::polar(1.0, kPi * n * y);
}

double eigenvalue(const BasisFamily& f, int n) {
  if (f.is_fourier()) {
    const double np = kPi * n;
    return np * np;
  }
  if (n < 0) throw std::domain_error("basis index must be nonnegative");
  return n * (n + f.alpha + f.beta + 1.0);
}

double density_nu(const BasisFamily& f, double y) {
  check_point(y);
  if (f.is_fourier()) return 0.5;
  const double yc = clamp_interior(y);
  return std::exp(f.alpha * std::log1p(-yc) + f.beta * std::log1p(yc) -
                  log_weight_mass(f.alpha, f.beta));
}

double weight_chi(const BasisFamily& f, double y) {
  check_point(y);
  if (f.is_fourier()) return 0.5;
  const double yc = clamp_interior(y);
  return std::exp((f.alpha + 1.0) * std::log1p(-yc) + (f.beta + 1.0) * std::log1p(yc) -
                  log_weight_mass(f.alpha, f.beta));
}

std::vector<double> orthonormal_scales(const BasisFamily& f, int nmax) {
  check_jacobi(f);
  std::vector<double> s(nmax + 1);
  for (int n = 0; n <= nmax; ++n) s[n] = orthonormal_scale(f.alpha, f.beta, n);
  return s;
}

void eval_basis_table_scaled(const BasisFamily& f, int nmax, double y,
                             std::span<const double> scales, std::span<double> values,
                             std::span<double> derivs) {
  check_jacobi(f);
  const double a = f.alpha, b = f.beta;
  jacobi_table(nmax, a, b, y, values);
  if (nmax > 0) jacobi_table(nmax - 1, a + 1.0, b + 1.0, y, derivs);
  // derivs currently holds P^{(a+1,b+1)}_0..P_{nmax-1}; rewrite top-down so
  // each slot is consumed before it is overwritten.
  for (int n = nmax; n >= 1; --n)
    derivs[n] = scales[n] * 0.5 * (n + a + b + 1.0) * derivs[n - 1];
  derivs[0] = 0.0;
  for (int n = 0; n <= nmax; ++n) values[n] *= scales[n];
}

void eval_basis_table(const BasisFamily& f, int nmax, double y, std::span<double> values,
                      std::span<double> derivs) {
  const auto scales = orthonormal_scales(f, nmax);
  eval_basis_table_scaled(f, nmax, y, scales, values, derivs);
}

void eval_basis_table_fourier(int nmin, int nmax, double y,
                              std::span<std::complex<double>> values,
                              std::span<std::complex<double>> derivs) {
  for (int n = nmin; n <= nmax; ++n) {
    const auto v = std::polar(1.0, kPi * n * y);
    values[n - nmin] = v;
    derivs[n - nmin] = std::complex<double>(0.0, kPi * n) * v;
  }
}

double Density::pdf1(double y) const {
  switch (kind) {
    case DensityKind::UniformOnTorus:
      return 0.5;
    case DensityKind::ChebyshevArcsine: {
      check_point(y);
      const double yc = clamp_interior(y);
      return 1.0 / (kPi * std::sqrt(1.0 - yc * yc));
    }
    case DensityKind::MatchOrthogonality:
      return density_nu(family, y);
  }
  return 0.0;
}

double Density::pdf(std::span<const double> y) const {
  double p = 1.0;
  for (double yi : y) p *= pdf1(yi);
  return p;
}

double Density::sample1(RngStream& rng) const {
  switch (kind) {
    case DensityKind::UniformOnTorus:
      return rng.uniform_sym();
    case DensityKind::ChebyshevArcsine:
      return std::cos(kPi * rng.uniform_open01());
    case DensityKind::MatchOrthogonality: {
      if (family.is_fourier() || family.is_legendre()) return rng.uniform_sym();
      if (family.is_chebyshev()) return std::cos(kPi * rng.uniform_open01());
      // General Jacobi: inverse-CDF through the regularized incomplete beta.
      const double u = rng.uniform_open01();
      const double x = boost::math::ibeta_inv(family.beta + 1.0, family.alpha + 1.0, u);
      return clamp_interior(2.0 * x - 1.0);
    }
  }
  return 0.0;
}

std::vector<double> sample_1d(const Density& mu, int count, RngStream& rng) {
  if (count < 0) throw std::domain_error("sample count must be nonnegative");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = mu.sample1(rng);
  return out;
}

}  // namespace polygrad
