#include <doctest.h>

#include <cmath>
#include <complex>

#include "polygrad/basis.hpp"
#include "polygrad/quadrature.hpp"
#include "polygrad/rng.hpp"
#include "test_util.hpp"

using namespace polygrad;

namespace {
constexpr double kPi = 3.14159265358979323846;

double binom_real(int n, double q) {
  return std::exp(std::lgamma(n + q + 1.0) - std::lgamma(q + 1.0) - std::lgamma(n + 1.0));
}

// integral of f against the family's probability density, through the
// Gauss-Jacobi rule for the corresponding weight
double integrate_nu(const BasisFamily& f, int npts, const std::function<double(double)>& g) {
  const auto rule = gauss_jacobi(npts, f.alpha, f.beta);
  const double mass = jacobi_weight_mass(f.alpha, f.beta);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(rule.nodes[i]);
  return acc / mass;
}

double integrate_chi(const BasisFamily& f, int npts, const std::function<double(double)>& g) {
  const auto rule = gauss_jacobi(npts, f.alpha + 1.0, f.beta + 1.0);
  const double mass = jacobi_weight_mass(f.alpha, f.beta);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(rule.nodes[i]);
  return acc / mass;
}

}  // namespace

TEST_CASE("quadrature rules reproduce known moments") {
  const auto gl = gauss_legendre(12);
  for (int k = 0; k <= 23; ++k) {
    double acc = 0.0;
    for (int i = 0; i < gl.nodes.size(); ++i) acc += gl.weights[i] * std::pow(gl.nodes[i], k);
    const double want = (k % 2 == 0) ? 2.0 / (k + 1) : 0.0;
    CHECK(std::abs(acc - want) < 1e-13);
  }

  // Gauss-Jacobi mass equals the weight mass; agrees with Gauss-Legendre at (0,0).
  const auto gj = gauss_jacobi(12, 1.0, 0.0);
  CHECK(std::abs(gj.weights.sum() - jacobi_weight_mass(1.0, 0.0)) < 1e-12);
  const auto gj00 = gauss_jacobi(12, 0.0, 0.0);
  double acc = 0.0;
  for (int i = 0; i < gj00.nodes.size(); ++i) acc += gj00.weights[i] * std::cos(gj00.nodes[i]);
  double acc2 = 0.0;
  for (int i = 0; i < gl.nodes.size(); ++i) acc2 += gl.weights[i] * std::cos(gl.nodes[i]);
  CHECK(std::abs(acc - acc2) < 1e-12);

  const auto gc = gauss_jacobi(8, -0.5, -0.5);
  CHECK(std::abs(gc.weights.sum() - kPi) < 1e-12);
}

TEST_CASE("basis point values") {
  RngStream rng(7);
  for (int i = 0; i < 10; ++i)
    CHECK(eval_basis(BasisFamily::chebyshev(), 0, rng.uniform_sym()) == doctest::Approx(1.0));

  CHECK(eval_basis(BasisFamily::legendre(), 1, 1.0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(jacobi_poly(3, 1.0, 0.0, 1.0) == doctest::Approx(4.0));

  // reflection between (a,b) and (b,a)
  CHECK(jacobi_poly(2, 1.0, 0.0, -0.3) == doctest::Approx(jacobi_poly(2, 0.0, 1.0, 0.3)));
  for (int n = 0; n <= 15; ++n) {
    for (int g = 0; g <= 1000; ++g) {
      const double y = -1.0 + 2.0 * g / 1000.0;
      const double lhs = jacobi_poly(n, 1.0, -0.5, y);
      const double rhs = (n % 2 ? -1.0 : 1.0) * jacobi_poly(n, -0.5, 1.0, -y);
      CHECK(std::abs(lhs - rhs) < 1e-12);
    }
  }
}

TEST_CASE("basis derivative values") {
  CHECK(eval_basis_deriv(BasisFamily::chebyshev(), 2, 0.0) == doctest::Approx(0.0));
  CHECK(eval_basis_deriv(BasisFamily::legendre(), 2, 1.0) == doctest::Approx(3.0 * std::sqrt(5.0)));

  const auto df = eval_basis_deriv_fourier(1, 0.0);
  CHECK(df.real() == doctest::Approx(0.0));
  CHECK(df.imag() == doctest::Approx(kPi));
}

TEST_CASE("derivative matches Richardson-extrapolated finite differences") {
  for (const auto& f : {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.0)}) {
    for (int n = 0; n <= 20; ++n) {
      for (double y : {-0.9, -0.45, -0.1, 0.2, 0.55, 0.85}) {
        const double want = testutil::fd_derivative([&](double t) { return eval_basis(f, n, t); }, y);
        const double got = eval_basis_deriv(f, n, y);
        if (std::abs(want) > 1e-8) {
          CHECK(testutil::rel_err(got, want) < 1e-6);
        } else {
          CHECK(std::abs(got - want) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("eigenvalues") {
  CHECK(eigenvalue(BasisFamily::chebyshev(), 3) == doctest::Approx(9.0));
  CHECK(eigenvalue(BasisFamily::legendre(), 2) == doctest::Approx(6.0));
  CHECK(eigenvalue(BasisFamily::jacobi(1.0, 0.0), 2) == doctest::Approx(8.0));
  CHECK(eigenvalue(BasisFamily::fourier(), 3) == doctest::Approx(9.0 * kPi * kPi));
  CHECK(eigenvalue(BasisFamily::fourier(), -3) == doctest::Approx(9.0 * kPi * kPi));
  CHECK(eigenvalue(BasisFamily::legendre(), 0) == doctest::Approx(0.0));
  // strictly increasing
  for (const auto& f : {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.5)})
    for (int n = 0; n < 30; ++n) CHECK(eigenvalue(f, n + 1) > eigenvalue(f, n));
}

TEST_CASE("densities and Sturm-Liouville weights") {
  CHECK(density_nu(BasisFamily::legendre(), 0.0) == doctest::Approx(0.5));
  CHECK(weight_chi(BasisFamily::legendre(), 0.0) == doctest::Approx(0.5));
  CHECK(density_nu(BasisFamily::chebyshev(), 0.0) == doctest::Approx(1.0 / kPi));
  CHECK(density_nu(BasisFamily::fourier(), 0.3) == doctest::Approx(0.5));
  CHECK(weight_chi(BasisFamily::fourier(), 0.3) == doctest::Approx(0.5));

  // each density integrates to one
  for (const auto& f : {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.0)}) {
    const double total = integrate_nu(f, 20, [](double) { return 1.0; });
    CHECK(total == doctest::Approx(1.0));
  }
  // singular density evaluation near the endpoints stays finite
  CHECK(std::isfinite(density_nu(BasisFamily::chebyshev(), 1.0)));
  CHECK(std::isfinite(density_nu(BasisFamily::chebyshev(), -1.0)));
}

TEST_CASE("jacobi norm constants") {
  CHECK(jacobi_norm_const(0.0, 0.0, 0) == doctest::Approx(2.0));
  CHECK(jacobi_norm_const(0.0, 0.0, 2) == doctest::Approx(2.0 / 5.0));
  CHECK(jacobi_norm_const(1.0, 0.0, 1) == doctest::Approx(1.0));

  // quadrature oracle: integral of P_n^2 against the bare Jacobi weight
  for (const double a : {0.0, 1.0, -0.5}) {
    for (const double b : {0.0, -0.5}) {
      for (int n = 0; n <= 8; ++n) {
        const auto rule = gauss_jacobi(n + 2, a, b);
        double acc = 0.0;
        for (int i = 0; i < rule.nodes.size(); ++i) {
          const double p = jacobi_poly(n, a, b, rule.nodes[i]);
          acc += rule.weights[i] * p * p;
        }
        CHECK(testutil::rel_err(jacobi_norm_const(a, b, n), acc) < 1e-12);
      }
    }
  }
}

TEST_CASE("orthonormality under the matching density") {
  for (const auto& f : {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.0)}) {
    for (int n = 0; n <= 20; ++n) {
      for (int m = n; m <= 20; ++m) {
        const double ip = integrate_nu(f, 24, [&](double y) {
          return eval_basis(f, n, y) * eval_basis(f, m, y);
        });
        CHECK(std::abs(ip - (n == m ? 1.0 : 0.0)) < 1e-8);
      }
    }
  }
}

TEST_CASE("derivatives are orthogonal against chi with eigenvalue norms") {
  for (const double a : {-0.5, 0.0, 1.0}) {
    for (const double b : {-0.5, 0.0, 1.0}) {
      const auto f = BasisFamily::jacobi(a, b);
      for (int n = 0; n <= 20; ++n) {
        for (int m = n; m <= 20; ++m) {
          const double ip = integrate_chi(f, 24, [&](double y) {
            return eval_basis_deriv(f, n, y) * eval_basis_deriv(f, m, y);
          });
          const double want = (n == m) ? eigenvalue(f, n) : 0.0;
          CHECK(std::abs(ip - want) < 1e-6);
        }
      }
    }
  }
}

TEST_CASE("fourier orthonormality on the torus") {
  const int M = 1 << 12;
  for (int n = -6; n <= 6; ++n) {
    for (int m = -6; m <= 6; ++m) {
      std::complex<double> acc = 0.0;
      for (int j = 0; j < M; ++j) {
        const double y = -1.0 + 2.0 * j / M;
        acc += eval_basis_fourier(n, y) * std::conj(eval_basis_fourier(m, y));
      }
      acc /= static_cast<double>(M);
      CHECK(std::abs(acc - (n == m ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("endpoint suprema follow the binomial growth law") {
  struct Pair { double a, b; };
  for (const auto [a, b] : {Pair{0.0, 0.0}, Pair{-0.5, -0.5}, Pair{1.0, 0.0}, Pair{-0.5, 0.0}, Pair{1.0, 1.0}}) {
    const double q = std::max(a, b);
    for (int n = 0; n <= 20; ++n) {
      double sup = 0.0;
      for (int g = 0; g <= 2000; ++g) {
        const double y = -1.0 + 2.0 * g / 2000.0;
        sup = std::max(sup, std::abs(jacobi_poly(n, a, b, y)));
      }
      CHECK(std::abs(sup - binom_real(n, q)) < 1e-8);
    }
  }
}

TEST_CASE("sampling draws follow the requested law") {
  RngStream rng(2024);
  CHECK(sample_1d(Density::uniform(), 0, rng).empty());

  const int n = 100000;
  {
    RngStream r(11);
    const auto xs = sample_1d(Density::uniform(), n, r);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(12.0 * n));
    for (double x : xs) CHECK((x > -1.0 && x < 1.0));
  }
  {
    RngStream r(12);
    const auto xs = sample_1d(Density::chebyshev(), n, r);
    int inside = 0;
    const double c = 1.0 / std::sqrt(2.0);
    for (double x : xs) inside += (x > -c && x < c);
    CHECK(std::abs(inside / static_cast<double>(n) - 0.5) < 4.0 * 0.5 / std::sqrt(n));
  }
  {
    // mean of the Jacobi(1,0) density is -1/3
    RngStream r(13);
    const auto xs = sample_1d(Density::matching(BasisFamily::jacobi(1.0, 0.0)), n, r);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    CHECK(std::abs(mean + 1.0 / 3.0) < 4.0 / std::sqrt(static_cast<double>(n)));
  }
  {
    // determinism with a fixed stream
    RngStream r1(99), r2(99);
    const auto a = sample_1d(Density::chebyshev(), 32, r1);
    const auto b = sample_1d(Density::chebyshev(), 32, r2);
    CHECK(a == b);
  }
}

TEST_CASE("domain and parameter validation") {
  CHECK_THROWS_AS(eval_basis(BasisFamily::legendre(), -1, 0.0), std::domain_error);
  CHECK_THROWS_AS(eval_basis(BasisFamily::legendre(), 2, 1.5), std::domain_error);
  CHECK_THROWS_AS(BasisFamily::jacobi(-1.2, 0.0), std::domain_error);
  CHECK_THROWS_AS(eval_basis(BasisFamily::fourier(), 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(jacobi_norm_const(0.0, 0.0, -2), std::domain_error);
  RngStream rng(1);
  CHECK_THROWS_AS(sample_1d(Density::uniform(), -1, rng), std::domain_error);
}

TEST_CASE("table evaluation agrees with pointwise evaluation") {
  const auto f = BasisFamily::jacobi(1.0, -0.5);
  std::vector<double> v(13), d(13);
  eval_basis_table(f, 12, 0.37, v, d);
  for (int n = 0; n <= 12; ++n) {
    CHECK(v[n] == doctest::Approx(eval_basis(f, n, 0.37)));
    CHECK(d[n] == doctest::Approx(eval_basis_deriv(f, n, 0.37)));
  }
  std::vector<std::complex<double>> fv(9), fd(9);
  eval_basis_table_fourier(-4, 4, 0.21, fv, fd);
  for (int n = -4; n <= 4; ++n) {
    CHECK(std::abs(fv[n + 4] - eval_basis_fourier(n, 0.21)) < 1e-14);
    CHECK(std::abs(fd[n + 4] - eval_basis_deriv_fourier(n, 0.21)) < 1e-14);
  }
}
