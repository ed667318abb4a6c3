#include <doctest.h>

#include <cmath>
#include <sstream>

#include "polygrad/measurement.hpp"
#include "polygrad/tensor_eval.hpp"
#include "test_util.hpp"

using namespace polygrad;

namespace {

RealOracle basis_oracle(const BasisFamily& f, const MultiIndex& n) {
  return [f, n](const Eigen::VectorXd& y) {
    double v = 1.0;
    for (int j = 0; j < y.size(); ++j) v *= eval_basis(f, n[j], y[j]);
    return v;
  };
}

RealGradientOracle basis_gradient(const BasisFamily& f, const MultiIndex& n) {
  return [f, n](const Eigen::VectorXd& y) {
    Eigen::VectorXd g(y.size());
    for (int k = 0; k < y.size(); ++k) {
      double v = eval_basis_deriv(f, n[k], y[k]);
      for (int j = 0; j < y.size(); ++j)
        if (j != k) v *= eval_basis(f, n[j], y[j]);
      g[k] = v;
    }
    return g;
  };
}

}  // namespace

TEST_CASE("tau scalings") {
  const auto leg = BasisFamily::legendre();
  const auto cheb = BasisFamily::chebyshev();
  const Density ml = Density::matching(leg);
  const Density mc = Density::matching(cheb);

  Eigen::VectorXd y(2);
  y << 0.3, -0.7;
  CHECK(tau_k(leg, ml, y, 0) == doctest::Approx(1.0));
  Eigen::VectorXd y2(2);
  y2 << 0.0, 0.5;
  CHECK(tau_k(leg, ml, y2, 1) == doctest::Approx(1.0));
  CHECK(tau_k(leg, ml, y2, 2) == doctest::Approx(1.0 - 0.25));

  Eigen::VectorXd y1(1);
  y1 << 0.6;
  CHECK(tau_k(cheb, mc, y1, 1) == doctest::Approx(0.64));
  CHECK_THROWS_AS(tau_k(leg, ml, y1, 2), std::domain_error);
}

TEST_CASE("sample point draws") {
  const Density mu = Density::uniform();
  CHECK(sample_points(mu, 2, 0, 7).m() == 0);

  const auto a = sample_points(mu, 3, 64, 42);
  const auto b = sample_points(mu, 3, 64, 42);
  CHECK(a.points == b.points);
  const auto c = sample_points(mu, 3, 64, 43);
  CHECK(a.points != c.points);

  const auto big = sample_points(mu, 2, 100000, 5);
  for (int j = 0; j < 2; ++j) {
    const double mean = big.points.col(j).mean();
    CHECK(std::abs(mean) < 4.0 / std::sqrt(12.0 * big.m()));
  }
  CHECK(big.points.maxCoeff() < 1.0);
  CHECK(big.points.minCoeff() > -1.0);
}

TEST_CASE("assembled system shapes and cost accounting") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 3);
  REQUIRE(lambda.size() == 8);
  const auto pts = sample_points(mu, 2, 5, 11);
  auto f = basis_oracle(leg, {1, 0});
  auto g = basis_gradient(leg, {1, 0});

  const auto full = assemble(leg, mu, lambda, pts, f, g, SamplingMode::full_gradient());
  CHECK(full.rows() == 15);
  CHECK(full.cols() == 8);
  CHECK(full.m_o == 5);
  CHECK(full.m_g == 5);
  CHECK(full.cost() == 10);

  const auto un = assemble(leg, mu, lambda, pts, f, g, SamplingMode::unaugmented());
  CHECK(un.rows() == 5);
  CHECK(un.m_g == 0);
  CHECK(un.cost() == 5);
  CHECK(un.q == Eigen::VectorXd::Ones(8));

  const auto frac = assemble(leg, mu, lambda, pts, f, g, SamplingMode::fractional(0.5));
  CHECK(frac.m_g == 3);  // ceil(0.5 * 5)
  CHECK(frac.rows() == 5 + 2 * 3);
  CHECK(frac.cost() == 8);

  const auto ind = assemble(leg, mu, lambda, pts, f, g, SamplingMode::independent());
  CHECK(ind.rows() == 15);
  CHECK(ind.cost() == 10);

  const auto fr = assemble(leg, mu, lambda, pts, f, g, SamplingMode::fractional(0.5, true));
  CHECK(fr.m_g == 3);
  CHECK(fr.rows() == 11);
}

TEST_CASE("right-hand side of an in-span target matches the scaled column") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 3);
  const auto pts = sample_points(mu, 2, 6, 3);
  const MultiIndex n0{1, 1};
  const int j0 = *lambda.find(n0);

  for (const auto mode : {SamplingMode::full_gradient(), SamplingMode::unaugmented()}) {
    const auto e = assemble(leg, mu, lambda, pts, basis_oracle(leg, n0), basis_gradient(leg, n0), mode);
    const Eigen::VectorXd expect = e.A.col(j0) * e.q[j0];
    CHECK((e.rhs - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((e.rhs - e.A_raw.col(j0)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("column scaling values") {
  const auto leg = BasisFamily::legendre();
  const auto q = q_scaling(leg, IndexSet(2, {{0, 0}, {1, 0}}));
  CHECK(q[0] == doctest::Approx(1.0));
  CHECK(q[1] == doctest::Approx(std::sqrt(3.0)));

  CHECK(q_scaling(BasisFamily::fourier(), IndexSet(2, {{0, 0}}))[0] == doctest::Approx(1.0));
  const auto qc = q_scaling(BasisFamily::chebyshev(), IndexSet(2, {{2, 2}}));
  CHECK(qc[0] == doctest::Approx(3.0));
}

TEST_CASE("deleting derivative blocks reproduces the unaugmented system exactly") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 3);
  const auto pts = sample_points(mu, 2, 9, 21);
  const MultiIndex n0{0, 2};

  const auto full = assemble(leg, mu, lambda, pts, basis_oracle(leg, n0), basis_gradient(leg, n0),
                             SamplingMode::full_gradient());
  const auto un = assemble(leg, mu, lambda, pts, basis_oracle(leg, n0), basis_gradient(leg, n0),
                           SamplingMode::unaugmented());
  const auto stripped = strip_to_unaugmented(full);
  CHECK(stripped.A == un.A);
  CHECK(stripped.rhs == un.rhs);
  CHECK(stripped.q == un.q);
  CHECK(stripped.cost() == un.cost());
}

TEST_CASE("isotropy of the scaled system") {
  // single constant Fourier mode: the gram matrix is exactly 1
  const auto f0 = isotropy_deviation(BasisFamily::fourier(), Density::uniform(),
                                     IndexSet(1, {{0}}), SamplingMode::unaugmented(), 50, 4);
  CHECK(f0.max_entry < 1e-14);
  CHECK(f0.spectral < 1e-14);

  // Monte Carlo decay: quadrupling the sample size should clearly shrink the
  // deviation on average
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = IndexSet(1, {{0}, {1}});
  double r1 = 0.0, r4 = 0.0;
  for (int s = 0; s < 20; ++s) {
    r1 += isotropy_deviation(leg, mu, lambda, SamplingMode::full_gradient(), 500, 100 + s).max_entry;
    r4 += isotropy_deviation(leg, mu, lambda, SamplingMode::full_gradient(), 2000, 200 + s).max_entry;
  }
  CHECK(r4 <= 0.7 * r1);
}

TEST_CASE("columns are normalized in expectation") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 2);
  const int T = 150, m = 50;
  Eigen::MatrixXd norms(T, lambda.size());
  auto zero = [](const Eigen::VectorXd&) { return 0.0; };
  auto zgrad = [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Zero(y.size()).eval(); };
  for (int t = 0; t < T; ++t) {
    const auto pts = sample_points(mu, 2, m, 900 + t);
    const auto e = assemble(leg, mu, lambda, pts, zero, zgrad, SamplingMode::full_gradient());
    for (int j = 0; j < lambda.size(); ++j) norms(t, j) = e.A.col(j).squaredNorm();
  }
  for (int j = 0; j < lambda.size(); ++j) {
    const double mean = norms.col(j).mean();
    const double sd = std::sqrt((norms.col(j).array() - mean).square().sum() / (T - 1));
    CHECK(std::abs(mean - 1.0) <= 3.0 * sd / std::sqrt(static_cast<double>(T)) + 1e-12);
  }
}

TEST_CASE("coefficient norms bound the sampled amplitudes") {
  // |phi_n| stays below u_n and the tau-weighted gradient stack stays below
  // sqrt(1+lambda_n) u_n
  for (const auto& fam : {BasisFamily::legendre(), BasisFamily::chebyshev()}) {
    const Density mu = Density::matching(fam);
    const auto lambda = hyperbolic_cross(2, 3);
    WeightEngine eng(fam, mu);
    RngStream rng(31);
    for (const auto& n : lambda.indices()) {
      const double un = eng.u(n);
      double lam = 0.0;
      for (int v : n) lam += eigenvalue(fam, v);
      const double vn = std::sqrt(1.0 + lam) * un;
      auto f = basis_oracle(fam, n);
      auto g = basis_gradient(fam, n);
      for (int t = 0; t < 2000; ++t) {
        Eigen::VectorXd y(2);
        y << mu.sample1(rng), mu.sample1(rng);
        CHECK(std::abs(f(y)) <= un + 1e-6);
        std::vector<double> tk;
        double stack = tau_k(fam, mu, y, 0) * f(y) * f(y);
        const auto gy = g(y);
        for (int k = 1; k <= 2; ++k) stack += tau_k(fam, mu, y, k) * gy[k - 1] * gy[k - 1];
        CHECK(std::sqrt(stack) <= vn + 1e-6);
      }
    }
  }
}

TEST_CASE("local coherence estimates") {
  const auto cheb = BasisFamily::chebyshev();
  const Density mc = Density::matching(cheb);
  const auto delta = hyperbolic_cross(2, 2);
  WeightEngine eng(cheb, mc);
  WeightVector u;
  for (const auto& n : delta.indices()) u.set(n, eng.u(n));

  CoherenceBudget budget;
  budget.sup_points = 20000;
  budget.expect_samples = 1500;
  budget.sign_samples = 32;

  const auto g1 = local_coherence(cheb, mc, delta, CoherenceKind::Gamma1, u, budget);
  CHECK(g1.value >= 1.0 - 1e-6);

  const auto ups = local_coherence(cheb, mc, delta, CoherenceKind::Upsilon, u, budget);
  double ratio = 0.0, card = 0.0;
  for (const auto& n : delta.indices()) {
    double lam = 0.0;
    for (int v : n) lam += eigenvalue(cheb, v);
    ratio = std::max(ratio, (1.0 + eng.kappa(n)) / (1.0 + lam));
    card += eng.u(n) * eng.u(n);
  }
  CHECK(ups.value <= ratio * card + 1e-6);
  CHECK(ups.value > 0.5);

  // single constant Fourier mode
  const IndexSet d0(1, {{0}});
  const auto uf = WeightVector::ones(d0);
  const auto upsf = local_coherence(BasisFamily::fourier(), Density::uniform(), d0,
                                    CoherenceKind::Upsilon, uf, budget);
  CHECK(upsf.value == doctest::Approx(1.0));
  const auto g2f = local_coherence(BasisFamily::fourier(), Density::uniform(), d0,
                                   CoherenceKind::Gamma2, uf, budget);
  CHECK(g2f.value == doctest::Approx(1.0));

  const auto g2 = local_coherence(cheb, mc, delta, CoherenceKind::Gamma2, u, budget);
  CHECK(g2.value >= 1.0 - 5e-2);

  CHECK_THROWS_AS(local_coherence(cheb, mc, hyperbolic_cross(2, 12), CoherenceKind::Upsilon, u,
                                  budget),
                  std::invalid_argument);
}

TEST_CASE("ensemble export round trip") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 2);
  const auto pts = sample_points(mu, 2, 4, 77);
  const auto e = assemble(leg, mu, lambda, pts, basis_oracle(leg, {1, 0}),
                          basis_gradient(leg, {1, 0}), SamplingMode::full_gradient());

  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_ensemble_binary(ss, e);
  const auto p = read_ensemble_binary(ss);
  CHECK_FALSE(p.is_complex);
  CHECK(p.A.rows() == e.rows());
  CHECK(p.A.cols() == e.cols());
  CHECK((p.A.real() - e.A).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.rhs.real() - e.rhs).cwiseAbs().maxCoeff() == 0.0);
  CHECK((p.q - e.q).cwiseAbs().maxCoeff() == 0.0);

  std::stringstream csv;
  write_ensemble_csv(csv, e);
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == e.rows() + 1);

  std::stringstream bad("nonsense", std::ios::in | std::ios::binary);
  CHECK_THROWS(read_ensemble_binary(bad));
}

TEST_CASE("fourier assembly uses the complex path") {
  const Density mu = Density::uniform();
  const IndexSet lambda(1, {{-1}, {0}, {1}});
  const auto pts = sample_points(mu, 1, 8, 9);
  ComplexOracle f = [](const Eigen::VectorXd& y) { return eval_basis_fourier(1, y[0]); };
  ComplexGradientOracle g = [](const Eigen::VectorXd& y) {
    Eigen::VectorXcd out(1);
    out[0] = eval_basis_deriv_fourier(1, y[0]);
    return out;
  };
  const auto e = assemble_fourier(mu, lambda, pts, f, g, SamplingMode::full_gradient());
  CHECK(e.rows() == 16);
  const int j1 = *lambda.find({1});
  CHECK((e.rhs - e.A_raw.col(j1)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(e.q[j1] == doctest::Approx(std::sqrt(1.0 + 3.14159265358979323846 * 3.14159265358979323846)));
}

TEST_CASE("assembly guards") {
  const auto leg = BasisFamily::legendre();
  const Density mu = Density::matching(leg);
  const auto lambda = hyperbolic_cross(2, 3);
  const auto pts = sample_points(mu, 2, 5, 1);
  auto f = basis_oracle(leg, {0, 0});
  auto g = basis_gradient(leg, {0, 0});

  CHECK_THROWS_AS(assemble(leg, mu, IndexSet(2, {}), pts, f, g, SamplingMode::unaugmented()),
                  std::invalid_argument);
  CHECK_THROWS_AS(assemble(leg, mu, lambda, pts, f, nullptr, SamplingMode::full_gradient()),
                  std::invalid_argument);
  AssembleLimits tiny;
  tiny.max_matrix_bytes = 128;
  CHECK_THROWS_AS(assemble(leg, mu, lambda, pts, f, g, SamplingMode::full_gradient(), tiny),
                  std::length_error);
  const auto pts1 = sample_points(mu, 1, 5, 1);
  CHECK_THROWS_AS(assemble(leg, mu, lambda, pts1, f, g, SamplingMode::unaugmented()),
                  std::invalid_argument);
  CHECK_THROWS_AS(SamplingMode::fractional(1.5), std::domain_error);
}
