#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>

#include "polygrad/rng.hpp"
#include "polygrad/solver.hpp"
#include "test_util.hpp"

using namespace polygrad;

namespace {

Eigen::VectorXd random_vec(RngStream& rng, int n, double scale = 1.0) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

Eigen::MatrixXd random_mat(RngStream& rng, int m, int n) {
  Eigen::MatrixXd A(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.normal();
  return A;
}

Eigen::VectorXd random_weights(RngStream& rng, int n, double lo = 1.0, double hi = 3.0) {
  Eigen::VectorXd w(n);
  for (int i = 0; i < n; ++i) w[i] = lo + (hi - lo) * rng.uniform01();
  return w;
}

// random point of the weighted ball, by scaled exponential magnitudes
Eigen::VectorXd random_feasible(RngStream& rng, const Eigen::VectorXd& w, double tau) {
  const int n = static_cast<int>(w.size());
  Eigen::VectorXd e(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    e[i] = -std::log(rng.uniform_open01());
    total += e[i];
  }
  const double u = rng.uniform01();
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) {
    const double mag = tau * u * e[i] / (total * w[i]);
    v[i] = rng.uniform01() < 0.5 ? -mag : mag;
  }
  return v;
}

}  // namespace

TEST_CASE("weighted ball projection basics") {
  Eigen::VectorXd w2(2);
  w2 << 1.0, 1.0;

  Eigen::VectorXd inside(2);
  inside << 0.2, -0.3;
  CHECK(project_weighted_l1_ball<double>(inside, w2, 1.0) == inside);

  Eigen::VectorXd z(2);
  z << 3.0, 0.0;
  const Eigen::VectorXd p = project_weighted_l1_ball<double>(z, w2, 1.0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));

  Eigen::VectorXd z2(2), w22(2);
  z2 << 2.0, 2.0;
  w22 << 1.0, 2.0;
  const Eigen::VectorXd p2 = project_weighted_l1_ball<double>(z2, w22, 2.0);
  CHECK(p2[0] == doctest::Approx(1.2));
  CHECK(p2[1] == doctest::Approx(0.4));
  CHECK(w22.dot(p2.cwiseAbs()) == doctest::Approx(2.0));

  CHECK_THROWS_AS(project_weighted_l1_ball<double>(z, w2, -1.0), std::domain_error);
  CHECK(project_weighted_l1_ball<double>(z, w2, 0.0).isZero());
}

TEST_CASE("projection agrees with the bisection oracle") {
  RngStream rng(314);
  for (int t = 0; t < 200; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform01() * 10);
    const Eigen::VectorXd z = random_vec(rng, n, 2.0);
    const Eigen::VectorXd w = random_weights(rng, n);
    const double tau = 0.1 + 2.0 * rng.uniform01();
    const Eigen::VectorXd got = project_weighted_l1_ball<double>(z, w, tau);
    const Eigen::VectorXd want = testutil::project_ball_bisection(z, w, tau);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("projection idempotence and optimality") {
  RngStream rng(2718);
  for (int t = 0; t < 40; ++t) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 8);
    const Eigen::VectorXd z = random_vec(rng, n, 2.0);
    const Eigen::VectorXd w = random_weights(rng, n);
    const double tau = 0.5 + rng.uniform01();
    const Eigen::VectorXd p = project_weighted_l1_ball<double>(z, w, tau);
    CHECK(project_weighted_l1_ball<double>(p, w, tau) == p);

    const double dist = (z - p).norm();
    const bool infeasible = w.dot(z.cwiseAbs()) > tau;
    if (infeasible) CHECK(dist > 0.0);
    for (int s = 0; s < 250; ++s) {
      const Eigen::VectorXd v = random_feasible(rng, w, tau);
      CHECK(dist <= (z - v).norm() + 1e-12);
    }
  }
}

TEST_CASE("complex projection shrinks moduli and keeps phases") {
  RngStream rng(99);
  for (int t = 0; t < 50; ++t) {
    const int n = 3 + static_cast<int>(rng.uniform01() * 6);
    Eigen::VectorXcd z(n);
    for (int i = 0; i < n; ++i) z[i] = std::polar(2.0 * rng.uniform01(), 6.28 * rng.uniform01());
    const Eigen::VectorXd w = random_weights(rng, n);
    const double tau = 0.5 + rng.uniform01();
    const Eigen::VectorXcd p = project_weighted_l1_ball<std::complex<double>>(z, w, tau);
    const Eigen::VectorXd pr = project_weighted_l1_ball<double>(z.cwiseAbs(), w, tau);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(std::abs(p[i]) - pr[i]) < 1e-12);
      if (std::abs(p[i]) > 1e-14) {
        const auto phase = p[i] / z[i];
        CHECK(phase.imag() == doctest::Approx(0.0));
        CHECK(phase.real() > 0.0);
      }
    }
  }
}

TEST_CASE("weighted lasso") {
  Eigen::VectorXd w(2);
  w << 1.0, 1.0;
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1.0, 0.0;
    const auto r0 = solve_weighted_lasso<double>(A, y, w, 0.0);
    CHECK(r0.z.isZero());
    const auto r = solve_weighted_lasso<double>(A, y, w, 0.5);
    CHECK(r.z[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(r.z[1]) < 1e-9);
  }
  {
    // orthonormal columns with a radius beyond the least-squares mass
    RngStream rng(12);
    const Eigen::MatrixXd M = random_mat(rng, 12, 6);
    const Eigen::MatrixXd Q = Eigen::HouseholderQR<Eigen::MatrixXd>(M).householderQ() *
                              Eigen::MatrixXd::Identity(12, 6);
    const Eigen::VectorXd y = random_vec(rng, 12);
    const Eigen::VectorXd wls = random_weights(rng, 6);
    const Eigen::VectorXd zls = Q.transpose() * y;
    const double tau = wls.dot(zls.cwiseAbs()) * 1.05;
    const auto r = solve_weighted_lasso<double>(Q, y, wls, tau);
    CHECK((r.z - zls).norm() < 1e-5);
  }
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1.0, 0.0;
    SolverConfig tight;
    tight.max_iterations = 1;
    const auto r = solve_weighted_lasso<double>(A, y, w, 0.5, tight);
    CHECK(r.status == SolveStatus::IterationLimit);
  }
}

TEST_CASE("bpdn point examples") {
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd y(2);
    y << 1.0, 0.0;
    BPDNProblem<double> p{A, y, Eigen::VectorXd::Ones(2), 0.0};
    const auto r = solve_bpdn(p);
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(std::abs(r.z[0] - 1.0) < 1e-7);
    CHECK(std::abs(r.z[1]) < 1e-7);
  }
  {
    Eigen::MatrixXd A(1, 2);
    A << 1.0, 1.0;
    Eigen::VectorXd y(1);
    y << 1.0;
    Eigen::VectorXd w(2);
    w << 1.0, 2.0;
    BPDNProblem<double> p{A, y, w, 0.0};
    const auto r = solve_bpdn(p);
    CHECK(std::abs(r.z[0] - 1.0) < 1e-6);
    CHECK(std::abs(r.z[1]) < 1e-6);
  }
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd y(3);
    y << 0.01, 0.0, 0.0;
    BPDNProblem<double> p{A, y, Eigen::VectorXd::Ones(3), 0.5};
    const auto r = solve_bpdn(p);
    CHECK(r.z.isZero());
    CHECK(r.status == SolveStatus::Optimal);
    CHECK(kkt_residual(p, r.z) == doctest::Approx(0.0));
  }
}

TEST_CASE("bpdn matches the enumeration oracle") {
  RngStream rng(777);
  int solved = 0;
  for (int t = 0; t < 24; ++t) {
    const int N = 6 + static_cast<int>(rng.uniform01() * 7);
    const int m = 4 + static_cast<int>(rng.uniform01() * 5);
    const double eta = (t % 2 == 0) ? 0.0 : 0.1;
    const Eigen::MatrixXd A = random_mat(rng, m, N);
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(N);
    const int k = 1 + static_cast<int>(rng.uniform01() * std::min(3, m - 1));
    for (int i = 0; i < k; ++i)
      x0[static_cast<int>(rng.uniform01() * N)] = rng.normal();
    Eigen::VectorXd y = A * x0;
    if (eta > 0.0) y += random_vec(rng, m, 0.02);
    if (y.norm() <= eta) continue;
    const Eigen::VectorXd w = random_weights(rng, N);

    BPDNProblem<double> p{A, y, w, eta};
    const auto got = solve_bpdn(p);
    const auto want = testutil::bpdn_enumeration(A, y, w, eta);
    REQUIRE(want.found);
    CHECK(got.weighted_l1 == doctest::Approx(want.objective).epsilon(1e-5));
    CHECK(kkt_residual(p, got.z) < 1e-6);
    ++solved;
  }
  CHECK(solved >= 20);
}

TEST_CASE("kkt residual flags perturbed solutions") {
  RngStream rng(4242);
  const Eigen::MatrixXd A = random_mat(rng, 6, 10);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(10);
  x0[2] = 1.3;
  x0[7] = -0.8;
  const Eigen::VectorXd y = A * x0;
  BPDNProblem<double> p{A, y, random_weights(rng, 10), 0.0};
  const auto r = solve_bpdn(p);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(kkt_residual(p, r.z) < 1e-6);

  Eigen::VectorXd bumped = r.z;
  bumped[2] *= 1.05;
  CHECK(kkt_residual(p, bumped) > 1e-3);
  Eigen::VectorXd off = r.z;
  off[0] += 0.05;
  CHECK(kkt_residual(p, off) > 1e-3);
}

TEST_CASE("scaling equivariance") {
  RngStream rng(31);
  const Eigen::MatrixXd A = random_mat(rng, 5, 9);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(9);
  x0[1] = 1.0;
  x0[4] = -2.0;
  const Eigen::VectorXd y = A * x0 + random_vec(rng, 5, 0.01);
  const Eigen::VectorXd w = random_weights(rng, 9);
  const double eta = 0.05;
  const auto r1 = solve_bpdn<double>({A, y, w, eta});
  const double c = 7.5;
  const auto r2 = solve_bpdn<double>({c * A, c * y, w, c * eta});
  CHECK((r1.z - r2.z).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("pareto path residuals decrease") {
  RngStream rng(55);
  const Eigen::MatrixXd A = random_mat(rng, 8, 20);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(20);
  x0[3] = 1.0;
  x0[11] = 0.5;
  x0[17] = -1.5;
  const Eigen::VectorXd y = A * x0;
  const auto r = solve_bpdn<double>({A, y, Eigen::VectorXd::Ones(20), 0.0});
  REQUIRE(r.pareto_path.size() >= 2);
  for (std::size_t i = 1; i < r.pareto_path.size(); ++i) {
    CHECK(r.pareto_path[i].first >= r.pareto_path[i - 1].first - 1e-12);
    CHECK(r.pareto_path[i].second <= r.pareto_path[i - 1].second + 1e-9);
  }
  CHECK(r.status == SolveStatus::Optimal);
}

TEST_CASE("complex bpdn recovers a sparse spectrum") {
  RngStream rng(808);
  const int m = 12, N = 24;
  Eigen::MatrixXcd A(m, N);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < N; ++j)
      A(i, j) = std::polar(1.0 / std::sqrt(double(m)), 6.283185307 * rng.uniform01());
  Eigen::VectorXcd x0 = Eigen::VectorXcd::Zero(N);
  x0[5] = std::polar(1.0, 0.7);
  x0[16] = std::polar(0.5, -1.2);
  const Eigen::VectorXcd y = A * x0;
  BPDNProblem<std::complex<double>> p{A, y, Eigen::VectorXd::Ones(N), 1e-12};
  const auto r = solve_bpdn(p);
  CHECK(r.status == SolveStatus::Optimal);
  CHECK((r.z - x0).norm() < 1e-6);
  CHECK(kkt_residual(p, r.z) < 1e-6);
}

TEST_CASE("infeasible targets are reported") {
  {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 4);
    Eigen::VectorXd y(3);
    y << 1.0, 0.0, 0.0;
    const auto r = solve_bpdn<double>({A, y, Eigen::VectorXd::Ones(4), 0.1});
    CHECK(r.status == SolveStatus::Infeasible);
  }
  {
    // overdetermined and inconsistent: the residual floor sits above eta
    RngStream rng(17);
    const Eigen::MatrixXd A = random_mat(rng, 8, 2);
    const Eigen::VectorXd y = random_vec(rng, 8);
    const auto r = solve_bpdn<double>({A, y, Eigen::VectorXd::Ones(2), 1e-12});
    CHECK(r.status == SolveStatus::Infeasible);
    const double floor = (y - A * (A.colPivHouseholderQr().solve(y))).norm();
    CHECK(r.residual_norm < 1.5 * floor + 1e-9);
  }
}

TEST_CASE("solver trace stream") {
  RngStream rng(3);
  const Eigen::MatrixXd A = random_mat(rng, 4, 8);
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(8);
  x0[2] = 1.0;
  const Eigen::VectorXd y = A * x0;
  SolverConfig cfg;
  cfg.trace_path = "trace_test.csv";
  const auto r = solve_bpdn<double>({A, y, Eigen::VectorXd::Ones(8), 0.0}, cfg);
  CHECK(r.status == SolveStatus::Optimal);
  std::ifstream in("trace_test.csv");
  REQUIRE(in.good());
  std::string header;
  std::getline(in, header);
  CHECK(header == "iteration,tau,residual,objective");
  int lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == r.iterations);
  in.close();
  std::remove("trace_test.csv");
}

TEST_CASE("bpdn argument validation") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 1.0, 0.0;
  Eigen::VectorXd bad_w(2);
  bad_w << 0.5, 1.0;
  CHECK_THROWS_AS(solve_bpdn<double>({A, y, bad_w, 0.0}), std::domain_error);
  CHECK_THROWS_AS(solve_bpdn<double>({A, y, Eigen::VectorXd::Ones(2), -1.0}), std::domain_error);
  CHECK_THROWS_AS(solve_bpdn<double>({A, Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(2), 0.0}),
                  std::invalid_argument);
}
