#include "polygrad/validation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

#include "polygrad/measurement.hpp"
#include "polygrad/quadrature.hpp"
#include "polygrad/recovery.hpp"
#include "polygrad/solver.hpp"

namespace polygrad {

namespace {

using Checks = std::vector<CheckResult>;

void add(Checks& out, const std::string& suite, const std::string& name, double measured,
         double threshold) {
  out.push_back({suite, name, measured, threshold, measured <= threshold});
}

double integrate_jacobi(const BasisFamily& f, double da, double db, int npts,
                        const std::function<double(double)>& g) {
  const auto rule = gauss_jacobi(npts, f.alpha + da, f.beta + db);
  double acc = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) acc += rule.weights[i] * g(rule.nodes[i]);
  return acc / jacobi_weight_mass(f.alpha, f.beta);
}

Checks suite_orthonormality() {
  Checks out;
  for (const auto& f :
       {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.0)}) {
    double worst = 0.0;
    for (int n = 0; n <= 20; ++n)
      for (int m = n; m <= 20; ++m) {
        const double ip = integrate_jacobi(
            f, 0.0, 0.0, 24, [&](double y) { return eval_basis(f, n, y) * eval_basis(f, m, y); });
        worst = std::max(worst, std::abs(ip - (n == m ? 1.0 : 0.0)));
      }
    add(out, "orthonormality", f.name() + " value products", worst, 1e-8);
  }
  return out;
}

Checks suite_sobolev() {
  Checks out;
  for (const double a : {-0.5, 0.0, 1.0}) {
    for (const double b : {-0.5, 0.0, 1.0}) {
      const auto f = BasisFamily::jacobi(a, b);
      double worst = 0.0;
      for (int n = 0; n <= 20; ++n)
        for (int m = n; m <= 20; ++m) {
          const double ip = integrate_jacobi(f, 1.0, 1.0, 24, [&](double y) {
            return eval_basis_deriv(f, n, y) * eval_basis_deriv(f, m, y);
          });
          const double want = n == m ? eigenvalue(f, n) : 0.0;
          worst = std::max(worst, std::abs(ip - want));
        }
      add(out, "sobolev", f.name() + " derivative products", worst, 1e-6);
    }
  }
  return out;
}

Checks suite_reflection() {
  Checks out;
  struct P {
    double a, b;
  };
  for (const auto [a, b] : {P{1.0, 0.0}, P{1.0, -0.5}, P{0.0, -0.5}}) {
    double worst = 0.0;
    for (int n = 0; n <= 15; ++n)
      for (int g = 0; g <= 1000; ++g) {
        const double y = -1.0 + 2.0 * g / 1000.0;
        const double lhs = jacobi_poly(n, a, b, y);
        const double rhs = (n % 2 ? -1.0 : 1.0) * jacobi_poly(n, b, a, -y);
        worst = std::max(worst, std::abs(lhs - rhs));
      }
    char label[64];
    std::snprintf(label, sizeof(label), "(%g,%g) vs (%g,%g)", a, b, b, a);
    add(out, "reflection", label, worst, 1e-12);
  }
  return out;
}

Checks suite_supnorm() {
  Checks out;
  struct P {
    double a, b;
  };
  for (const auto [a, b] : {P{0.0, 0.0}, P{-0.5, -0.5}, P{1.0, 0.0}, P{1.0, 1.0}}) {
    const double q = std::max(a, b);
    double worst = 0.0;
    for (int n = 0; n <= 20; ++n) {
      double sup = 0.0;
      for (int g = 0; g <= 2000; ++g)
        sup = std::max(sup, std::abs(jacobi_poly(n, a, b, -1.0 + 2.0 * g / 2000.0)));
      const double want =
          std::exp(std::lgamma(n + q + 1.0) - std::lgamma(q + 1.0) - std::lgamma(n + 1.0));
      worst = std::max(worst, std::abs(sup - want));
    }
    char label[48];
    std::snprintf(label, sizeof(label), "(%g,%g) endpoint growth", a, b);
    add(out, "supnorm", label, worst, 1e-8);
  }
  return out;
}

Checks suite_derivative() {
  Checks out;
  for (const auto& f :
       {BasisFamily::legendre(), BasisFamily::chebyshev(), BasisFamily::jacobi(1.0, 0.0)}) {
    double worst = 0.0;
    for (int n = 0; n <= 20; ++n) {
      for (double y : {-0.85, -0.4, 0.05, 0.5, 0.9}) {
        const double h0 = 1e-3;
        double table[4][4];
        for (int i = 0; i < 4; ++i) {
          const double h = h0 / (1 << i);
          table[i][0] = (eval_basis(f, n, y + h) - eval_basis(f, n, y - h)) / (2.0 * h);
          double p4 = 4.0;
          for (int j = 1; j <= i; ++j) {
            table[i][j] = (p4 * table[i][j - 1] - table[i - 1][j - 1]) / (p4 - 1.0);
            p4 *= 4.0;
          }
        }
        const double fd = table[3][3];
        const double got = eval_basis_deriv(f, n, y);
        const double denom = std::max(1.0, std::abs(fd));
        worst = std::max(worst, std::abs(got - fd) / denom);
      }
    }
    add(out, "derivative", f.name() + " vs Richardson differences", worst, 1e-6);
  }
  return out;
}

Checks suite_index_sets() {
  Checks out;
  add(out, "index-sets", "cross(2,3) cardinality", std::abs(hyperbolic_cross(2, 3).size() - 8.0),
      0.5);
  double lower_fail = 0.0;
  for (int d = 1; d <= 4; ++d)
    for (int s = 1; s <= 8; ++s)
      if (!is_lower(hyperbolic_cross(d, s))) lower_fail += 1.0;
  add(out, "index-sets", "crosses are lower sets", lower_fail, 0.5);

  const Density ml = Density::matching(BasisFamily::legendre());
  const Density mc = Density::matching(BasisFamily::chebyshev());
  add(out, "index-sets", "K(2) exact chebyshev vs 3",
      std::abs(K_of_s(BasisFamily::chebyshev(), mc, 2, 2, KMode::Exact) - 3.0), 1e-8);
  add(out, "index-sets", "K(2) exact legendre vs 4",
      std::abs(K_of_s(BasisFamily::legendre(), ml, 2, 2, KMode::Exact) - 4.0), 1e-8);
  double bound_gap = 0.0;
  for (int s = 2; s <= 8; ++s) {
    bound_gap = std::max(bound_gap, K_of_s(BasisFamily::chebyshev(), mc, 3, s, KMode::Exact) -
                                        K_of_s(BasisFamily::chebyshev(), mc, 3, s,
                                               KMode::PaperBound));
    bound_gap = std::max(bound_gap, K_of_s(BasisFamily::legendre(), ml, 3, s, KMode::Exact) -
                                        K_of_s(BasisFamily::legendre(), ml, 3, s,
                                               KMode::PaperBound));
  }
  add(out, "index-sets", "exact K below closed-form bound", bound_gap, 1e-9);
  return out;
}

Checks suite_kappa_lambda() {
  Checks out;
  for (const double a : {-0.5, 0.0, 1.0}) {
    for (const double b : {-0.5, 0.0, 1.0}) {
      const auto f = BasisFamily::jacobi(a, b);
      WeightEngine eng(f, Density::matching(f));
      double worst = 0.0, first = 0.0, last = 0.0;
      for (int n = 1; n <= 50; ++n) {
        const double r = eng.kappa1(n) / std::max(eigenvalue(f, n), 1.0);
        worst = std::max(worst, r);
        if (n <= 10) first += r / 10.0;
        if (n > 40) last += r / 10.0;
      }
      char label[64];
      std::snprintf(label, sizeof(label), "(%g,%g) ratio bound", a, b);
      add(out, "kappa-lambda", label, worst, 5.0);
      std::snprintf(label, sizeof(label), "(%g,%g) growth trend", a, b);
      add(out, "kappa-lambda", label, last, 1.1 * first);
    }
  }
  return out;
}

Checks suite_isotropy() {
  Checks out;
  const auto leg = BasisFamily::legendre();
  const auto rep = isotropy_deviation(leg, Density::matching(leg), hyperbolic_cross(2, 3),
                                      SamplingMode::full_gradient(), 20000, 12345);
  add(out, "isotropy", "legendre cross(2,3) max entry at m=20000", rep.max_entry, 0.1);
  const auto f0 = isotropy_deviation(BasisFamily::fourier(), Density::uniform(),
                                     IndexSet(1, {{0}}), SamplingMode::unaugmented(), 100, 3);
  add(out, "isotropy", "constant fourier mode exact", f0.max_entry, 1e-14);
  return out;
}

Checks suite_projection() {
  Checks out;
  RngStream rng(808017);
  double worst = 0.0, idem = 0.0;
  for (int t = 0; t < 100; ++t) {
    const int n = 1 + static_cast<int>(rng.uniform01() * 10);
    Eigen::VectorXd z(n), w(n);
    for (int i = 0; i < n; ++i) {
      z[i] = 2.0 * rng.normal();
      w[i] = 1.0 + 2.0 * rng.uniform01();
    }
    const double tau = 0.2 + 2.0 * rng.uniform01();
    const Eigen::VectorXd p = project_weighted_l1_ball<double>(z, w, tau);
    idem = std::max(idem,
                    (project_weighted_l1_ball<double>(p, w, tau) - p).cwiseAbs().maxCoeff());
    // exact threshold via bisection
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += w[i] * std::abs(z[i]);
    if (total > tau) {
      double lo = 0.0, hi = z.cwiseAbs().cwiseQuotient(w).maxCoeff();
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double mass = 0.0;
        for (int i = 0; i < n; ++i) mass += w[i] * std::max(std::abs(z[i]) - mid * w[i], 0.0);
        (mass > tau ? lo : hi) = mid;
      }
      Eigen::VectorXd want(n);
      for (int i = 0; i < n; ++i) {
        const double m = std::max(std::abs(z[i]) - 0.5 * (lo + hi) * w[i], 0.0);
        want[i] = z[i] >= 0 ? m : -m;
      }
      worst = std::max(worst, (p - want).cwiseAbs().maxCoeff());
    }
  }
  add(out, "projection", "against bisection threshold", worst, 1e-9);
  add(out, "projection", "idempotence", idem, 0.0);
  return out;
}

Checks suite_solver_oracle() {
  Checks out;
  RngStream rng(5551212);
  double obj_gap = 0.0, kkt_worst = 0.0;
  int instances = 0;
  while (instances < 50) {
    const int N = 6 + static_cast<int>(rng.uniform01() * 7);
    const int m = 4 + static_cast<int>(rng.uniform01() * 5);
    const double eta = (instances % 2 == 0) ? 0.0 : 0.1;
    Eigen::MatrixXd A(m, N);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < N; ++j) A(i, j) = rng.normal();
    Eigen::VectorXd x0 = Eigen::VectorXd::Zero(N);
    const int k = 1 + static_cast<int>(rng.uniform01() * std::min(3, m - 1));
    for (int i = 0; i < k; ++i) x0[static_cast<int>(rng.uniform01() * N)] = rng.normal();
    Eigen::VectorXd y = A * x0;
    if (eta > 0.0)
      for (int i = 0; i < m; ++i) y[i] += 0.02 * rng.normal();
    if (y.norm() <= eta) continue;
    Eigen::VectorXd w(N);
    for (int i = 0; i < N; ++i) w[i] = 1.0 + 2.0 * rng.uniform01();

    BPDNProblem<double> p{A, y, w, eta};
    const auto got = solve_bpdn(p);
    kkt_worst = std::max(kkt_worst, kkt_residual(p, got.z));

    // enumeration lower bound over supports with stationarity per sign
    // pattern (equality-constrained least squares)
    double best = -1.0;
    const int kmax = std::min(m, N);
    for (long mask = 1; mask < (1L << N); ++mask) {
      if (__builtin_popcountl(mask) > kmax) continue;
      std::vector<int> S;
      for (int i = 0; i < N; ++i)
        if (mask & (1L << i)) S.push_back(i);
      Eigen::MatrixXd As(m, static_cast<int>(S.size()));
      Eigen::VectorXd ws(static_cast<int>(S.size()));
      for (std::size_t t = 0; t < S.size(); ++t) {
        As.col(static_cast<int>(t)) = A.col(S[t]);
        ws[static_cast<int>(t)] = w[S[t]];
      }
      const Eigen::MatrixXd G = As.transpose() * As;
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
      if (!lu.isInvertible()) continue;
      const Eigen::VectorXd zls = lu.solve(As.transpose() * y);
      const double rls = (y - As * zls).norm();
      auto consider = [&](const Eigen::VectorXd& zS) {
        Eigen::VectorXd z = Eigen::VectorXd::Zero(N);
        for (std::size_t t = 0; t < S.size(); ++t) z[S[t]] = zS[t];
        if ((y - A * z).norm() > eta * (1.0 + 1e-9) + 1e-11) return;
        double obj = 0.0;
        for (int i = 0; i < N; ++i) obj += w[i] * std::abs(z[i]);
        if (best < 0.0 || obj < best) best = obj;
      };
      if (eta <= 1e-12) {
        if (rls <= 1e-9 * std::max(1.0, y.norm())) consider(zls);
        continue;
      }
      if (rls > eta) continue;
      const int sz = static_cast<int>(S.size());
      for (long smask = 0; smask < (1L << sz); ++smask) {
        Eigen::VectorXd sigma(sz);
        for (int t = 0; t < sz; ++t) sigma[t] = (smask & (1L << t)) ? -1.0 : 1.0;
        const Eigen::VectorXd u = lu.solve((ws.array() * sigma.array()).matrix());
        const double hn2 = (As * u).squaredNorm();
        if (hn2 <= 0.0) continue;
        const double lam = std::sqrt(std::max(eta * eta - rls * rls, 0.0) / hn2);
        const Eigen::VectorXd zS = zls - lam * u;
        bool ok = true;
        for (int t = 0; t < sz; ++t)
          if (sigma[t] * zS[t] < -1e-12) ok = false;
        if (ok) consider(zS);
      }
    }
    if (best >= 0.0) obj_gap = std::max(obj_gap, std::abs(got.weighted_l1 - best));
    ++instances;
  }
  add(out, "solver-oracle", "objective vs support enumeration (50 instances)", obj_gap, 1e-5);
  add(out, "solver-oracle", "worst optimality certificate", kkt_worst, 1e-6);
  return out;
}

Checks suite_parseval() {
  Checks out;
  for (const auto& fam : {BasisFamily::legendre(), BasisFamily::chebyshev()}) {
    const Density mu = Density::matching(fam);
    const IndexSet lambda = hyperbolic_cross(2, 3);
    RngStream rng(fam.is_legendre() ? 11 : 22);
    RealApproximant g;
    g.family = fam;
    g.lambda = lambda;
    g.coefficients.resize(lambda.size());
    for (int i = 0; i < lambda.size(); ++i) g.coefficients[i] = rng.normal();
    double want = 0.0;
    for (int i = 0; i < lambda.size(); ++i) {
      double lam = 0.0;
      for (int v : lambda[i]) lam += eigenvalue(fam, v);
      want += (1.0 + lam) * g.coefficients[i] * g.coefficients[i];
    }
    want = std::sqrt(want);
    FunctionOracle zero;
    zero.dim = 2;
    zero.value = [](const Eigen::VectorXd&) { return 0.0; };
    zero.gradient = [](const Eigen::VectorXd& y) {
      return Eigen::VectorXd::Zero(y.size()).eval();
    };
    const auto est = h1_error(zero, g, mu, 100000, 999);
    add(out, "parseval", fam.name() + " norm identity (3 sigma units)",
        std::abs(est.value - want), 3.0 * est.std_error);
  }
  return out;
}

const std::map<std::string, Checks (*)()>& registry() {
  static const std::map<std::string, Checks (*)()> reg = {
      {"orthonormality", suite_orthonormality},
      {"sobolev", suite_sobolev},
      {"reflection", suite_reflection},
      {"supnorm", suite_supnorm},
      {"derivative", suite_derivative},
      {"index-sets", suite_index_sets},
      {"kappa-lambda", suite_kappa_lambda},
      {"isotropy", suite_isotropy},
      {"projection", suite_projection},
      {"solver-oracle", suite_solver_oracle},
      {"parseval", suite_parseval},
  };
  return reg;
}

}  // namespace

std::vector<std::string> validation_suites() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

std::vector<CheckResult> run_validation_suite(const std::string& name) {
  if (name == "all") {
    Checks all;
    for (const auto& [n, fn] : registry()) {
      const auto part = fn();
      all.insert(all.end(), part.begin(), part.end());
    }
    return all;
  }
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown validation suite: " + name);
  return it->second();
}

}  // namespace polygrad
