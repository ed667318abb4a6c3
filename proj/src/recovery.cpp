#include "polygrad/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "polygrad/tensor_eval.hpp"

namespace polygrad {

std::string to_string(TestFunction f) {
  switch (f) {
    case TestFunction::F1:
      return "f1";
    case TestFunction::F2:
      return "f2";
    case TestFunction::F3:
      return "f3";
  }
  return "?";
}

TestFunction test_function_from_name(const std::string& name) {
  if (name == "f1") return TestFunction::F1;
  if (name == "f2") return TestFunction::F2;
  if (name == "f3") return TestFunction::F3;
  throw std::invalid_argument("unknown test function: " + name);
}

namespace {

void validate_gradient(const FunctionOracle& o) {
  RngStream rng(20240229);
  const double h = 1e-5;
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd y(o.dim);
    for (int j = 0; j < o.dim; ++j) y[j] = 0.9 * rng.uniform_sym();
    const Eigen::VectorXd g = o.gradient(y);
    for (int k = 0; k < o.dim; ++k) {
      Eigen::VectorXd yp = y, ym = y;
      yp[k] += h;
      ym[k] -= h;
      const double fd = (o.value(yp) - o.value(ym)) / (2.0 * h);
      if (std::abs(fd - g[k]) > 1e-5 * std::max(1.0, std::abs(g[k])))
        throw std::logic_error("oracle gradient disagrees with finite differences");
    }
  }
}

}  // namespace

FunctionOracle test_function(TestFunction id, int d) {
  if (d < 1) throw std::domain_error("test_function: d >= 1 required");
  FunctionOracle o;
  o.dim = d;
  switch (id) {
    case TestFunction::F1: {
      // product of rational peaks centred at a_j = (-1)^j / (j+1)
      const double c = d / 4.0;
      Eigen::VectorXd a(d);
      for (int j = 0; j < d; ++j) a[j] = ((j + 1) % 2 == 0 ? 1.0 : -1.0) / (j + 2.0);
      o.value = [c, a](const Eigen::VectorXd& y) {
        double v = 1.0;
        for (int j = 0; j < y.size(); ++j) v *= c / (c + (y[j] - a[j]) * (y[j] - a[j]));
        return v;
      };
      o.gradient = [c, a, val = o.value](const Eigen::VectorXd& y) {
        const double f = val(y);
        Eigen::VectorXd g(y.size());
        for (int k = 0; k < y.size(); ++k)
          g[k] = f * (-2.0 * (y[k] - a[k])) / (c + (y[k] - a[k]) * (y[k] - a[k]));
        return g;
      };
      break;
    }
    case TestFunction::F2: {
      if (d % 2 != 0) throw std::domain_error("this target needs an even dimension");
      // rational factors on the first half, oscillatory on the second
      const auto factor = [d](int j, double yj) {
        if (j < d / 2) return 1.0 / (1.0 - yj / std::pow(4.0, j + 1));
        return std::cos(16.0 * yj / std::pow(2.0, j + 1));
      };
      const auto dfactor = [d](int j, double yj) {
        if (j < d / 2) {
          const double den = 1.0 - yj / std::pow(4.0, j + 1);
          return 1.0 / (std::pow(4.0, j + 1) * den * den);
        }
        const double c = 16.0 / std::pow(2.0, j + 1);
        return -c * std::sin(c * yj);
      };
      o.value = [factor, d](const Eigen::VectorXd& y) {
        double v = 1.0;
        for (int j = 0; j < d; ++j) v *= factor(j, y[j]);
        return v;
      };
      o.gradient = [factor, dfactor, d](const Eigen::VectorXd& y) {
        Eigen::VectorXd g(d);
        for (int k = 0; k < d; ++k) {
          double v = dfactor(k, y[k]);
          for (int j = 0; j < d; ++j)
            if (j != k) v *= factor(j, y[j]);
          g[k] = v;
        }
        return g;
      };
      break;
    }
    case TestFunction::F3: {
      const double c = 1.0 / (2.0 * d);
      o.value = [c](const Eigen::VectorXd& y) { return std::exp(-c * y.sum()); };
      o.gradient = [c, val = o.value](const Eigen::VectorXd& y) {
        return (-c * val(y) * Eigen::VectorXd::Ones(y.size())).eval();
      };
      break;
    }
  }
  o.analytic_gradient = true;
  validate_gradient(o);
  return o;
}

template <class Scalar>
Scalar Approximant<Scalar>::value(const Eigen::VectorXd& y) const {
  TensorBasisTables<Scalar> tables(family, lambda);
  tables.at(y);
  Scalar acc(0);
  for (int j = 0; j < lambda.size(); ++j) acc += coefficients[j] * tables.value(lambda[j]);
  return acc;
}

template <class Scalar>
Scalar Approximant<Scalar>::partial(int k, const Eigen::VectorXd& y) const {
  TensorBasisTables<Scalar> tables(family, lambda);
  tables.at(y);
  Scalar acc(0);
  for (int j = 0; j < lambda.size(); ++j) acc += coefficients[j] * tables.dk(k, lambda[j]);
  return acc;
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> Approximant<Scalar>::gradient(
    const Eigen::VectorXd& y) const {
  TensorBasisTables<Scalar> tables(family, lambda);
  tables.at(y);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(lambda.dim());
  for (int k = 1; k <= lambda.dim(); ++k) {
    Scalar acc(0);
    for (int j = 0; j < lambda.size(); ++j) acc += coefficients[j] * tables.dk(k, lambda[j]);
    g[k - 1] = acc;
  }
  return g;
}

template struct Approximant<double>;
template struct Approximant<std::complex<double>>;

std::pair<RealApproximant, RecoveryDiagnostics> recover(const FunctionOracle& oracle,
                                                        const BasisFamily& family,
                                                        const Density& mu, int d, int s, int m,
                                                        const SamplingMode& mode, double theta,
                                                        double eta, std::uint64_t seed,
                                                        const RecoveryOptions& opts) {
  if (s < 1 || m < 1) throw std::domain_error("recover: s >= 1 and m >= 1 required");
  const IndexSet lambda = hyperbolic_cross(d, s);

  WeightEngine eng(family, mu);
  Eigen::VectorXd w(lambda.size());
  for (int j = 0; j < lambda.size(); ++j)
    w[j] = std::max(std::pow(eng.u(lambda[j]), theta), 1.0);

  const SampleSet pts = sample_points(mu, d, m, seed);
  const auto ensemble =
      assemble(family, mu, lambda, pts, oracle.value, oracle.gradient, mode, opts.limits);

  BPDNProblem<double> problem{ensemble.A, ensemble.rhs, w, eta};
  const auto sol = solve_bpdn(problem, opts.solver);

  RealApproximant approx;
  approx.family = family;
  approx.lambda = lambda;
  approx.coefficients = sol.z.cwiseQuotient(ensemble.q);

  RecoveryDiagnostics diag;
  diag.m = ensemble.m;
  diag.m_o = ensemble.m_o;
  diag.m_g = ensemble.m_g;
  diag.status = sol.status;
  diag.iterations = sol.iterations;
  diag.residual_norm = sol.residual_norm;
  return {std::move(approx), diag};
}

std::pair<ComplexApproximant, RecoveryDiagnostics> recover_fourier(
    const FunctionOracle& oracle, const Density& mu, int d, int s, int m,
    const SamplingMode& mode, double eta, std::uint64_t seed, const RecoveryOptions& opts) {
  if (s < 1 || m < 1) throw std::domain_error("recover: s >= 1 and m >= 1 required");
  const IndexSet lambda = hyperbolic_cross(d, s);

  ComplexOracle f = [&](const Eigen::VectorXd& y) {
    return std::complex<double>(oracle.value(y), 0.0);
  };
  ComplexGradientOracle g = [&](const Eigen::VectorXd& y) {
    return oracle.gradient(y).cast<std::complex<double>>().eval();
  };
  const SampleSet pts = sample_points(mu, d, m, seed);
  const auto ensemble = assemble_fourier(mu, lambda, pts, f, g, mode, opts.limits);

  // the Fourier basis is uniformly bounded, so the intrinsic weights are one
  BPDNProblem<std::complex<double>> problem{ensemble.A, ensemble.rhs,
                                            Eigen::VectorXd::Ones(lambda.size()), eta};
  const auto sol = solve_bpdn(problem, opts.solver);

  ComplexApproximant approx;
  approx.family = BasisFamily::fourier();
  approx.lambda = lambda;
  approx.coefficients = sol.z.cwiseQuotient(ensemble.q.cast<std::complex<double>>());

  RecoveryDiagnostics diag;
  diag.m = ensemble.m;
  diag.m_o = ensemble.m_o;
  diag.m_g = ensemble.m_g;
  diag.status = sol.status;
  diag.iterations = sol.iterations;
  diag.residual_norm = sol.residual_norm;
  return {std::move(approx), diag};
}

ErrorEstimate h1_error(const FunctionOracle& oracle, const RealApproximant& approx,
                       const Density& mu, int grid_size, std::uint64_t seed) {
  if (grid_size < 1) throw std::domain_error("h1_error: grid size >= 1 required");
  const int d = approx.lambda.dim();
  RngStream rng = RngStream::derive(seed, "h1-grid");
  TensorBasisTables<double> tables(approx.family, approx.lambda);

  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    Eigen::VectorXd y(d);
    for (int j = 0; j < d; ++j) y[j] = mu.sample1(rng);
    tables.at(y);

    double sample = 0.0;
    for (int k = 0; k <= d; ++k) {
      double ak = 0.0;
      for (int j = 0; j < approx.lambda.size(); ++j)
        ak += approx.coefficients[j] * tables.dk(k, approx.lambda[j]);
      const double fk = k == 0 ? oracle.value(y) : oracle.gradient(y)[k - 1];
      const double diff = fk - ak;
      sample += tau_k(approx.family, mu, y, k) * diff * diff;
    }
    const double delta = sample - mean;
    mean += delta / (i + 1);
    m2 += delta * (sample - mean);
  }
  const double var = grid_size > 1 ? m2 / (grid_size - 1) : 0.0;
  const double se_mean = std::sqrt(var / grid_size);

  ErrorEstimate est;
  est.value = std::sqrt(std::max(mean, 0.0));
  est.std_error = est.value > 0.0 ? se_mean / (2.0 * est.value) : std::sqrt(se_mean);
  est.grid_size = grid_size;
  est.seed = seed;
  return est;
}

ErrorEstimate linf_error(const FunctionOracle& oracle, const RealApproximant& approx,
                         int grid_size, std::uint64_t seed) {
  if (grid_size < 1) throw std::domain_error("linf_error: grid size >= 1 required");
  const int d = approx.lambda.dim();
  RngStream rng = RngStream::derive(seed, "linf-grid");
  TensorBasisTables<double> tables(approx.family, approx.lambda);

  double sup = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    Eigen::VectorXd y(d);
    for (int j = 0; j < d; ++j) y[j] = rng.uniform_sym();
    tables.at(y);
    double a = 0.0;
    for (int j = 0; j < approx.lambda.size(); ++j)
      a += approx.coefficients[j] * tables.value(approx.lambda[j]);
    sup = std::max(sup, std::abs(oracle.value(y) - a));
  }
  ErrorEstimate est;
  est.value = sup;
  est.grid_size = grid_size;
  est.seed = seed;
  return est;
}

std::string to_string(ComplexitySetting s) {
  switch (s) {
    case ComplexitySetting::GradientAugmented:
      return "gradient-augmented";
    case ComplexitySetting::Unaugmented:
      return "unaugmented";
    case ComplexitySetting::JacobiClosedForm:
      return "jacobi-closed-form";
    case ComplexitySetting::LegendrePreconditioned:
      return "legendre-preconditioned";
    case ComplexitySetting::FourierCase:
      return "fourier";
  }
  return "?";
}

ComplexityBreakdown sample_complexity_estimate(const BasisFamily& family, const Density& mu,
                                               int d, int s, double eps,
                                               ComplexitySetting setting, KMode kmode,
                                               int fourier_N) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("eps must lie in (0,1)");
  if (d < 1 || s < 1) throw std::domain_error("d >= 1 and s >= 1 required");

  ComplexityBreakdown out;
  out.setting = setting;

  const auto hc_log = [&](double K) {
    return std::min(d + std::log(s / eps), std::log(2.0 * d) * std::log(s / eps)) +
           std::log(K) * std::log(K / eps);
  };

  switch (setting) {
    case ComplexitySetting::GradientAugmented: {
      out.k_factor = K_of_s(family, mu, d, s, kmode);
      const IndexSet lambda = hyperbolic_cross(d, s);
      WeightEngine eng(family, mu);
      double ratio = 0.0;
      for (const auto& n : lambda.indices()) {
        double lam = 0.0;
        for (int v : n) lam += eigenvalue(family, v);
        ratio = std::max(ratio, (1.0 + eng.kappa(n)) / (1.0 + lam));
      }
      out.ratio_factor = ratio;
      out.log_factor = hc_log(out.k_factor);
      break;
    }
    case ComplexitySetting::JacobiClosedForm: {
      if (family.kind != BasisKind::Jacobi)
        throw std::domain_error("this estimate applies to Jacobi families only");
      out.k_factor = K_of_s(family, mu, d, s, kmode);
      out.ratio_factor = 1.0;
      out.log_factor = hc_log(out.k_factor);
      break;
    }
    case ComplexitySetting::LegendrePreconditioned: {
      if (!family.is_legendre())
        throw std::domain_error("the preconditioned estimate applies to the Legendre family");
      out.k_factor = std::min(std::pow(2.0, d) * s,
                              std::pow(3.14159265358979323846 / 2.0, d) *
                                  std::pow(s, std::log(1.0 + 4.0 / 3.14159265358979323846) /
                                                  std::log(2.0)));
      out.ratio_factor = 1.0;
      out.log_factor = (d + std::log(static_cast<double>(s))) * (d + std::log(s / eps));
      break;
    }
    case ComplexitySetting::Unaugmented: {
      out.k_factor = K_of_s(family, mu, d, s, kmode);
      out.ratio_factor = 1.0;
      out.log_factor =
          std::log(1.0 / eps) *
          (std::min(std::log(2.0 * s) + d, std::log(2.0 * d) * std::log(2.0 * s)) +
           std::log(out.k_factor));
      break;
    }
    case ComplexitySetting::FourierCase: {
      const int N = fourier_N > 0 ? fourier_N : hyperbolic_cross(d, s).size();
      out.k_factor = s;
      out.ratio_factor = 1.0;
      out.log_factor = std::log(N / eps) + std::log(static_cast<double>(s)) * std::log(s / eps);
      break;
    }
  }
  out.m_estimate = out.ratio_factor * out.k_factor * out.log_factor;
  return out;
}

void write_approximant(std::ostream& os, const RealApproximant& a) {
  os << "d=" << a.lambda.dim() << "\n";
  os << "family=" << (a.family.is_fourier() ? "fourier" : "jacobi") << "\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "alpha=%.17g beta=%.17g", a.family.alpha, a.family.beta);
  os << buf << "\n";
  for (int i = 0; i < a.lambda.size(); ++i) {
    for (int k = 0; k < a.lambda.dim(); ++k) os << a.lambda[i][k] << ' ';
    std::snprintf(buf, sizeof(buf), "%.17g", a.coefficients[i]);
    os << buf << "\n";
  }
}

RealApproximant read_approximant(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d=", 0) != 0)
    throw std::runtime_error("approximant stream: missing d= header");
  const int d = std::stoi(line.substr(2));
  if (!std::getline(is, line) || line.rfind("family=", 0) != 0)
    throw std::runtime_error("approximant stream: missing family= header");
  const std::string fam = line.substr(7);
  if (fam == "fourier") throw std::runtime_error("approximant stream: complex payloads unsupported");
  if (!std::getline(is, line) || line.rfind("alpha=", 0) != 0)
    throw std::runtime_error("approximant stream: missing parameter header");
  double alpha = 0.0, beta = 0.0;
  {
    std::istringstream ls(line);
    std::string ta, tb;
    ls >> ta >> tb;
    alpha = std::stod(ta.substr(6));
    beta = std::stod(tb.substr(5));
  }

  std::vector<MultiIndex> indices;
  std::vector<double> coeffs;
  while (std::getline(is, line)) {
    if (line.empty()) break;
    std::istringstream ls(line);
    MultiIndex n(d);
    for (int k = 0; k < d; ++k)
      if (!(ls >> n[k])) throw std::runtime_error("approximant stream: short row");
    double c;
    if (!(ls >> c)) throw std::runtime_error("approximant stream: missing coefficient");
    indices.push_back(std::move(n));
    coeffs.push_back(c);
  }

  RealApproximant a;
  a.family = BasisFamily::jacobi(alpha, beta);
  a.lambda = IndexSet(d, indices);
  a.coefficients.resize(a.lambda.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto pos = a.lambda.find(indices[i]);
    a.coefficients[*pos] = coeffs[i];
  }
  return a;
}

}  // namespace polygrad
