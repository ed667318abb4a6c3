#pragma once

#include <iosfwd>
#include <utility>

#include "polygrad/measurement.hpp"
#include "polygrad/solver.hpp"

namespace polygrad {

enum class TestFunction { F1, F2, F3 };
std::string to_string(TestFunction f);
TestFunction test_function_from_name(const std::string& name);

// Value and gradient closures for a target function on (-1,1)^d.
struct FunctionOracle {
  int dim = 0;
  RealOracle value;
  RealGradientOracle gradient;
  bool analytic_gradient = true;
};

// Built-in benchmark targets: a product of rational peaks, a mixed
// cosine/rational product (even d only), and a separable exponential.
// Gradients are checked against finite differences at construction.
FunctionOracle test_function(TestFunction id, int d);

// Recovered expansion: coefficients aligned with the index set order,
// evaluable together with all first partials.
template <class Scalar>
struct Approximant {
  BasisFamily family;
  IndexSet lambda;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> coefficients;

  Scalar value(const Eigen::VectorXd& y) const;
  Scalar partial(int k, const Eigen::VectorXd& y) const;  // k in 1..d
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> gradient(const Eigen::VectorXd& y) const;
};

using RealApproximant = Approximant<double>;
using ComplexApproximant = Approximant<std::complex<double>>;

struct RecoveryDiagnostics {
  int m = 0;
  int m_o = 0;
  int m_g = 0;
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  double residual_norm = 0.0;
  int cost() const { return m_o + m_g; }
};

struct RecoveryOptions {
  SolverConfig solver;
  AssembleLimits limits;
};

// Full pipeline on the degree-s hyperbolic cross: draw points, form the
// scaled system for the requested sampling mode, solve the weighted problem
// with weights max(u^theta, 1), and unscale the coefficients.
std::pair<RealApproximant, RecoveryDiagnostics> recover(const FunctionOracle& oracle,
                                                        const BasisFamily& family,
                                                        const Density& mu, int d, int s, int m,
                                                        const SamplingMode& mode, double theta,
                                                        double eta, std::uint64_t seed,
                                                        const RecoveryOptions& opts = {});

std::pair<ComplexApproximant, RecoveryDiagnostics> recover_fourier(
    const FunctionOracle& oracle, const Density& mu, int d, int s, int m,
    const SamplingMode& mode, double eta, std::uint64_t seed, const RecoveryOptions& opts = {});

struct ErrorEstimate {
  double value = 0.0;
  double std_error = 0.0;  // Monte Carlo standard error of `value`
  int grid_size = 0;
  std::uint64_t seed = 0;
};

// Monte Carlo Sobolev-type error: mean of sum_k tau_k |d_k (f - fhat)|^2
// over draws from mu; the tau reweighting makes the estimator unbiased for
// the squared graded norm.
ErrorEstimate h1_error(const FunctionOracle& oracle, const RealApproximant& approx,
                       const Density& mu, int grid_size, std::uint64_t seed);

// Max absolute deviation over a uniform random grid.
ErrorEstimate linf_error(const FunctionOracle& oracle, const RealApproximant& approx,
                         int grid_size, std::uint64_t seed);

enum class ComplexitySetting {
  GradientAugmented,
  Unaugmented,
  JacobiClosedForm,
  LegendrePreconditioned,
  FourierCase
};
std::string to_string(ComplexitySetting s);

struct ComplexityBreakdown {
  double m_estimate = 0.0;
  double k_factor = 0.0;      // weighted-cardinality factor
  double ratio_factor = 1.0;  // max (1+kappa)/(1+lambda) where it appears
  double log_factor = 0.0;
  ComplexitySetting setting = ComplexitySetting::GradientAugmented;
};

// Sufficient sample count with the universal constant set to one.
// `fourier_N` sizes the truncation in the Fourier setting (0 picks the
// hyperbolic cross cardinality).
ComplexityBreakdown sample_complexity_estimate(const BasisFamily& family, const Density& mu,
                                               int d, int s, double eps,
                                               ComplexitySetting setting,
                                               KMode kmode = KMode::Exact, int fourier_N = 0);

// Index-set text format extended with family metadata and a trailing
// coefficient column.
void write_approximant(std::ostream& os, const RealApproximant& a);
RealApproximant read_approximant(std::istream& is);

extern template struct Approximant<double>;
extern template struct Approximant<std::complex<double>>;

}  // namespace polygrad
