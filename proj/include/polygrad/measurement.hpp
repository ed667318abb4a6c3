#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <iosfwd>
#include <optional>

#include "polygrad/basis.hpp"
#include "polygrad/index_set.hpp"

namespace polygrad {

enum class SamplingModeKind { Unaugmented, FullGradient, FractionalGradient, IndependentGradient };

struct SamplingMode {
  SamplingModeKind kind = SamplingModeKind::Unaugmented;
  double fraction = 1.0;       // share of points carrying gradient rows
  bool random_subset = false;  // fractional points drawn at random instead of first ceil(pm)

  static SamplingMode unaugmented() { return {SamplingModeKind::Unaugmented, 0.0}; }
  static SamplingMode full_gradient() { return {SamplingModeKind::FullGradient, 1.0}; }
  static SamplingMode fractional(double p, bool random_subset = false);
  static SamplingMode independent() { return {SamplingModeKind::IndependentGradient, 1.0}; }

  bool has_gradient() const { return kind != SamplingModeKind::Unaugmented; }
  std::string name() const;
};

struct SampleSet {
  Eigen::MatrixXd points;  // m x d, strictly inside the open domain
  Density density;
  std::uint64_t seed = 0;

  int m() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
};

// m i.i.d. tensor draws from mu; deterministic given the seed.
SampleSet sample_points(const Density& mu, int d, int m, std::uint64_t seed);

// Row scaling tau_k(y) = nu_k(y) / mu(y); k = 0 is the function block.
double tau_k(const BasisFamily& family, const Density& mu, const Eigen::VectorXd& y, int k);

// Column scaling sqrt(1 + lambda_n) over the index set, in its order.
Eigen::VectorXd q_scaling(const BasisFamily& family, const IndexSet& lambda);

// Stacked, scaled sampling system.  A_raw holds the row blocks
// sqrt(tau_k/m) d_k phi_n(y_i); A = A_raw Q^{-1} is what the solver sees.
template <class Scalar>
struct Ensemble {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix A;
  Matrix A_raw;
  Vector rhs;
  Eigen::VectorXd q;  // all ones in unaugmented mode
  SamplingMode mode;
  IndexSet lambda;
  int m = 0;           // function sample count
  int m_o = 0;         // function evaluations
  int m_g = 0;         // gradient evaluations
  int deriv_rows = 0;  // rows in each derivative block

  int rows() const { return static_cast<int>(A.rows()); }
  int cols() const { return static_cast<int>(A.cols()); }
  int cost() const { return m_o + m_g; }
};

using RealOracle = std::function<double(const Eigen::VectorXd&)>;
using RealGradientOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using ComplexOracle = std::function<std::complex<double>(const Eigen::VectorXd&)>;
using ComplexGradientOracle = std::function<Eigen::VectorXcd(const Eigen::VectorXd&)>;

struct AssembleLimits {
  std::size_t max_matrix_bytes = std::size_t(4) << 30;
};

Ensemble<double> assemble(const BasisFamily& family, const Density& mu, const IndexSet& lambda,
                          const SampleSet& pts, const RealOracle& f,
                          const RealGradientOracle& grad, const SamplingMode& mode,
                          const AssembleLimits& limits = {});

Ensemble<std::complex<double>> assemble_fourier(const Density& mu, const IndexSet& lambda,
                                                const SampleSet& pts, const ComplexOracle& f,
                                                const ComplexGradientOracle& grad,
                                                const SamplingMode& mode,
                                                const AssembleLimits& limits = {});

// Drop the derivative row blocks and undo the column scaling; reproduces the
// unaugmented ensemble on the same points exactly.
template <class Scalar>
Ensemble<Scalar> strip_to_unaugmented(const Ensemble<Scalar>& e);

struct IsotropyReport {
  double spectral = 0.0;
  double max_entry = 0.0;
};

// || A^* A - I || over a fresh sample draw, both spectral and max-entry.
IsotropyReport isotropy_deviation(const BasisFamily& family, const Density& mu,
                                  const IndexSet& lambda, const SamplingMode& mode, int m,
                                  std::uint64_t seed);

enum class CoherenceKind { Upsilon, Gamma1, Gamma2 };

struct CoherenceBudget {
  int sup_points = 65536;    // evaluation points for almost-sure suprema
  int expect_samples = 4096; // Monte Carlo draws for expectations
  int sign_samples = 64;     // random sign vectors probing the sup over z
  std::uint64_t seed = 0;
};

struct CoherenceEstimate {
  double value = 0.0;
  bool converged = true;
};

// Numerical estimate of the local coherences of the derivative sampling
// distribution relative to delta.  Estimates from below.  `ambient`, when
// given, supplies the row index set (defaults to delta itself).
CoherenceEstimate local_coherence(const BasisFamily& family, const Density& mu,
                                  const IndexSet& delta, CoherenceKind which,
                                  const WeightVector& w, const CoherenceBudget& budget = {},
                                  const IndexSet* ambient = nullptr);

// --- debug / exchange formats ----------------------------------------------

template <class Scalar>
void write_ensemble_binary(std::ostream& os, const Ensemble<Scalar>& e);

struct EnsembleFilePayload {
  bool is_complex = false;
  std::uint32_t mode_kind = 0;
  double fraction = 0.0;
  std::uint64_t seed = 0;
  Eigen::MatrixXcd A;  // real payloads land in the real part
  Eigen::VectorXcd rhs;
  Eigen::VectorXd q;
};
EnsembleFilePayload read_ensemble_binary(std::istream& is);

template <class Scalar>
void write_ensemble_csv(std::ostream& os, const Ensemble<Scalar>& e);

}  // namespace polygrad
