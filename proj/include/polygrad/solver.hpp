#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace polygrad {

// min ||z||_{1,w}  subject to  ||A z - y||_2 <= eta
template <class Scalar>
struct BPDNProblem {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> A;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y;
  Eigen::VectorXd w;  // optimization weights, entries >= 1
  double eta = 0.0;
};

struct SolverConfig {
  int max_iterations = 10000;     // total projected-gradient steps across the solve
  double feasibility_tol = 1e-9;  // scaled by max(1, ||y||)
  double optimality_tol = 1e-8;   // relative duality-gap target for subproblems
  double pareto_tol = 1e-8;       // residual-vs-eta tolerance in the root search
  double stagnation_tol = 1e-4;   // objective-change trigger for the next root step
  int linesearch_window = 10;     // nonmonotone line search history
  double step_min = 1e-16;
  double step_max = 1e5;
  std::uint64_t seed = 0;
  std::string trace_path;  // per-iteration CSV trace, empty disables
};

enum class SolveStatus { Optimal, IterationLimit, Infeasible };
std::string to_string(SolveStatus s);

template <class Scalar>
struct SolverResult {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z;
  double residual_norm = 0.0;
  double weighted_l1 = 0.0;
  int iterations = 0;
  SolveStatus status = SolveStatus::Optimal;
  // (tau, residual norm) after each completed subproblem
  std::vector<std::pair<double, double>> pareto_path;
};

// Euclidean projection onto { v : sum_i w_i |v_i| <= tau }, by exact
// breakpoint search on the dual threshold.  Complex entries shrink in
// modulus and keep their phase.
template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project_weighted_l1_ball(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z, const Eigen::VectorXd& w, double tau);

// min ||A z - y||_2 subject to ||z||_{1,w} <= tau, by spectral projected
// gradient with Barzilai-Borwein steps and a nonmonotone line search.
template <class Scalar>
SolverResult<Scalar> solve_weighted_lasso(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& A,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& y, const Eigen::VectorXd& w, double tau,
    const SolverConfig& cfg = {});

// Basis pursuit denoise by Newton root finding on the Pareto curve
// tau -> ||A z_tau - y||, safeguarded by bisection.
template <class Scalar>
SolverResult<Scalar> solve_bpdn(const BPDNProblem<Scalar>& problem, const SolverConfig& cfg = {});

// Optimality certificate: the largest of feasibility excess, scaled dual
// infeasibility, and support misalignment of the subgradient conditions.
template <class Scalar>
double kkt_residual(const BPDNProblem<Scalar>& problem,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z);

extern template Eigen::VectorXd project_weighted_l1_ball<double>(const Eigen::VectorXd&,
                                                                 const Eigen::VectorXd&, double);
extern template Eigen::VectorXcd project_weighted_l1_ball<std::complex<double>>(
    const Eigen::VectorXcd&, const Eigen::VectorXd&, double);
extern template SolverResult<double> solve_weighted_lasso<double>(const Eigen::MatrixXd&,
                                                                  const Eigen::VectorXd&,
                                                                  const Eigen::VectorXd&, double,
                                                                  const SolverConfig&);
extern template SolverResult<std::complex<double>> solve_weighted_lasso<std::complex<double>>(
    const Eigen::MatrixXcd&, const Eigen::VectorXcd&, const Eigen::VectorXd&, double,
    const SolverConfig&);
extern template SolverResult<double> solve_bpdn<double>(const BPDNProblem<double>&,
                                                        const SolverConfig&);
extern template SolverResult<std::complex<double>> solve_bpdn<std::complex<double>>(
    const BPDNProblem<std::complex<double>>&, const SolverConfig&);
extern template double kkt_residual<double>(const BPDNProblem<double>&, const Eigen::VectorXd&);
extern template double kkt_residual<std::complex<double>>(
    const BPDNProblem<std::complex<double>>&, const Eigen::VectorXcd&);

}  // namespace polygrad
