#include "polygrad/solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace polygrad {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal:
      return "optimal";
    case SolveStatus::IterationLimit:
      return "iteration-limit";
    case SolveStatus::Infeasible:
      return "infeasible";
  }
  return "?";
}

namespace {

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
double weighted_l1(const Vec<Scalar>& z, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (int i = 0; i < z.size(); ++i) s += w[i] * std::abs(z[i]);
  return s;
}

// max_i |g_i| / w_i, the dual of the weighted l1 norm
template <class Scalar>
double weighted_dual_norm(const Vec<Scalar>& g, const Eigen::VectorXd& w) {
  double s = 0.0;
  for (int i = 0; i < g.size(); ++i) s = std::max(s, std::abs(g[i]) / w[i]);
  return s;
}

template <class Scalar>
double real_dot(const Vec<Scalar>& a, const Vec<Scalar>& b) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return a.dot(b);
  } else {
    return a.dot(b).real();
  }
}

}  // namespace

template <class Scalar>
Vec<Scalar> project_weighted_l1_ball(const Vec<Scalar>& z, const Eigen::VectorXd& w, double tau) {
  if (tau < 0.0) throw std::domain_error("projection radius must be nonnegative");
  const int n = static_cast<int>(z.size());
  if (w.size() != n) throw std::invalid_argument("projection: weight size mismatch");
  if (tau == 0.0) return Vec<Scalar>::Zero(n);

  Eigen::VectorXd a(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    a[i] = std::abs(z[i]);
    total += w[i] * a[i];
  }
  // rounding slack keeps the map exactly idempotent
  if (total <= tau * (1.0 + 16.0 * std::numeric_limits<double>::epsilon())) return z;

  // The threshold theta solves sum_i w_i max(|z_i| - theta w_i, 0) = tau;
  // scan the breakpoints |z_i|/w_i in decreasing order.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a[i] / w[i] > a[j] / w[j]; });

  double S = 0.0, T = 0.0, theta = 0.0;
  for (int k = 0; k < n; ++k) {
    const int i = order[k];
    const double r = a[i] / w[i];
    const double S1 = S + w[i] * a[i];
    const double T1 = T + w[i] * w[i];
    const double cand = (S1 - tau) / T1;
    if (cand >= r) break;  // index i is inactive at the optimum
    S = S1;
    T = T1;
    theta = cand;
  }
  theta = std::max(theta, 0.0);

  Vec<Scalar> v(n);
  for (int i = 0; i < n; ++i) {
    const double m = a[i] - theta * w[i];
    if (m <= 0.0 || a[i] == 0.0) {
      v[i] = Scalar(0);
    } else {
      v[i] = z[i] * (m / a[i]);
    }
  }
  return v;
}

namespace {

enum class InnerExit { Optimal, RootUpdate, Budget, Floor, Stalled };

// Spectral projected gradient engine, shared by the single-lasso entry point
// and the Newton root search over tau.
template <class Scalar>
class SpgCore {
 public:
  SpgCore(const Mat<Scalar>& A, const Vec<Scalar>& y, const Eigen::VectorXd& w,
          const SolverConfig& cfg)
      : A_(A), y_(y), w_(w), cfg_(cfg), ynorm_(y.norm()), step_max_damped_(cfg.step_max) {
    z_ = Vec<Scalar>::Zero(A.cols());
    r_ = y_;
    g_ = (-(A_.adjoint() * r_)).eval();
    obj_ = 0.5 * r_.squaredNorm();
    prev_objs_.assign(std::max(1, cfg.linesearch_window),
                      -std::numeric_limits<double>::infinity());
    prev_objs_[0] = obj_;
    init_step();
    if (!cfg_.trace_path.empty()) {
      trace_.open(cfg_.trace_path);
      trace_ << "iteration,tau,residual,objective\n";
    }
  }

  const Vec<Scalar>& z() const { return z_; }
  double residual_norm() const { return r_.norm(); }
  double dual_norm() const { return weighted_dual_norm<Scalar>(g_, w_); }
  int iterations() const { return iters_; }

  void shrink_to(double tau) {
    assign(project_weighted_l1_ball<Scalar>(z_, w_, tau));
  }

  // Exit tests run at the top of the loop, so a fresh tau (including the
  // initial tau = 0 state, whose subproblem is solved by z = 0) immediately
  // hands control back to the root search.
  InnerExit run(double tau, double eta, bool single_mode) {
    const double feas_abs = cfg_.feasibility_tol * std::max(1.0, ynorm_);
    int line_errors = 0;
    double prev_obj = -std::numeric_limits<double>::infinity();
    while (true) {
      const double rnorm = residual_norm();
      const double lambda = dual_norm();
      const double gap = real_dot<Scalar>(r_, (r_ - y_).eval()) + tau * lambda;
      const double rgap = std::abs(gap) / std::max(1.0, obj_);
      const double aerr1 = rnorm - eta;
      const double rerr1 = std::abs(aerr1) / std::max(1.0, rnorm);
      const double rerr2 = std::abs(obj_ - eta * eta / 2.0) / std::max(1.0, obj_);

      if (single_mode) {
        if (rgap <= cfg_.optimality_tol || rnorm <= cfg_.optimality_tol * ynorm_)
          return InnerExit::Optimal;
      } else {
        const bool ch1 = std::abs(obj_ - prev_obj) <= cfg_.stagnation_tol * obj_;
        const bool ch2 = std::abs(obj_ - prev_obj) <= cfg_.stagnation_tol * obj_ * std::abs(aerr1);
        if (rgap <= std::max(cfg_.optimality_tol, rerr2) || rerr1 <= cfg_.optimality_tol ||
            (ch1 && rnorm > 2.0 * eta) || (ch2 && rnorm <= 2.0 * eta)) {
          if (rnorm <= eta + feas_abs) return InnerExit::Optimal;
          if (lambda <= cfg_.feasibility_tol * std::max(1.0, ynorm_)) return InnerExit::Floor;
          return InnerExit::RootUpdate;
        }
      }

      if (iters_ >= cfg_.max_iterations) return InnerExit::Budget;
      ++iters_;
      prev_obj = obj_;

      if (!line_search(tau)) {
        if (++line_errors >= 3) return InnerExit::Stalled;
        step_max_damped_ /= 10.0;
        step_ = std::min(step_, step_max_damped_);
        continue;
      }
      if (obj_ > eta * eta / 2.0) record_history();

      if (trace_.is_open())
        trace_ << iters_ << ',' << tau << ',' << residual_norm() << ',' << obj_ << "\n";
    }
  }

 private:
  void init_step() {
    const double gnorm = g_.template lpNorm<Eigen::Infinity>();
    step_ = gnorm > 0.0 ? std::min(step_max_damped_, std::max(cfg_.step_min, 1.0 / gnorm))
                        : step_max_damped_;
  }

  void record_history() {
    prev_objs_[hist_pos_ % prev_objs_.size()] = obj_;
    ++hist_pos_;
  }

  double max_prev_obj() const { return *std::max_element(prev_objs_.begin(), prev_objs_.end()); }

  void assign(Vec<Scalar> z_new) {
    z_ = std::move(z_new);
    r_ = y_ - A_ * z_;
    g_ = (-(A_.adjoint() * r_)).eval();
    obj_ = 0.5 * r_.squaredNorm();
  }

  // Projected line search along the arc, then a nonmonotone backtracking
  // search along the fixed feasible direction when the arc fails.
  bool line_search(double tau) {
    const double fmax = max_prev_obj();
    const Vec<Scalar> z0 = z_;
    const Vec<Scalar> g0 = g_;
    const double gstep = step_;

    {
      double s = 1.0, scale = 1.0, norm_dz_prev = 0.0;
      int safeguards = 0;
      for (int it = 0; it < 12; ++it) {
        const Vec<Scalar> zt =
            project_weighted_l1_ball<Scalar>((z0 - (s * scale * gstep) * g0).eval(), w_, tau);
        const Vec<Scalar> rt = y_ - A_ * zt;
        const double ot = 0.5 * rt.squaredNorm();
        const Vec<Scalar> dz = (zt - z0).eval();
        const double dobj = scale * real_dot<Scalar>(g0, dz);
        if (dobj >= 0.0) break;  // not descending along the arc
        if (ot < fmax + 1e-4 * s * dobj) {
          commit(zt, rt, ot, z0, g0);
          return true;
        }
        s /= 2.0;
        const double norm_dz = dz.norm() / std::sqrt(static_cast<double>(z0.size()));
        if (std::abs(norm_dz - norm_dz_prev) <= 1e-6 * norm_dz) {
          const double gn = g0.norm() / std::sqrt(static_cast<double>(z0.size()));
          scale = norm_dz / std::max(gn, 1e-300) / std::pow(2.0, safeguards);
          ++safeguards;
        }
        norm_dz_prev = norm_dz;
      }
    }

    {
      const Vec<Scalar> dz =
          (project_weighted_l1_ball<Scalar>((z0 - gstep * g0).eval(), w_, tau) - z0).eval();
      double gtd = real_dot<Scalar>(g0, dz);
      if (dz.norm() == 0.0) return false;
      gtd = -std::abs(gtd);
      if (gtd >= 0.0) return false;
      double s = 1.0;
      for (int it = 0; it < 12; ++it) {
        const Vec<Scalar> zt = (z0 + s * dz).eval();
        const Vec<Scalar> rt = y_ - A_ * zt;
        const double ot = 0.5 * rt.squaredNorm();
        if (ot < fmax + 1e-4 * s * gtd) {
          commit(zt, rt, ot, z0, g0);
          return true;
        }
        double cand;
        if (s <= 0.1) {
          cand = s / 2.0;
        } else {
          cand = (-gtd * s * s) / (2.0 * (ot - obj_ - s * gtd));
          if (!(cand > 0.1) || cand > 0.9 * s || std::isnan(cand)) cand = s / 2.0;
        }
        s = cand;
      }
    }
    return false;
  }

  void commit(const Vec<Scalar>& zt, const Vec<Scalar>& rt, double ot, const Vec<Scalar>& z0,
              const Vec<Scalar>& g0) {
    z_ = zt;
    r_ = rt;
    obj_ = ot;
    g_ = (-(A_.adjoint() * r_)).eval();
    const Vec<Scalar> dz = (z_ - z0).eval();
    const Vec<Scalar> dg = (g_ - g0).eval();
    const double sts = dz.squaredNorm();
    const double sty = real_dot<Scalar>(dz, dg);
    if (sty <= 0.0) {
      step_ = step_max_damped_;
    } else {
      step_ = std::min(step_max_damped_, std::max(cfg_.step_min, sts / sty));
    }
  }

  const Mat<Scalar>& A_;
  const Vec<Scalar>& y_;
  const Eigen::VectorXd& w_;
  SolverConfig cfg_;
  double ynorm_;

  Vec<Scalar> z_, r_, g_;
  double obj_ = 0.0;
  double step_ = 1.0;
  double step_max_damped_;
  std::vector<double> prev_objs_;
  std::size_t hist_pos_ = 1;
  int iters_ = 0;
  std::ofstream trace_;
};

}  // namespace

template <class Scalar>
SolverResult<Scalar> solve_weighted_lasso(const Mat<Scalar>& A, const Vec<Scalar>& y,
                                          const Eigen::VectorXd& w, double tau,
                                          const SolverConfig& cfg) {
  if (tau < 0.0) throw std::domain_error("lasso radius must be nonnegative");
  SolverResult<Scalar> res;
  if (tau == 0.0) {
    res.z = Vec<Scalar>::Zero(A.cols());
    res.residual_norm = y.norm();
    res.status = SolveStatus::Optimal;
    return res;
  }
  SpgCore<Scalar> core(A, y, w, cfg);
  const InnerExit exit = core.run(tau, 0.0, /*single_mode=*/true);
  res.z = core.z();
  res.residual_norm = core.residual_norm();
  res.weighted_l1 = weighted_l1<Scalar>(res.z, w);
  res.iterations = core.iterations();
  res.status = exit == InnerExit::Budget ? SolveStatus::IterationLimit : SolveStatus::Optimal;
  return res;
}

template <class Scalar>
SolverResult<Scalar> solve_bpdn(const BPDNProblem<Scalar>& problem, const SolverConfig& cfg) {
  const auto& A = problem.A;
  const auto& y = problem.y;
  const auto& w = problem.w;
  const double eta = problem.eta;
  if (eta < 0.0) throw std::domain_error("eta must be nonnegative");
  if (A.rows() != y.size() || A.cols() != w.size())
    throw std::invalid_argument("bpdn: dimension mismatch");
  for (int i = 0; i < w.size(); ++i)
    if (!(w[i] >= 1.0)) throw std::domain_error("bpdn: weights must be >= 1");

  SolverResult<Scalar> res;
  const double ynorm = y.norm();
  if (ynorm <= eta) {
    // zero is feasible with minimal weighted norm
    res.z = Vec<Scalar>::Zero(A.cols());
    res.residual_norm = ynorm;
    res.status = SolveStatus::Optimal;
    return res;
  }

  SpgCore<Scalar> core(A, y, w, cfg);
  const double feas_abs = cfg.feasibility_tol * std::max(1.0, ynorm);

  double tau = 0.0;
  double tau_lo = 0.0;                                      // residual above eta here
  double tau_hi = std::numeric_limits<double>::infinity();  // residual below eta here
  SolveStatus status = SolveStatus::IterationLimit;

  for (int outer = 0; outer < 200; ++outer) {
    const InnerExit exit = core.run(tau, eta, /*single_mode=*/false);
    const double rnorm = core.residual_norm();
    res.pareto_path.emplace_back(tau, rnorm);

    if (exit == InnerExit::Optimal) {
      status = SolveStatus::Optimal;
      break;
    }
    if (exit == InnerExit::Budget) {
      status = SolveStatus::IterationLimit;
      break;
    }
    if (exit == InnerExit::Floor || exit == InnerExit::Stalled) {
      status = rnorm <= eta + feas_abs ? SolveStatus::Optimal : SolveStatus::Infeasible;
      break;
    }

    // Newton step on phi(tau) = ||r(tau)|| - eta, kept inside the bracket
    const double lambda = core.dual_norm();
    if (rnorm > eta) {
      tau_lo = std::max(tau_lo, tau);
    } else {
      tau_hi = std::min(tau_hi, tau);
    }
    double tau_next = tau + rnorm * (rnorm - eta) / std::max(lambda, 1e-300);
    if (!(tau_next > tau_lo) || tau_next >= tau_hi)
      tau_next = std::isfinite(tau_hi) ? 0.5 * (tau_lo + tau_hi) : std::max(2.0 * tau, 1.0);
    if (tau_next < tau) core.shrink_to(tau_next);
    tau = tau_next;
  }

  res.z = core.z();
  res.residual_norm = core.residual_norm();
  res.weighted_l1 = weighted_l1<Scalar>(res.z, w);
  res.iterations = core.iterations();
  res.status = status;
  return res;
}

namespace {

// Residual with extended-precision accumulation; near basis-pursuit
// solutions a plain difference loses the direction information the
// certificate depends on.
template <class Scalar>
Vec<Scalar> accurate_residual(const Mat<Scalar>& A, const Vec<Scalar>& y, const Vec<Scalar>& z) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  Vec<Scalar> r(m);
  for (int i = 0; i < m; ++i) {
    if constexpr (std::is_same_v<Scalar, double>) {
      long double acc = y[i];
      for (int j = 0; j < n; ++j) acc -= static_cast<long double>(A(i, j)) * z[j];
      r[i] = static_cast<double>(acc);
    } else {
      long double re = y[i].real(), im = y[i].imag();
      for (int j = 0; j < n; ++j) {
        const auto p = A(i, j) * z[j];
        re -= static_cast<long double>(p.real());
        im -= static_cast<long double>(p.imag());
      }
      r[i] = Scalar(static_cast<double>(re), static_cast<double>(im));
    }
  }
  return r;
}

template <class Scalar>
Scalar phase_of(Scalar v) {
  if constexpr (std::is_same_v<Scalar, double>) {
    return v >= 0.0 ? 1.0 : -1.0;
  } else {
    const double a = std::abs(v);
    return a == 0.0 ? Scalar(0) : v / a;
  }
}

}  // namespace

template <class Scalar>
double kkt_residual(const BPDNProblem<Scalar>& problem, const Vec<Scalar>& z) {
  const auto& A = problem.A;
  const auto& y = problem.y;
  const auto& w = problem.w;
  const double scale = std::max(1.0, y.norm());

  const Vec<Scalar> r = accurate_residual<Scalar>(A, y, z);
  const double rnorm = r.norm();
  const double feas = std::max(0.0, rnorm - problem.eta) / scale;

  const double zmax = z.size() ? z.template lpNorm<Eigen::Infinity>() : 0.0;
  if (zmax == 0.0) return feas;

  const Vec<Scalar> g = A.adjoint() * r;
  std::vector<int> supp;
  for (int i = 0; i < z.size(); ++i)
    if (std::abs(z[i]) > 1e-7 * zmax) supp.push_back(i);
  if (supp.empty()) return feas;

  // dual level from the aligned support correlations
  std::vector<double> levels;
  levels.reserve(supp.size());
  for (int i : supp) {
    if constexpr (std::is_same_v<Scalar, double>) {
      levels.push_back(g[i] * phase_of(z[i]) / w[i]);
    } else {
      levels.push_back((std::conj(phase_of(z[i])) * g[i]).real() / w[i]);
    }
  }
  std::nth_element(levels.begin(), levels.begin() + levels.size() / 2, levels.end());
  const double rho = levels[levels.size() / 2];
  if (!(rho > 0.0)) return std::max(feas, 1.0);

  double dual = 0.0;
  for (int i = 0; i < g.size(); ++i) dual = std::max(dual, std::abs(g[i]) / (rho * w[i]) - 1.0);
  dual = std::max(dual, 0.0);

  double comp = 0.0;
  for (int i : supp) {
    const Scalar dev = g[i] / (rho * w[i]) - phase_of(z[i]);
    comp = std::max(comp, std::abs(dev));
  }
  return std::max({feas, dual, comp});
}

template Eigen::VectorXd project_weighted_l1_ball<double>(const Eigen::VectorXd&,
                                                          const Eigen::VectorXd&, double);
template Eigen::VectorXcd project_weighted_l1_ball<std::complex<double>>(const Eigen::VectorXcd&,
                                                                         const Eigen::VectorXd&,
                                                                         double);
template SolverResult<double> solve_weighted_lasso<double>(const Eigen::MatrixXd&,
                                                           const Eigen::VectorXd&,
                                                           const Eigen::VectorXd&, double,
                                                           const SolverConfig&);
template SolverResult<std::complex<double>> solve_weighted_lasso<std::complex<double>>(
    const Eigen::MatrixXcd&, const Eigen::VectorXcd&, const Eigen::VectorXd&, double,
    const SolverConfig&);
template SolverResult<double> solve_bpdn<double>(const BPDNProblem<double>&, const SolverConfig&);
template SolverResult<std::complex<double>> solve_bpdn<std::complex<double>>(
    const BPDNProblem<std::complex<double>>&, const SolverConfig&);
template double kkt_residual<double>(const BPDNProblem<double>&, const Eigen::VectorXd&);
template double kkt_residual<std::complex<double>>(const BPDNProblem<std::complex<double>>&,
                                                   const Eigen::VectorXcd&);

}  // namespace polygrad
