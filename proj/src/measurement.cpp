#include "polygrad/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "polygrad/tensor_eval.hpp"

namespace polygrad {

SamplingMode SamplingMode::fractional(double p, bool random_subset) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("gradient fraction must lie in [0,1]");
  return {SamplingModeKind::FractionalGradient, p, random_subset};
}

std::string SamplingMode::name() const {
  switch (kind) {
    case SamplingModeKind::Unaugmented:
      return "unaugmented";
    case SamplingModeKind::FullGradient:
      return "full";
    case SamplingModeKind::FractionalGradient:
      return "fractional";
    case SamplingModeKind::IndependentGradient:
      return "independent";
  }
  return "?";
}

SampleSet sample_points(const Density& mu, int d, int m, std::uint64_t seed) {
  if (d < 1) throw std::domain_error("sample_points: d >= 1 required");
  if (m < 0) throw std::domain_error("sample_points: m >= 0 required");
  RngStream rng = RngStream::derive(seed, "sample-points");
  SampleSet set{Eigen::MatrixXd(m, d), mu, seed};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) set.points(i, j) = mu.sample1(rng);
  return set;
}

namespace {

// tau_0..tau_d at one point
void tau_all(const BasisFamily& family, const Density& mu, const Eigen::VectorXd& y,
             std::vector<double>& out) {
  const int d = static_cast<int>(y.size());
  out.resize(d + 1);
  double r = 1.0;
  for (int j = 0; j < d; ++j) r *= density_nu(family, y[j]) / mu.pdf1(y[j]);
  out[0] = r;
  for (int k = 1; k <= d; ++k)
    out[k] = r * weight_chi(family, y[k - 1]) / density_nu(family, y[k - 1]);
}

}  // namespace

double tau_k(const BasisFamily& family, const Density& mu, const Eigen::VectorXd& y, int k) {
  const int d = static_cast<int>(y.size());
  if (k < 0 || k > d) throw std::domain_error("tau_k: k must lie in 0..d");
  std::vector<double> t;
  tau_all(family, mu, y, t);
  return t[k];
}

Eigen::VectorXd q_scaling(const BasisFamily& family, const IndexSet& lambda) {
  Eigen::VectorXd q(lambda.size());
  for (int i = 0; i < lambda.size(); ++i) {
    double lam = 0.0;
    for (int v : lambda[i]) lam += eigenvalue(family, v);
    q[i] = std::sqrt(1.0 + lam);
  }
  return q;
}

namespace {

std::vector<int> gradient_point_rows(const SamplingMode& mode, int m, std::uint64_t seed) {
  switch (mode.kind) {
    case SamplingModeKind::Unaugmented:
      return {};
    case SamplingModeKind::FullGradient:
    case SamplingModeKind::IndependentGradient: {
      std::vector<int> idx(m);
      std::iota(idx.begin(), idx.end(), 0);
      return idx;
    }
    case SamplingModeKind::FractionalGradient: {
      const int g = static_cast<int>(std::ceil(mode.fraction * m));
      std::vector<int> idx;
      if (!mode.random_subset) {
        idx.resize(g);
        std::iota(idx.begin(), idx.end(), 0);
      } else {
        std::vector<int> all(m);
        std::iota(all.begin(), all.end(), 0);
        RngStream rng = RngStream::derive(seed, "fractional-subset");
        for (int i = 0; i < g; ++i) {
          const int j = i + static_cast<int>(rng.uniform01() * (m - i));
          std::swap(all[i], all[std::min(j, m - 1)]);
        }
        idx.assign(all.begin(), all.begin() + g);
        std::sort(idx.begin(), idx.end());
      }
      return idx;
    }
  }
  return {};
}

template <class Scalar, class F, class G>
Ensemble<Scalar> assemble_impl(const BasisFamily& family, const Density& mu,
                               const IndexSet& lambda, const SampleSet& pts, const F& f,
                               const G& grad, const SamplingMode& mode,
                               const AssembleLimits& limits) {
  if (lambda.size() == 0) throw std::invalid_argument("assemble: empty index set");
  if (mode.has_gradient() && !grad)
    throw std::invalid_argument("assemble: gradient oracle required for this sampling mode");
  if (!f) throw std::invalid_argument("assemble: function oracle required");
  const int d = lambda.dim();
  if (pts.dim() != d) throw std::invalid_argument("assemble: point/index dimension mismatch");
  const int m = pts.m();
  if (m < 1) throw std::invalid_argument("assemble: at least one sample point required");
  const int N = lambda.size();

  const std::vector<int> gidx = gradient_point_rows(mode, m, pts.seed);
  const int g = static_cast<int>(gidx.size());

  Eigen::MatrixXd gpts;
  if (mode.kind == SamplingModeKind::IndependentGradient) {
    gpts = sample_points(mu, d, m, mix64(pts.seed ^ fnv1a("independent-gradient"))).points;
  } else if (g > 0) {
    gpts.resize(g, d);
    for (int t = 0; t < g; ++t) gpts.row(t) = pts.points.row(gidx[t]);
  }

  const long rows = static_cast<long>(m) + static_cast<long>(d) * g;
  const std::size_t bytes = 2u * sizeof(Scalar) * static_cast<std::size_t>(rows) * N;
  if (bytes > limits.max_matrix_bytes)
    throw std::length_error("assemble: system exceeds the configured memory budget");

  Ensemble<Scalar> e;
  e.mode = mode;
  e.lambda = lambda;
  e.m = m;
  e.m_o = m;
  e.m_g = g;
  e.deriv_rows = g;
  e.A_raw.resize(rows, N);
  e.rhs.resize(rows);

  TensorBasisTables<Scalar> tables(family, lambda);
  std::vector<double> tau;
  const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(m));

  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd y = pts.points.row(i);
    tables.at(y);
    tau_all(family, mu, y, tau);
    const double w0 = std::sqrt(tau[0]) * inv_sqrt_m;
    e.rhs[i] = w0 * f(y);
    for (int j = 0; j < N; ++j) e.A_raw(i, j) = w0 * tables.value(lambda[j]);
  }
  for (int t = 0; t < g; ++t) {
    const Eigen::VectorXd y = gpts.row(t);
    tables.at(y);
    tau_all(family, mu, y, tau);
    const auto gy = grad(y);
    for (int k = 1; k <= d; ++k) {
      const double wk = std::sqrt(tau[k]) * inv_sqrt_m;
      const long row = m + static_cast<long>(k - 1) * g + t;
      e.rhs[row] = wk * gy[k - 1];
      for (int j = 0; j < N; ++j) e.A_raw(row, j) = wk * tables.dk(k, lambda[j]);
    }
  }

  e.q = mode.has_gradient() ? q_scaling(family, lambda) : Eigen::VectorXd::Ones(N);
  e.A = e.A_raw * e.q.cwiseInverse().asDiagonal();
  return e;
}

}  // namespace

Ensemble<double> assemble(const BasisFamily& family, const Density& mu, const IndexSet& lambda,
                          const SampleSet& pts, const RealOracle& f,
                          const RealGradientOracle& grad, const SamplingMode& mode,
                          const AssembleLimits& limits) {
  if (family.is_fourier())
    throw std::domain_error("assemble: use assemble_fourier for the Fourier basis");
  return assemble_impl<double>(family, mu, lambda, pts, f, grad, mode, limits);
}

Ensemble<std::complex<double>> assemble_fourier(const Density& mu, const IndexSet& lambda,
                                                const SampleSet& pts, const ComplexOracle& f,
                                                const ComplexGradientOracle& grad,
                                                const SamplingMode& mode,
                                                const AssembleLimits& limits) {
  return assemble_impl<std::complex<double>>(BasisFamily::fourier(), mu, lambda, pts, f, grad,
                                             mode, limits);
}

template <class Scalar>
Ensemble<Scalar> strip_to_unaugmented(const Ensemble<Scalar>& e) {
  Ensemble<Scalar> out;
  out.mode = SamplingMode::unaugmented();
  out.lambda = e.lambda;
  out.m = e.m;
  out.m_o = e.m_o;
  out.m_g = 0;
  out.deriv_rows = 0;
  out.A_raw = e.A_raw.topRows(e.m);
  out.A = out.A_raw;
  out.rhs = e.rhs.head(e.m);
  out.q = Eigen::VectorXd::Ones(e.cols());
  return out;
}

template Ensemble<double> strip_to_unaugmented(const Ensemble<double>&);
template Ensemble<std::complex<double>> strip_to_unaugmented(const Ensemble<std::complex<double>>&);

namespace {

template <class Scalar>
IsotropyReport isotropy_from(const Ensemble<Scalar>& e) {
  using Matrix = typename Ensemble<Scalar>::Matrix;
  Matrix gram = e.A.adjoint() * e.A;
  gram -= Matrix::Identity(e.cols(), e.cols());
  IsotropyReport rep;
  rep.max_entry = gram.cwiseAbs().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  rep.spectral = es.eigenvalues().cwiseAbs().maxCoeff();
  return rep;
}

}  // namespace

IsotropyReport isotropy_deviation(const BasisFamily& family, const Density& mu,
                                  const IndexSet& lambda, const SamplingMode& mode, int m,
                                  std::uint64_t seed) {
  const SampleSet pts = sample_points(mu, lambda.dim(), m, seed);
  if (family.is_fourier()) {
    auto zero = [](const Eigen::VectorXd&) { return std::complex<double>(0.0); };
    auto zgrad = [](const Eigen::VectorXd& y) {
      return Eigen::VectorXcd::Zero(y.size()).eval();
    };
    return isotropy_from(assemble_fourier(mu, lambda, pts, zero, zgrad, mode));
  }
  auto zero = [](const Eigen::VectorXd&) { return 0.0; };
  auto zgrad = [](const Eigen::VectorXd& y) { return Eigen::VectorXd::Zero(y.size()).eval(); };
  return isotropy_from(assemble(family, mu, lambda, pts, zero, zgrad, mode));
}

// ---------------------------------------------------------------------------
// Local coherence estimators
// ---------------------------------------------------------------------------

namespace {

// B(y): rows over the ambient set, columns k = 0..d, entries
// sqrt(tau_k) conj(d_k phi_n) / sqrt(1 + lambda_n).
struct CoherenceEvaluator {
  const BasisFamily& family;
  const Density& mu;
  const IndexSet& ambient;
  TensorBasisTables<std::complex<double>> tables;
  Eigen::VectorXd qinv;
  std::vector<double> tau;

  CoherenceEvaluator(const BasisFamily& f, const Density& m, const IndexSet& amb)
      : family(f), mu(m), ambient(amb), tables(f, amb) {
    qinv = q_scaling(f, amb).cwiseInverse();
  }

  Eigen::MatrixXcd at(const Eigen::VectorXd& y) {
    const int d = ambient.dim();
    tables.at(y);
    tau_all(family, mu, y, tau);
    Eigen::MatrixXcd B(ambient.size(), d + 1);
    for (int k = 0; k <= d; ++k) {
      const double sk = std::sqrt(tau[k]);
      for (int i = 0; i < ambient.size(); ++i)
        B(i, k) = sk * std::conj(tables.dk(k, ambient[i])) * qinv[i];
    }
    return B;
  }
};

}  // namespace

CoherenceEstimate local_coherence(const BasisFamily& family, const Density& mu,
                                  const IndexSet& delta, CoherenceKind which,
                                  const WeightVector& w, const CoherenceBudget& budget,
                                  const IndexSet* ambient_in) {
  if (delta.size() > 20)
    throw std::invalid_argument("local_coherence: delta larger than the supported guard (20)");
  const IndexSet& ambient = ambient_in ? *ambient_in : delta;
  const int d = delta.dim();
  std::vector<int> delta_pos;
  for (const auto& n : delta.indices()) {
    const auto p = ambient.find(n);
    if (!p) throw std::invalid_argument("local_coherence: delta not contained in ambient set");
    delta_pos.push_back(*p);
  }
  const int nA = ambient.size(), nD = delta.size();

  Eigen::VectorXd wa(nA);
  for (int i = 0; i < nA; ++i) wa[i] = w.at(ambient[i]);

  CoherenceEvaluator eval(family, mu, ambient);
  RngStream rng = RngStream::derive(budget.seed, "coherence");

  auto draw_point = [&](int idx) {
    Eigen::VectorXd y(d);
    if (d == 1) {
      const int G = budget.sup_points;
      y[0] = std::cos(3.14159265358979323846 * (idx % G + 0.5) / G);
    } else {
      for (int j = 0; j < d; ++j) y[j] = mu.sample1(rng);
    }
    return y;
  };

  if (which == CoherenceKind::Upsilon || which == CoherenceKind::Gamma1) {
    double sup = 0.0, sup_half = 0.0;
    for (int t = 0; t < budget.sup_points; ++t) {
      const Eigen::MatrixXcd B = eval.at(draw_point(t));
      double val = 0.0;
      if (which == CoherenceKind::Upsilon) {
        Eigen::MatrixXcd Bd(nD, B.cols());
        for (int i = 0; i < nD; ++i) Bd.row(i) = B.row(delta_pos[i]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Bd.adjoint() * Bd);
        val = es.eigenvalues().maxCoeff();
      } else {
        // max weighted row sum of W^{-1} B B^* P_Delta W
        for (int i = 0; i < nA; ++i) {
          double row = 0.0;
          for (int jd = 0; jd < nD; ++jd) {
            const int j = delta_pos[jd];
            // Eigen conjugates the first operand: this is (B B^*)_{i,j}
            const std::complex<double> mij = B.row(j).dot(B.row(i));
            row += std::abs(mij) * wa[j];
          }
          val = std::max(val, row / wa[i]);
        }
      }
      sup = std::max(sup, val);
      if (t == budget.sup_points / 2) sup_half = sup;
    }
    const bool conv = (sup - sup_half) <= 1e-3 * std::max(sup, 1.0);
    return {sup, conv};
  }

  // Gamma2: expectation over the density, sup probed with random sign vectors.
  std::vector<Eigen::VectorXcd> signs;
  for (int t = 0; t < budget.sign_samples; ++t) {
    Eigen::VectorXcd z(nD);
    for (int i = 0; i < nD; ++i) {
      if (family.is_fourier()) {
        z[i] = std::polar(1.0, 2.0 * 3.14159265358979323846 * rng.uniform01());
      } else {
        z[i] = rng.uniform01() < 0.5 ? -1.0 : 1.0;
      }
    }
    signs.push_back(std::move(z));
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(nA, budget.sign_samples);
  double best_half = 0.0;
  for (int s = 0; s < budget.expect_samples; ++s) {
    Eigen::VectorXd y(d);
    for (int j = 0; j < d; ++j) y[j] = mu.sample1(rng);
    const Eigen::MatrixXcd B = eval.at(y);
    Eigen::MatrixXcd M(nA, nD);
    for (int i = 0; i < nA; ++i)
      for (int jd = 0; jd < nD; ++jd) M(i, jd) = B.row(delta_pos[jd]).dot(B.row(i));
    for (int t = 0; t < budget.sign_samples; ++t) {
      Eigen::VectorXcd wz(nD);
      for (int jd = 0; jd < nD; ++jd) wz[jd] = wa[delta_pos[jd]] * signs[t][jd];
      const Eigen::VectorXcd v = M * wz;
      for (int i = 0; i < nA; ++i) acc(i, t) += std::norm(v[i] / wa[i]);
    }
    if (s + 1 == budget.expect_samples / 2)
      best_half = (acc / static_cast<double>(s + 1)).maxCoeff();
  }
  const double best = (acc / static_cast<double>(budget.expect_samples)).maxCoeff();
  const bool conv = std::abs(best - best_half) <= 5e-2 * std::max(best, 1.0);
  return {best, conv};
}

// ---------------------------------------------------------------------------
// Export formats
// ---------------------------------------------------------------------------

namespace {

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("ensemble payload: truncated stream");
  return v;
}

constexpr char kMagic[4] = {'P', 'G', 'E', '1'};

}  // namespace

template <class Scalar>
void write_ensemble_binary(std::ostream& os, const Ensemble<Scalar>& e) {
  os.write(kMagic, 4);
  put<std::uint8_t>(os, 1);
  put<std::uint8_t>(os, std::is_same_v<Scalar, std::complex<double>> ? 1 : 0);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(e.mode.kind));
  put<double>(os, e.mode.fraction);
  put<std::uint64_t>(os, 0);
  put<std::uint64_t>(os, static_cast<std::uint64_t>(e.rows()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(e.cols()));
  os.write(reinterpret_cast<const char*>(e.A.data()),
           static_cast<std::streamsize>(sizeof(Scalar) * e.A.size()));
  os.write(reinterpret_cast<const char*>(e.rhs.data()),
           static_cast<std::streamsize>(sizeof(Scalar) * e.rhs.size()));
  put<std::uint64_t>(os, static_cast<std::uint64_t>(e.q.size()));
  os.write(reinterpret_cast<const char*>(e.q.data()),
           static_cast<std::streamsize>(sizeof(double) * e.q.size()));
}

template void write_ensemble_binary(std::ostream&, const Ensemble<double>&);
template void write_ensemble_binary(std::ostream&, const Ensemble<std::complex<double>>&);

EnsembleFilePayload read_ensemble_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("ensemble payload: bad magic");
  if (get<std::uint8_t>(is) != 1) throw std::runtime_error("ensemble payload: bad version");
  EnsembleFilePayload p;
  p.is_complex = get<std::uint8_t>(is) != 0;
  p.mode_kind = get<std::uint32_t>(is);
  p.fraction = get<double>(is);
  p.seed = get<std::uint64_t>(is);
  const auto rows = get<std::uint64_t>(is);
  const auto cols = get<std::uint64_t>(is);
  p.A.resize(rows, cols);
  p.rhs.resize(rows);
  if (p.is_complex) {
    is.read(reinterpret_cast<char*>(p.A.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * p.A.size()));
    is.read(reinterpret_cast<char*>(p.rhs.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * p.rhs.size()));
  } else {
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd r(rows);
    is.read(reinterpret_cast<char*>(A.data()),
            static_cast<std::streamsize>(sizeof(double) * A.size()));
    is.read(reinterpret_cast<char*>(r.data()),
            static_cast<std::streamsize>(sizeof(double) * r.size()));
    p.A = A.cast<std::complex<double>>();
    p.rhs = r.cast<std::complex<double>>();
  }
  const auto qlen = get<std::uint64_t>(is);
  p.q.resize(qlen);
  is.read(reinterpret_cast<char*>(p.q.data()),
          static_cast<std::streamsize>(sizeof(double) * p.q.size()));
  if (!is) throw std::runtime_error("ensemble payload: truncated stream");
  return p;
}

namespace {

void put_csv_value(std::ostream& os, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  os << buf;
}

void put_csv_value(std::ostream& os, const std::complex<double>& v) {
  put_csv_value(os, v.real());
  os << ';';
  put_csv_value(os, v.imag());
}

}  // namespace

template <class Scalar>
void write_ensemble_csv(std::ostream& os, const Ensemble<Scalar>& e) {
  os << "# rows=" << e.rows() << " cols=" << e.cols() << " mode=" << e.mode.name()
     << " m=" << e.m << " m_o=" << e.m_o << " m_g=" << e.m_g << "\n";
  for (int i = 0; i < e.rows(); ++i) {
    for (int j = 0; j < e.cols(); ++j) {
      put_csv_value(os, e.A(i, j));
      os << ',';
    }
    put_csv_value(os, e.rhs[i]);
    os << "\n";
  }
}

template void write_ensemble_csv(std::ostream&, const Ensemble<double>&);
template void write_ensemble_csv(std::ostream&, const Ensemble<std::complex<double>>&);

}  // namespace polygrad
