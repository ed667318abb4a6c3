#include "polygrad/index_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace polygrad {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
  const long sa = std::accumulate(a.begin(), a.end(), 0L);
  const long sb = std::accumulate(b.begin(), b.end(), 0L);
  if (sa != sb) return sa < sb;
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

IndexSet::IndexSet(int dim, std::vector<MultiIndex> indices) : dim_(dim), indices_(std::move(indices)) {
  if (dim_ < 1) throw std::domain_error("index set dimension must be >= 1");
  for (const auto& n : indices_)
    if (static_cast<int>(n.size()) != dim_)
      throw std::domain_error("multi-index dimension mismatch");
  std::sort(indices_.begin(), indices_.end(), graded_lex_less);
  indices_.erase(std::unique(indices_.begin(), indices_.end()), indices_.end());
  for (int i = 0; i < static_cast<int>(indices_.size()); ++i) position_[indices_[i]] = i;
}

bool IndexSet::contains(const MultiIndex& n) const { return position_.count(n) > 0; }

std::optional<int> IndexSet::find(const MultiIndex& n) const {
  auto it = position_.find(n);
  if (it == position_.end()) return std::nullopt;
  return it->second;
}

int IndexSet::max_entry(int coord) const {
  int m = 0;
  for (const auto& n : indices_) m = std::max(m, n[coord]);
  return m;
}

int IndexSet::min_entry(int coord) const {
  int m = 0;
  for (const auto& n : indices_) m = std::min(m, n[coord]);
  return m;
}

double WeightVector::at(const MultiIndex& n) const {
  auto it = w_.find(n);
  if (it == w_.end()) throw std::out_of_range("weight not defined on multi-index");
  return it->second;
}

bool WeightVector::defined_on(const IndexSet& set) const {
  for (const auto& n : set.indices())
    if (!w_.count(n)) return false;
  return true;
}

WeightVector WeightVector::ones(const IndexSet& set) {
  std::map<MultiIndex, double> w;
  for (const auto& n : set.indices()) w[n] = 1.0;
  return WeightVector(std::move(w));
}

namespace {

void hc_descend(int d, int coord, std::uint64_t budget, MultiIndex& cur,
                std::vector<MultiIndex>& out, std::uint64_t cap) {
  if (coord == d) {
    if (out.size() >= cap) throw std::length_error("hyperbolic cross exceeds cardinality cap");
    out.push_back(cur);
    return;
  }
  for (std::uint64_t v = 1; v <= budget; ++v) {
    cur[coord] = static_cast<int>(v - 1);
    hc_descend(d, coord + 1, budget / v, cur, out, cap);
  }
  cur[coord] = 0;
}

}  // namespace

IndexSet hyperbolic_cross(int d, int s, std::uint64_t cap) {
  if (d < 1) throw std::domain_error("hyperbolic cross: d >= 1 required");
  if (s < 1) throw std::domain_error("hyperbolic cross: s >= 1 required");
  std::vector<MultiIndex> out;
  MultiIndex cur(d, 0);
  hc_descend(d, 0, static_cast<std::uint64_t>(s) + 1, cur, out, cap);
  return IndexSet(d, std::move(out));
}

bool is_lower(const IndexSet& set) {
  for (const auto& n : set.indices())
    for (int v : n)
      if (v < 0) throw std::domain_error("is_lower requires nonnegative entries");
  for (const auto& n : set.indices()) {
    MultiIndex m = n;
    for (int k = 0; k < set.dim(); ++k) {
      if (n[k] == 0) continue;
      m[k] = n[k] - 1;
      const bool present = set.contains(m);
      m[k] = n[k];
      if (!present) return false;
    }
  }
  return true;
}

double weighted_cardinality(const IndexSet& set, const WeightVector& w) {
  double total = 0.0;
  for (const auto& n : set.indices()) {
    const double wn = w.at(n);
    total += wn * wn;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Grid suprema
// ---------------------------------------------------------------------------

namespace {

// Endpoint exponent of the sampling density at y = +1 / -1, as a power of
// (1 -+ y); used to decide whether ratio quantities stay bounded there.
void density_exponents(const Density& mu, double& ea, double& eb) {
  switch (mu.kind) {
    case DensityKind::UniformOnTorus:
      ea = eb = 0.0;
      return;
    case DensityKind::ChebyshevArcsine:
      ea = eb = -0.5;
      return;
    case DensityKind::MatchOrthogonality:
      if (mu.family.is_fourier()) {
        ea = eb = 0.0;
      } else {
        ea = mu.family.alpha;
        eb = mu.family.beta;
      }
      return;
  }
  ea = eb = 0.0;
}

struct SupTables {
  std::vector<double> u;         // sup sqrt(nu/mu) |phi_n|
  std::vector<double> dchi;      // sup (chi/mu) |phi_n'|^2
};

// Adaptive Chebyshev-distributed grid supremum for all degrees at once.
// Starts at 2^12 points and doubles until stable to 1e-6 relative; throws if
// still growing at the refinement limit (the supremum is then divergent).
SupTables grid_sup_tables(const BasisFamily& f, const Density& mu, int nmax) {
  const auto scales = orthonormal_scales(f, nmax);
  double mu_ea, mu_eb;
  density_exponents(mu, mu_ea, mu_eb);
  const bool endpoints_u = (f.alpha - mu_ea >= 0.0) && (f.beta - mu_eb >= 0.0);
  const bool endpoints_d = (f.alpha + 1.0 - mu_ea >= 0.0) && (f.beta + 1.0 - mu_eb >= 0.0);

  std::vector<double> val(nmax + 1), der(nmax + 1);
  auto accumulate_point = [&](double y, SupTables& t, bool at_endpoint) {
    const double m = mu.pdf1(y);
    const double ru = std::sqrt(density_nu(f, y) / m);
    const double rd = weight_chi(f, y) / m;
    eval_basis_table_scaled(f, nmax, y, scales, val, der);
    for (int n = 0; n <= nmax; ++n) {
      if (!at_endpoint || endpoints_u) t.u[n] = std::max(t.u[n], ru * std::abs(val[n]));
      if (!at_endpoint || endpoints_d) t.dchi[n] = std::max(t.dchi[n], rd * der[n] * der[n]);
    }
  };

  SupTables prev;
  bool have_prev = false;
  for (int level = 12; level <= 20; ++level) {
    const int M = 1 << level;
    SupTables cur;
    cur.u.assign(nmax + 1, 0.0);
    cur.dchi.assign(nmax + 1, 0.0);
    if (endpoints_u || endpoints_d) {
      accumulate_point(1.0, cur, true);
      accumulate_point(-1.0, cur, true);
    }
    for (int j = 1; j < M; ++j) accumulate_point(std::cos(kPi * j / M), cur, false);

    if (have_prev) {
      double rel = 0.0;
      for (int n = 0; n <= nmax; ++n) {
        rel = std::max(rel, std::abs(cur.u[n] - prev.u[n]) / std::max(cur.u[n], 1e-300));
        rel = std::max(rel, std::abs(cur.dchi[n] - prev.dchi[n]) / std::max(cur.dchi[n], 1e-300));
      }
      if (rel <= 1e-6) return cur;
      if (level == 20 && rel > 1e-4)
        throw std::domain_error(
            "intrinsic weight supremum still growing at grid refinement limit "
            "(sampling density too light at the endpoints for this basis)");
    }
    prev = std::move(cur);
    have_prev = true;
  }
  return prev;
}

}  // namespace

WeightEngine::WeightEngine(const BasisFamily& family, const Density& mu)
    : family_(family), mu_(mu) {
  if (family_.is_fourier()) {
    if (mu.kind == DensityKind::ChebyshevArcsine)
      throw std::domain_error("Fourier basis requires the uniform sampling density");
  }
}

void WeightEngine::ensure(int nmax) const {
  if (static_cast<int>(u1_.size()) > nmax) return;
  // grow geometrically so degree-by-degree queries do not retabulate
  nmax = std::max({nmax, 2 * static_cast<int>(u1_.size()), 15});
  if (family_.is_fourier()) {
    // |phi_n| = 1 so u = 1; the derivative ratio equals the eigenvalue.
    u1_.resize(nmax + 1, 1.0);
    kappa1_.resize(nmax + 1);
    for (int n = 0; n <= nmax; ++n) kappa1_[n] = kPi * kPi * n * n;
    return;
  }
  const auto tables = grid_sup_tables(family_, mu_, nmax);
  u1_ = tables.u;
  kappa1_.resize(nmax + 1);
  kappa1_[0] = 0.0;
  for (int n = 1; n <= nmax; ++n) kappa1_[n] = tables.dchi[n] / (u1_[n] * u1_[n]);
}

double WeightEngine::u1(int n) const {
  const int a = std::abs(n);
  ensure(a);
  return u1_[a];
}

double WeightEngine::kappa1(int n) const {
  const int a = std::abs(n);
  ensure(a);
  return kappa1_[a];
}

double WeightEngine::u(const MultiIndex& n) const {
  double p = 1.0;
  for (int v : n) p *= u1(v);
  return p;
}

double WeightEngine::kappa(const MultiIndex& n) const {
  double s = 0.0;
  for (int v : n) s += kappa1(v);
  return s;
}

double intrinsic_weight(const BasisFamily& family, const Density& mu, const MultiIndex& n) {
  return WeightEngine(family, mu).u(n);
}

double kappa_1d(const BasisFamily& family, const Density& mu, int n) {
  return WeightEngine(family, mu).kappa1(n);
}

double kappa(const BasisFamily& family, const Density& mu, const MultiIndex& n) {
  return WeightEngine(family, mu).kappa(n);
}

// ---------------------------------------------------------------------------
// Lower set search
// ---------------------------------------------------------------------------

namespace {

struct LowerSearchResult {
  double best = 0.0;
  std::vector<MultiIndex> argbest;
  std::uint64_t visited = 0;
  bool completed = true;
};

// Maximize sum of val(n) over lower sets of size <= smax.  Every lower set
// is generated exactly once by inserting indices in graded-lex order (each
// graded-lex prefix of a lower set is itself lower).
LowerSearchResult max_over_lower_sets(int d, int smax,
                                      const std::function<double(const MultiIndex&)>& val,
                                      const std::function<bool(const MultiIndex&)>& member,
                                      std::uint64_t cap) {
  LowerSearchResult res;
  if (smax < 1) return res;
  const MultiIndex root(d, 0);
  if (member && !member(root)) return res;

  std::vector<MultiIndex> delta;
  std::set<MultiIndex> in_delta;

  std::function<void(double)> visit = [&](double sum) {
    ++res.visited;
    if (!res.completed) return;
    if (res.visited > cap) {
      res.completed = false;
      return;
    }
    if (sum > res.best) {
      res.best = sum;
      res.argbest = delta;
    }
    if (static_cast<int>(delta.size()) >= smax) return;

    // Frontier: indices whose predecessors are all present, appearing after
    // the last inserted index in graded-lex order.
    std::set<MultiIndex> frontier;
    const MultiIndex& last = delta.back();
    for (const auto& m : delta) {
      MultiIndex c = m;
      for (int k = 0; k < d; ++k) {
        c[k] += 1;
        const bool fresh = !in_delta.count(c);
        if (fresh && graded_lex_less(last, c) && (!member || member(c))) {
          bool preds_in = true;
          for (int j = 0; j < d && preds_in; ++j) {
            if (c[j] == 0) continue;
            c[j] -= 1;
            preds_in = in_delta.count(c) > 0;
            c[j] += 1;
          }
          if (preds_in) frontier.insert(c);
        }
        c[k] -= 1;
      }
    }
    for (const auto& c : frontier) {
      delta.push_back(c);
      in_delta.insert(c);
      visit(sum + val(c));
      in_delta.erase(c);
      delta.pop_back();
      if (!res.completed) return;
    }
  };

  delta.push_back(root);
  in_delta.insert(root);
  visit(val(root));
  return res;
}

bool near_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

double paper_bound_K(const BasisFamily& f, int s) {
  if (f.kind != BasisKind::Jacobi)
    throw std::domain_error("closed-form K(s) bound is only available for Jacobi families");
  const double a = f.alpha, b = f.beta;
  if (a == -0.5 && b == -0.5) return std::pow(s, std::log(3.0) / std::log(2.0));
  if (near_integer(a) && near_integer(b) && a >= 0.0 && b >= 0.0)
    return std::pow(s, 2.0 * std::max(a, b) + 2.0);
  if (a == b && near_integer(2.0 * a + 1.0) && 2.0 * a + 1.0 >= 1.0)
    return std::pow(s, 2.0 * a + 2.0);
  throw std::domain_error(
      "closed-form K(s) bound requires alpha,beta nonnegative integers, "
      "alpha=beta with 2*alpha+1 a positive integer, or alpha=beta=-1/2");
}

}  // namespace

double K_of_s(const BasisFamily& family, const Density& mu, int d, int s, KMode mode,
              std::uint64_t visit_cap) {
  if (d < 1 || s < 1) throw std::domain_error("K(s): d >= 1 and s >= 1 required");
  if (mode == KMode::PaperBound) return paper_bound_K(family, s);
  WeightEngine eng(family, mu);
  eng.u1(s);  // warm the 1D table once
  auto val = [&](const MultiIndex& n) {
    const double un = eng.u(n);
    return un * un;
  };
  auto res = max_over_lower_sets(d, s, val, nullptr, visit_cap);
  if (!res.completed)
    throw std::runtime_error("exact K(s) search exceeded the visit cap; reduce s or d");
  return res.best;
}

namespace {

// Downward closure of a set of indices.
std::set<MultiIndex> lower_closure(const std::vector<MultiIndex>& seed) {
  std::set<MultiIndex> closure;
  std::vector<MultiIndex> stack(seed.begin(), seed.end());
  while (!stack.empty()) {
    MultiIndex n = stack.back();
    stack.pop_back();
    if (closure.count(n)) continue;
    closure.insert(n);
    for (std::size_t k = 0; k < n.size(); ++k) {
      if (n[k] == 0) continue;
      MultiIndex m = n;
      m[k] -= 1;
      if (!closure.count(m)) stack.push_back(m);
    }
  }
  return closure;
}

}  // namespace

LowerSelection best_lower_s_term(const std::map<MultiIndex, double>& x, const WeightVector& v,
                                 int s, std::uint64_t search_cap) {
  LowerSelection sel;
  if (x.empty()) {
    sel.delta = IndexSet(1, {});
    return sel;
  }
  const int d = static_cast<int>(x.begin()->first.size());
  for (const auto& [n, c] : x) {
    if (static_cast<int>(n.size()) != d) throw std::domain_error("coefficient map dimension mismatch");
    for (int e : n)
      if (e < 0) throw std::domain_error("lower-set selection requires nonnegative indices");
  }

  double total = 0.0;
  std::vector<MultiIndex> supp;
  for (const auto& [n, c] : x) {
    if (c == 0.0) continue;
    supp.push_back(n);
    total += v.at(n) * std::abs(c);
  }
  if (supp.empty()) {
    sel.delta = IndexSet(d, {});
    return sel;
  }

  const auto closure = lower_closure(supp);
  auto mass = [&](const MultiIndex& n) {
    auto it = x.find(n);
    return it == x.end() ? 0.0 : v.at(n) * std::abs(it->second);
  };

  if (static_cast<int>(closure.size()) <= s) {
    sel.delta = IndexSet(d, {closure.begin(), closure.end()});
    sel.sigma = 0.0;
    return sel;
  }

  auto member = [&](const MultiIndex& n) { return closure.count(n) > 0; };
  auto res = max_over_lower_sets(d, s, mass, member, search_cap);
  if (res.completed) {
    sel.delta = IndexSet(d, res.argbest);
    sel.sigma = total - res.best;
    sel.exact = true;
    return sel;
  }

  // Greedy fallback: repeatedly add the index with the best weighted mass
  // per lower-closure cost.
  std::set<MultiIndex> delta;
  double kept = 0.0;
  while (static_cast<int>(delta.size()) < s) {
    double best_ratio = 0.0;
    MultiIndex best_n;
    std::vector<MultiIndex> best_need;
    for (const auto& n : closure) {
      if (delta.count(n)) continue;
      std::vector<MultiIndex> need;
      double gain = 0.0;
      for (const auto& m : lower_closure({n})) {
        if (!delta.count(m)) {
          need.push_back(m);
          gain += mass(m);
        }
      }
      if (static_cast<int>(delta.size() + need.size()) > s) continue;
      const double ratio = gain / static_cast<double>(need.size());
      if (ratio > best_ratio || (ratio == best_ratio && ratio > 0.0 && !best_need.empty() &&
                                 graded_lex_less(n, best_n))) {
        best_ratio = ratio;
        best_n = n;
        best_need = std::move(need);
      }
    }
    if (best_need.empty() || best_ratio <= 0.0) break;
    for (const auto& m : best_need) {
      delta.insert(m);
      kept += mass(m);
    }
  }
  sel.delta = IndexSet(d, {delta.begin(), delta.end()});
  sel.sigma = total - kept;
  sel.exact = false;
  return sel;
}

void write_index_set(std::ostream& os, const IndexSet& set) {
  os << "d=" << set.dim() << "\n";
  for (const auto& n : set.indices()) {
    for (int k = 0; k < set.dim(); ++k) {
      if (k) os << ' ';
      os << n[k];
    }
    os << "\n";
  }
}

IndexSet read_index_set(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("d=", 0) != 0)
    throw std::runtime_error("index set stream: missing d= header");
  const int d = std::stoi(line.substr(2));
  std::vector<MultiIndex> indices;
  while (std::getline(is, line)) {
    if (line.empty()) break;
    std::istringstream ls(line);
    MultiIndex n(d);
    for (int k = 0; k < d; ++k)
      if (!(ls >> n[k])) throw std::runtime_error("index set stream: short row");
    indices.push_back(std::move(n));
  }
  return IndexSet(d, std::move(indices));
}

}  // namespace polygrad
