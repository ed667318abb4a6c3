#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <vector>

#include "polygrad/basis.hpp"

namespace polygrad {

// d-dimensional multi-index; entries are signed to accommodate the Fourier
// basis, polynomial families use nonnegative entries.
using MultiIndex = std::vector<int>;

// total degree first, then lexicographic
bool graded_lex_less(const MultiIndex& a, const MultiIndex& b);

// Ordered set of distinct multi-indices of a fixed dimension.  Iteration
// order is graded lexicographic and stable, so assembled matrices and
// serialized files are reproducible.
class IndexSet {
 public:
  IndexSet() = default;
  IndexSet(int dim, std::vector<MultiIndex> indices);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(indices_.size()); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& operator[](int i) const { return indices_[i]; }
  bool contains(const MultiIndex& n) const;
  // position in iteration order, if present
  std::optional<int> find(const MultiIndex& n) const;
  int max_entry(int coord) const;
  int min_entry(int coord) const;

 private:
  int dim_ = 0;
  std::vector<MultiIndex> indices_;                 // graded-lex sorted
  std::map<MultiIndex, int> position_;
};

// Positive weights on multi-indices.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::map<MultiIndex, double> w) : w_(std::move(w)) {}
  void set(const MultiIndex& n, double v) { w_[n] = v; }
  double at(const MultiIndex& n) const;
  bool defined_on(const IndexSet& set) const;
  static WeightVector ones(const IndexSet& set);

 private:
  std::map<MultiIndex, double> w_;
};

// { n : prod(n_k + 1) <= s + 1 }, enumerated in graded-lex order.  Throws if
// the cardinality would exceed `cap`.
IndexSet hyperbolic_cross(int d, int s, std::uint64_t cap = 10'000'000);

// True iff the set contains every coordinatewise-dominated index of each of
// its members.  Entries must be nonnegative.
bool is_lower(const IndexSet& set);

// sum of squared weights over the set
double weighted_cardinality(const IndexSet& set, const WeightVector& w);

// Caches the per-degree grid suprema behind the intrinsic weights u_n and
// the derivative quantities kappa_n for one (family, sampling density) pair.
// Multivariate values are products (u) and sums (kappa) of the 1D tables.
class WeightEngine {
 public:
  WeightEngine(const BasisFamily& family, const Density& mu);

  double u1(int n) const;        // per-coordinate sup of sqrt(nu/mu)|phi_n|
  double kappa1(int n) const;    // u_n^{-2} sup (chi/mu)|phi_n'|^2
  double u(const MultiIndex& n) const;
  double kappa(const MultiIndex& n) const;

  const BasisFamily& family() const { return family_; }
  const Density& mu() const { return mu_; }

 private:
  void ensure(int nmax) const;

  BasisFamily family_;
  Density mu_;
  mutable std::vector<double> u1_, kappa1_;
};

// Intrinsic weight u_n = sup over the domain of sqrt(nu/mu) |phi_n|.
// Throws if the supremum is still growing at the grid refinement limit.
double intrinsic_weight(const BasisFamily& family, const Density& mu, const MultiIndex& n);
double kappa_1d(const BasisFamily& family, const Density& mu, int n);
double kappa(const BasisFamily& family, const Density& mu, const MultiIndex& n);

enum class KMode { Exact, PaperBound };

// K(s): the largest u-weighted cardinality among lower sets of size <= s in
// dimension d.  Exact mode searches all lower sets (depth-first, visit cap);
// PaperBound evaluates the closed-form bound for the covered parameters.
double K_of_s(const BasisFamily& family, const Density& mu, int d, int s, KMode mode,
              std::uint64_t visit_cap = 10'000'000);

struct LowerSelection {
  IndexSet delta;
  double sigma = 0.0;   // weighted l1 mass left outside delta
  bool exact = true;
};

// Best lower-set s-term selection: minimizes the weighted l1 norm of the
// coefficients outside a lower set of size <= s.  Exhaustive below
// `search_cap` candidate sets, greedy lower-closure heuristic above it.
LowerSelection best_lower_s_term(const std::map<MultiIndex, double>& x, const WeightVector& v,
                                 int s, std::uint64_t search_cap = 2'000'000);

// Line-oriented text format: header "d=<d>", one multi-index per line.
void write_index_set(std::ostream& os, const IndexSet& set);
IndexSet read_index_set(std::istream& is);

}  // namespace polygrad
