#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <vector>

#include "polygrad/basis.hpp"
#include "polygrad/index_set.hpp"

namespace polygrad {

// Per-point evaluation tables for a tensor-product basis over a fixed index
// set: one degree table per coordinate, products assembled on demand.
template <class Scalar>
class TensorBasisTables {
 public:
  TensorBasisTables(const BasisFamily& f, const IndexSet& set) : family_(f), d_(set.dim()) {
    if constexpr (std::is_same_v<Scalar, double>) {
      if (f.is_fourier())
        throw std::domain_error("Fourier tensor evaluation requires the complex scalar type");
    }
    lo_.resize(d_);
    hi_.resize(d_);
    int overall = 0;
    for (int j = 0; j < d_; ++j) {
      lo_[j] = f.is_fourier() ? set.min_entry(j) : 0;
      hi_[j] = set.max_entry(j);
      overall = std::max(overall, hi_[j]);
      if (!f.is_fourier() && set.min_entry(j) < 0)
        throw std::domain_error("polynomial families need nonnegative indices");
    }
    if (!f.is_fourier()) scales_ = orthonormal_scales(f, overall);
    val_.resize(d_);
    der_.resize(d_);
    for (int j = 0; j < d_; ++j) {
      val_[j].resize(hi_[j] - lo_[j] + 1);
      der_[j].resize(hi_[j] - lo_[j] + 1);
    }
  }

  int dim() const { return d_; }

  void at(const Eigen::VectorXd& y) {
    for (int j = 0; j < d_; ++j) {
      if (family_.is_fourier()) {
        if constexpr (std::is_same_v<Scalar, std::complex<double>>) {
          eval_basis_table_fourier(lo_[j], hi_[j], y[j], val_[j], der_[j]);
        }
      } else {
        if constexpr (std::is_same_v<Scalar, double>) {
          eval_basis_table_scaled(family_, hi_[j], y[j], scales_, val_[j], der_[j]);
        } else {
          rv_.resize(hi_[j] + 1);
          rd_.resize(hi_[j] + 1);
          eval_basis_table_scaled(family_, hi_[j], y[j], scales_, rv_, rd_);
          for (int t = 0; t <= hi_[j]; ++t) {
            val_[j][t] = rv_[t];
            der_[j][t] = rd_[t];
          }
        }
      }
    }
  }

  Scalar value(const MultiIndex& n) const {
    Scalar p = val_[0][n[0] - lo_[0]];
    for (int j = 1; j < d_; ++j) p *= val_[j][n[j] - lo_[j]];
    return p;
  }

  // partial derivative in coordinate k (1-based); k = 0 is the identity
  Scalar dk(int k, const MultiIndex& n) const {
    if (k == 0) return value(n);
    Scalar p = der_[k - 1][n[k - 1] - lo_[k - 1]];
    for (int j = 0; j < d_; ++j)
      if (j != k - 1) p *= val_[j][n[j] - lo_[j]];
    return p;
  }

 private:
  BasisFamily family_;
  int d_;
  std::vector<int> lo_, hi_;
  std::vector<std::vector<Scalar>> val_, der_;
  std::vector<double> scales_, rv_, rd_;
};

}  // namespace polygrad
