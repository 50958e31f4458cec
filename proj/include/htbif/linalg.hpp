#pragma once

#include <lapacke.h>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "htbif/errors.hpp"

namespace htbif {

/// General band matrix in LAPACK band storage, solved by LU with partial
/// pivoting (dgbsv).
class BandMatrix {
 public:
  BandMatrix(std::size_t n, int kl, int ku)
      : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(static_cast<std::size_t>(ldab_) * n) {}

  std::size_t size() const noexcept { return n_; }
  int lower() const noexcept { return kl_; }
  int upper() const noexcept { return ku_; }

  void add(std::size_t i, std::size_t j, double value) { ab_[index(i, j)] += value; }

  double at(std::size_t i, std::size_t j) const {
    const long off = static_cast<long>(j) - static_cast<long>(i);
    if (off > ku_ || -off > kl_) return 0.0;
    return ab_[index(i, j)];
  }

  std::vector<double> multiply(std::span<const double> x) const {
    std::vector<double> y(n_, 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t j0 = i > static_cast<std::size_t>(kl_) ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + static_cast<std::size_t>(ku_));
      for (std::size_t j = j0; j <= j1; ++j) y[i] += ab_[index(i, j)] * x[j];
    }
    return y;
  }

  /// Solves A x = rhs; throws DegeneracyError on an exactly singular factor.
  std::vector<double> solve(std::span<const double> rhs) const {
    std::vector<double> ab = ab_;
    std::vector<double> x(rhs.begin(), rhs.end());
    std::vector<lapack_int> ipiv(n_);
    const lapack_int info =
        LAPACKE_dgbsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_), kl_, ku_, 1, ab.data(),
                      ldab_, ipiv.data(), x.data(), static_cast<lapack_int>(n_));
    if (info > 0) throw DegeneracyError("band matrix is singular at pivot " + std::to_string(info));
    if (info < 0) throw Error("dgbsv rejected argument " + std::to_string(-info));
    return x;
  }

 private:
  std::size_t index(std::size_t i, std::size_t j) const {
    // Column-major band layout: row kl + ku + i - j of column j.
    return static_cast<std::size_t>(kl_ + ku_ + static_cast<long>(i) - static_cast<long>(j)) +
           j * static_cast<std::size_t>(ldab_);
  }

  std::size_t n_;
  int kl_;
  int ku_;
  int ldab_;
  std::vector<double> ab_;
};

/// Symmetric tridiagonal matrix: diag[0..n), off[0..n-1).
struct SymTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const noexcept { return diag.size(); }

  /// Number of eigenvalues strictly below x (Sturm sequence count).
  int count_below(double x) const {
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < diag.size(); ++i) {
      const double o2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
      q = diag[i] - x - (i == 0 ? 0.0 : o2 / q);
      if (q == 0.0) q = -1e-300;
      if (q < 0.0) ++count;
    }
    return count;
  }

  /// The m smallest eigenvalues in ascending order (bisection, dstebz).
  std::vector<double> lowest(int m) const {
    Eigen eig = solve_range(m);
    eig.values.resize(static_cast<std::size_t>(eig.found));
    return eig.values;
  }

  /// The m smallest eigenpairs; eigenvectors by inverse iteration (dstein).
  std::pair<std::vector<double>, std::vector<std::vector<double>>> lowest_with_vectors(
      int m) const {
    Eigen eig = solve_range(m);
    const auto n = static_cast<lapack_int>(size());
    std::vector<double> z(static_cast<std::size_t>(n) * eig.found);
    std::vector<lapack_int> ifail(static_cast<std::size_t>(eig.found));
    const lapack_int info =
        LAPACKE_dstein(LAPACK_COL_MAJOR, n, diag.data(), off.data(), eig.found, eig.values.data(),
                       eig.iblock.data(), eig.isplit.data(), z.data(), n, ifail.data());
    if (info != 0) throw Error("dstein failed to converge (info " + std::to_string(info) + ")");
    std::vector<std::vector<double>> vecs;
    for (lapack_int k = 0; k < eig.found; ++k)
      vecs.emplace_back(z.begin() + k * n, z.begin() + (k + 1) * n);
    eig.values.resize(static_cast<std::size_t>(eig.found));
    return {eig.values, vecs};
  }

 private:
  struct Eigen {
    std::vector<double> values;
    std::vector<lapack_int> iblock;
    std::vector<lapack_int> isplit;
    lapack_int found = 0;
  };

  Eigen solve_range(int m) const {
    const auto n = static_cast<lapack_int>(size());
    if (m < 1) throw DomainError("need at least one eigenvalue");
    if (m > n) m = n;
    Eigen e;
    e.values.resize(static_cast<std::size_t>(n));
    e.iblock.resize(static_cast<std::size_t>(n));
    e.isplit.resize(static_cast<std::size_t>(n));
    lapack_int nsplit = 0;
    const double abstol = 2.0 * LAPACKE_dlamch('S');
    const lapack_int info =
        LAPACKE_dstebz('I', 'E', n, 0.0, 0.0, 1, m, abstol, diag.data(), off.data(), &e.found,
                       &nsplit, e.values.data(), e.iblock.data(), e.isplit.data());
    if (info != 0) throw Error("dstebz failed (info " + std::to_string(info) + ")");
    return e;
  }
};

}  // namespace htbif
