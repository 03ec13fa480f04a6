#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "egstokes/assembly.hpp"

namespace egstokes {

struct AmgOptions {
  double strength_threshold = 0.08;  // |a_ij| >= theta sqrt(a_ii a_jj)
  Index max_coarse = 10;
  int max_levels = 12;
  double prolongator_omega = 4.0 / 3.0;  // scaled by 1 / rho(D^-1 A)
};

/// Smoothed-aggregation AMG for SPD matrices, used as a V-cycle preconditioner.
///
/// Near-null space is the constant vector per aggregate; smoother is one
/// symmetric Gauss-Seidel sweep before and after the coarse correction.
class SmoothedAggregationAmg {
 public:
  explicit SmoothedAggregationAmg(const SpMat& A, const AmgOptions& options = {});

  /// One V-cycle applied to b from a zero initial guess.
  [[nodiscard]] Vec vcycle(const Vec& b) const;

  [[nodiscard]] int num_levels() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] std::vector<Index> level_sizes() const;
  /// Sum of nnz over all levels divided by nnz of the fine matrix.
  [[nodiscard]] double operator_complexity() const;

 private:
  using RowMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
  struct Level {
    RowMat A;
    Vec inv_diag;
    SpMat P;  // to the next coarser level
    SpMat R;  // P^T
  };

  void symmetric_gauss_seidel(const Level& lv, const Vec& b, Vec& x) const;
  Vec cycle(std::size_t l, const Vec& b) const;

  std::vector<Level> levels_;
  Eigen::LDLT<Eigen::MatrixXd> coarse_;
};

}  // namespace egstokes
