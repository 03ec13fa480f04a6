#include "egstokes/amg.hpp"

#include <cmath>
#include <stdexcept>

namespace egstokes {

namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<std::vector<Index>> strength_graph(const SpMat& A, double theta) {
  const Vec d = A.diagonal();
  std::vector<std::vector<Index>> nbr(A.rows());
  for (Index j = 0; j < A.outerSize(); ++j) {
    for (SpMat::InnerIterator it(A, j); it; ++it) {
      const Index i = it.row();
      if (i == j) continue;
      if (std::abs(it.value()) >= theta * std::sqrt(std::abs(d[i] * d[j]))) nbr[i].push_back(j);
    }
  }
  return nbr;
}

// Greedy three-pass aggregation; nodes without strong neighbours stay
// unaggregated (-1) and are left to the smoother.
std::vector<Index> aggregate(const std::vector<std::vector<Index>>& nbr, Index& count) {
  const Index n = static_cast<Index>(nbr.size());
  std::vector<Index> agg(n, -1);
  count = 0;
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0 || nbr[i].empty()) continue;
    bool free = true;
    for (Index j : nbr[i]) free = free && agg[j] < 0;
    if (!free) continue;
    agg[i] = count;
    for (Index j : nbr[i]) agg[j] = count;
    ++count;
  }
  std::vector<Index> pass2 = agg;
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0) continue;
    for (Index j : nbr[i]) {
      if (agg[j] >= 0) {
        pass2[i] = agg[j];
        break;
      }
    }
  }
  agg = std::move(pass2);
  for (Index i = 0; i < n; ++i) {
    if (agg[i] >= 0 || nbr[i].empty()) continue;
    agg[i] = count;
    for (Index j : nbr[i]) {
      if (agg[j] < 0) agg[j] = count;
    }
    ++count;
  }
  return agg;
}

double spectral_radius_DinvA(const SpMat& A, const Vec& inv_diag) {
  const Index n = A.rows();
  Vec x(n);
  for (Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * std::sin(1.0 + i);
  double lambda = 0.0;
  for (int it = 0; it < 25; ++it) {
    x /= x.norm();
    Vec y = inv_diag.cwiseProduct(A * x);
    lambda = y.norm();
    if (lambda == 0.0) break;
    x = y;
  }
  return 1.05 * lambda;
}

}  // namespace

SmoothedAggregationAmg::SmoothedAggregationAmg(const SpMat& A_fine, const AmgOptions& opt) {
  if (A_fine.rows() != A_fine.cols()) throw std::invalid_argument("SmoothedAggregationAmg: matrix not square");
  SpMat A = A_fine;
  while (true) {
    Level lv;
    lv.A = A;
    const Vec d = A.diagonal();
    if ((d.array() <= 0.0).any()) throw std::invalid_argument("SmoothedAggregationAmg: nonpositive diagonal entry");
    lv.inv_diag = d.cwiseInverse();
    const Index n = A.rows();
    if (n <= opt.max_coarse || static_cast<int>(levels_.size()) + 1 >= opt.max_levels) {
      levels_.push_back(std::move(lv));
      break;
    }
    Index nc = 0;
    const std::vector<Index> agg = aggregate(strength_graph(A, opt.strength_threshold), nc);
    if (nc == 0 || nc >= 0.9 * n) {
      levels_.push_back(std::move(lv));
      break;
    }
    std::vector<double> size(nc, 0.0);
    for (Index i = 0; i < n; ++i) {
      if (agg[i] >= 0) size[agg[i]] += 1.0;
    }
    std::vector<Triplet> t;
    for (Index i = 0; i < n; ++i) {
      if (agg[i] >= 0) t.emplace_back(i, agg[i], 1.0 / std::sqrt(size[agg[i]]));
    }
    SpMat T(n, nc);
    T.setFromTriplets(t.begin(), t.end());
    const double omega = opt.prolongator_omega / spectral_radius_DinvA(A, lv.inv_diag);
    const SpMat AT = A * T;
    const SpMat DAT = lv.inv_diag.asDiagonal() * AT;
    SpMat P = T - omega * DAT;
    P.prune(0.0);
    P.makeCompressed();
    lv.R = P.transpose();
    SpMat Ac = lv.R * (A * P);
    Ac.makeCompressed();
    lv.P = std::move(P);
    levels_.push_back(std::move(lv));
    A = std::move(Ac);
  }
  coarse_.compute(Eigen::MatrixXd(levels_.back().A));
}

std::vector<Index> SmoothedAggregationAmg::level_sizes() const {
  std::vector<Index> out;
  for (const Level& lv : levels_) out.push_back(lv.A.rows());
  return out;
}

double SmoothedAggregationAmg::operator_complexity() const {
  double total = 0.0;
  for (const Level& lv : levels_) total += static_cast<double>(lv.A.nonZeros());
  return total / static_cast<double>(levels_.front().A.nonZeros());
}

void SmoothedAggregationAmg::symmetric_gauss_seidel(const Level& lv, const Vec& b, Vec& x) const {
  const Index n = lv.A.rows();
  auto relax = [&](Index i) {
    double s = b[i];
    for (RowMat::InnerIterator it(lv.A, i); it; ++it) {
      if (it.col() != i) s -= it.value() * x[it.col()];
    }
    x[i] = s * lv.inv_diag[i];
  };
  for (Index i = 0; i < n; ++i) relax(i);
  for (Index i = n - 1; i >= 0; --i) relax(i);
}

Vec SmoothedAggregationAmg::cycle(std::size_t l, const Vec& b) const {
  if (l + 1 == levels_.size()) return coarse_.solve(b);
  const Level& lv = levels_[l];
  Vec x = Vec::Zero(b.size());
  symmetric_gauss_seidel(lv, b, x);
  const Vec r = b - lv.A * x;
  x += lv.P * cycle(l + 1, lv.R * r);
  symmetric_gauss_seidel(lv, b, x);
  return x;
}

Vec SmoothedAggregationAmg::vcycle(const Vec& b) const { return cycle(0, b); }

}  // namespace egstokes
