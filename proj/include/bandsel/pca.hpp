#ifndef BANDSEL_PCA_HPP
#define BANDSEL_PCA_HPP

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "bandsel/dataset.hpp"
#include "bandsel/ranking.hpp"

namespace bandsel {

template <class Scalar = double>
struct EigenDecomposition {
  VectorX<Scalar> eigenvalues;   // descending
  MatrixX<Scalar> eigenvectors;  // orthonormal columns, aligned with values
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps rotate every
/// off-diagonal pair until the off-diagonal Frobenius norm drops below
/// 1e-10 * trace (or machine-zero for traceless input).
template <class Scalar>
EigenDecomposition<Scalar> symmetric_eigen(MatrixX<Scalar> a) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("symmetric_eigen: not square");
  MatrixX<Scalar> v = MatrixX<Scalar>::Identity(n, n);
  const Scalar threshold =
      std::max(static_cast<Scalar>(1e-10) * std::abs(a.trace()),
               std::numeric_limits<Scalar>::denorm_min());

  for (int sweep = 0; sweep < 128; ++sweep) {
    Scalar off = 0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += 2 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= threshold) break;

    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const Scalar apq = a(p, q);
        if (apq == Scalar(0)) continue;
        const Scalar tau = (a(q, q) - a(p, p)) / (2 * apq);
        const Scalar t = (tau >= 0 ? Scalar(1) : Scalar(-1)) /
                         (std::abs(tau) + std::sqrt(1 + tau * tau));
        const Scalar c = Scalar(1) / std::sqrt(1 + t * t);
        const Scalar s = t * c;

        const Scalar app = a(p, p), aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0;
        for (Eigen::Index r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const Scalar arp = a(r, p), arq = a(r, q);
          a(r, p) = a(p, r) = c * arp - s * arq;
          a(r, q) = a(q, r) = s * arp + c * arq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const Scalar vrp = v(r, p), vrq = v(r, q);
          v(r, p) = c * vrp - s * vrq;
          v(r, q) = s * vrp + c * vrq;
        }
      }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) {
                     return a(i, i) > a(j, j);
                   });
  EigenDecomposition<Scalar> out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out.eigenvalues[i] = a(order[static_cast<std::size_t>(i)],
                           order[static_cast<std::size_t>(i)]);
    out.eigenvectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

/// Sample covariance with divisor N-1.
template <class Scalar>
MatrixX<Scalar> covariance_matrix(
    const Eigen::Ref<const MatrixX<Scalar>>& samples) {
  if (samples.rows() < 2)
    throw std::invalid_argument("covariance: need at least 2 samples");
  MatrixX<Scalar> centered =
      samples.rowwise() - samples.colwise().mean();
  return (centered.transpose() * centered) /
         static_cast<Scalar>(samples.rows() - 1);
}

template <class Scalar>
EigenDecomposition<Scalar> covariance_eigen(const Dataset<Scalar>& train) {
  return symmetric_eigen(
      covariance_matrix<Scalar>(train.samples));
}

/// Band score = sum_i lambda_i * v_i[band]^2, the variance carried by the
/// band across all components; with a full decomposition this is exactly
/// the band's sample variance. Descending, ties to the lower index.
template <class Scalar>
FeatureRanking<Scalar> rank_pca(const EigenDecomposition<Scalar>& e) {
  VectorX<Scalar> score =
      e.eigenvectors.array().square().matrix() * e.eigenvalues;
  return rank_by_score(score, "pca");
}

}  // namespace bandsel

#endif
