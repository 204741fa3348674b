#ifndef BANDSEL_MUTUAL_INFO_HPP
#define BANDSEL_MUTUAL_INFO_HPP

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsel/dataset.hpp"
#include "bandsel/parallel.hpp"
#include "bandsel/ranking.hpp"

namespace bandsel {

/// Equal-width bin codes per sample per band, plus the bin geometry.
/// Constant bands collapse to code 0 (lower == upper marks them).
template <class Scalar = double>
struct DiscretizedData {
  Eigen::MatrixXi codes;  // N x D, values in 0..bin_count-1
  int bin_count = 0;
  VectorX<Scalar> lower;  // per-band bin range
  VectorX<Scalar> upper;

  Eigen::Index sample_count() const { return codes.rows(); }
  Eigen::Index band_count() const { return codes.cols(); }

  /// Strictly increasing edges of the band's bins; empty for constant bands.
  std::vector<Scalar> edges(Eigen::Index band) const {
    std::vector<Scalar> e;
    if (upper[band] <= lower[band]) return e;
    for (int k = 0; k <= bin_count; ++k)
      e.push_back(lower[band] +
                  (upper[band] - lower[band]) * static_cast<Scalar>(k) /
                      static_cast<Scalar>(bin_count));
    return e;
  }
};

/// Equal-width discretization over [min, max] per band; the top bin is
/// right-closed so the maximum lands in code B-1.
template <class Scalar>
DiscretizedData<Scalar> discretize(const Dataset<Scalar>& d, int bin_count) {
  if (bin_count < 2) throw std::invalid_argument("discretize: need B >= 2");
  DiscretizedData<Scalar> out;
  out.bin_count = bin_count;
  out.codes.resize(d.sample_count(), d.band_count());
  out.lower.resize(d.band_count());
  out.upper.resize(d.band_count());
  for (Eigen::Index j = 0; j < d.band_count(); ++j) {
    const Scalar lo = d.samples.col(j).minCoeff();
    const Scalar hi = d.samples.col(j).maxCoeff();
    out.lower[j] = lo;
    out.upper[j] = hi;
    if (hi <= lo) {
      out.codes.col(j).setZero();
      continue;
    }
    const Scalar width = (hi - lo) / static_cast<Scalar>(bin_count);
    for (Eigen::Index i = 0; i < d.sample_count(); ++i) {
      auto code = static_cast<int>((d.samples(i, j) - lo) / width);
      out.codes(i, j) = std::min(code, bin_count - 1);
    }
  }
  return out;
}

namespace detail {

inline int alphabet_of(const Eigen::Ref<const Eigen::VectorXi>& codes) {
  int top = 0;
  for (Eigen::Index i = 0; i < codes.size(); ++i) {
    if (codes[i] < 0) throw std::invalid_argument("codes must be nonnegative");
    top = std::max(top, codes[i]);
  }
  return top + 1;
}

}  // namespace detail

/// Plug-in mutual information in bits over the observed cells, with the
/// 0 log 0 := 0 convention. Arguments are canonicalized first so the
/// estimate is exactly symmetric despite float summation order.
inline double mutual_info(const Eigen::Ref<const Eigen::VectorXi>& x,
                          const Eigen::Ref<const Eigen::VectorXi>& y) {
  const Eigen::Index n = x.size();
  if (n != y.size() || n == 0)
    throw std::invalid_argument("mutual_info: length mismatch or empty");
  if (std::lexicographical_compare(y.data(), y.data() + n, x.data(),
                                   x.data() + n))
    return mutual_info(y, x);
  const int ax = detail::alphabet_of(x);
  const int ay = detail::alphabet_of(y);
  std::vector<double> joint(static_cast<std::size_t>(ax) * ay, 0.0);
  std::vector<double> px(static_cast<std::size_t>(ax), 0.0);
  std::vector<double> py(static_cast<std::size_t>(ay), 0.0);
  const double unit = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    joint[static_cast<std::size_t>(x[i]) * ay + y[i]] += unit;
    px[static_cast<std::size_t>(x[i])] += unit;
    py[static_cast<std::size_t>(y[i])] += unit;
  }
  double info = 0;
  for (int a = 0; a < ax; ++a)
    for (int b = 0; b < ay; ++b) {
      const double p = joint[static_cast<std::size_t>(a) * ay + b];
      if (p > 0) info += p * std::log2(p / (px[a] * py[b]));
    }
  return info;
}

/// I(X;Y|Z), same estimator, summed over the conditioning alphabet.
inline double conditional_mi(const Eigen::Ref<const Eigen::VectorXi>& x,
                             const Eigen::Ref<const Eigen::VectorXi>& y,
                             const Eigen::Ref<const Eigen::VectorXi>& z) {
  const Eigen::Index n = x.size();
  if (n != y.size() || n != z.size() || n == 0)
    throw std::invalid_argument("conditional_mi: length mismatch or empty");
  const int ax = detail::alphabet_of(x);
  const int ay = detail::alphabet_of(y);
  const int az = detail::alphabet_of(z);
  std::vector<double> xyz(static_cast<std::size_t>(ax) * ay * az, 0.0);
  std::vector<double> xz(static_cast<std::size_t>(ax) * az, 0.0);
  std::vector<double> yz(static_cast<std::size_t>(ay) * az, 0.0);
  std::vector<double> pz(static_cast<std::size_t>(az), 0.0);
  const double unit = 1.0 / static_cast<double>(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    xyz[(static_cast<std::size_t>(x[i]) * ay + y[i]) * az + z[i]] += unit;
    xz[static_cast<std::size_t>(x[i]) * az + z[i]] += unit;
    yz[static_cast<std::size_t>(y[i]) * az + z[i]] += unit;
    pz[static_cast<std::size_t>(z[i])] += unit;
  }
  double info = 0;
  for (int a = 0; a < ax; ++a)
    for (int b = 0; b < ay; ++b)
      for (int c = 0; c < az; ++c) {
        const double p = xyz[(static_cast<std::size_t>(a) * ay + b) * az + c];
        if (p > 0)
          info += p * std::log2(p * pz[c] /
                                (xz[static_cast<std::size_t>(a) * az + c] *
                                 yz[static_cast<std::size_t>(b) * az + c]));
      }
  return info;
}

/// Code of the joint variable X_a X_b on the product alphabet.
inline Eigen::VectorXi paired_codes(const Eigen::Ref<const Eigen::VectorXi>& a,
                                    const Eigen::Ref<const Eigen::VectorXi>& b,
                                    int bin_count) {
  Eigen::VectorXi paired(a.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    paired[i] = a[i] * bin_count + b[i];
  return paired;
}

/// Shared state of one greedy selection run: the picked bands, the
/// candidate pool, and one cached criterion term per band (redundancy sum
/// for mrmr, joint-information sum for jmi, running min-CMI for cmim).
/// The cache is updated incrementally and always equals recomputation
/// from scratch.
struct SelectorState {
  std::vector<Eigen::Index> selected;
  std::vector<char> in_selected;   // candidate pool is the complement
  Eigen::VectorXd relevance;       // I(X_j; Y), fixed
  Eigen::VectorXd cached_terms;

  bool remaining(Eigen::Index band) const {
    return !in_selected[static_cast<std::size_t>(band)];
  }
};

namespace detail {

template <class Scalar, class Update, class Criterion>
FeatureRanking<double> greedy_select(const DiscretizedData<Scalar>& dd,
                                     const Eigen::Ref<const Eigen::VectorXi>& labels,
                                     Eigen::Index k, const char* method,
                                     Eigen::VectorXd initial_terms,
                                     Update update, Criterion criterion) {
  const Eigen::Index bands = dd.band_count();
  if (dd.sample_count() != labels.size())
    throw std::invalid_argument("select: label count mismatch");
  if (k < 1 || k > bands)
    throw std::invalid_argument("select: k out of range");

  SelectorState state;
  state.in_selected.assign(static_cast<std::size_t>(bands), 0);
  state.cached_terms = std::move(initial_terms);
  state.relevance.resize(bands);
  parallel_for(static_cast<std::size_t>(bands), [&](std::size_t j) {
    state.relevance[static_cast<Eigen::Index>(j)] =
        mutual_info(dd.codes.col(static_cast<Eigen::Index>(j)), labels);
  });

  FeatureRanking<double> ranking;
  ranking.method = method;
  for (Eigen::Index step = 0; step < k; ++step) {
    Eigen::Index best = -1;
    double best_value = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < bands; ++j) {
      if (!state.remaining(j)) continue;
      const double value = step == 0 ? state.relevance[j]
                                     : criterion(j, state, step);
      if (value > best_value) {  // strict: ties go to the lower index
        best_value = value;
        best = j;
      }
    }
    state.in_selected[static_cast<std::size_t>(best)] = 1;
    state.selected.push_back(best);
    ranking.order.push_back(best);
    ranking.scores.push_back(best_value);
    if (step + 1 == k) break;
    // fold the fresh pick into every remaining candidate's cached terms
    parallel_for(static_cast<std::size_t>(bands), [&](std::size_t j) {
      if (!state.remaining(static_cast<Eigen::Index>(j))) return;
      update(static_cast<Eigen::Index>(j), best, state.cached_terms);
    });
  }
  return ranking;
}

}  // namespace detail

/// Greedy minimum-redundancy maximum-relevance:
/// argmax I(X_k;Y) - (1/|S|) sum_{j in S} I(X_k;X_j).
template <class Scalar>
FeatureRanking<double> select_mrmr(const DiscretizedData<Scalar>& dd,
                                   const Eigen::Ref<const Eigen::VectorXi>& labels,
                                   Eigen::Index k) {
  Eigen::VectorXd redundancy = Eigen::VectorXd::Zero(dd.band_count());
  return detail::greedy_select(
      dd, labels, k, "mrmr", std::move(redundancy),
      [&dd](Eigen::Index j, Eigen::Index picked, Eigen::VectorXd& sum) {
        sum[j] += mutual_info(dd.codes.col(j), dd.codes.col(picked));
      },
      [](Eigen::Index j, const SelectorState& state, Eigen::Index step) {
        return state.relevance[j] -
               state.cached_terms[j] / static_cast<double>(step);
      });
}

/// Greedy joint mutual information: argmax sum_{j in S} I(X_k X_j; Y)
/// with the pair coded on the product alphabet.
template <class Scalar>
FeatureRanking<double> select_jmi(const DiscretizedData<Scalar>& dd,
                                  const Eigen::Ref<const Eigen::VectorXi>& labels,
                                  Eigen::Index k) {
  Eigen::VectorXd joint_sum = Eigen::VectorXd::Zero(dd.band_count());
  const int bins = dd.bin_count;
  return detail::greedy_select(
      dd, labels, k, "jmi", std::move(joint_sum),
      [&dd, &labels, bins](Eigen::Index j, Eigen::Index picked,
                           Eigen::VectorXd& sum) {
        sum[j] += mutual_info(
            paired_codes(dd.codes.col(j), dd.codes.col(picked), bins), labels);
      },
      [](Eigen::Index j, const SelectorState& state, Eigen::Index) {
        return state.cached_terms[j];
      });
}

/// Greedy conditional mutual information maximization:
/// argmax min_{j in S} I(X_k;Y|X_j).
template <class Scalar>
FeatureRanking<double> select_cmim(const DiscretizedData<Scalar>& dd,
                                   const Eigen::Ref<const Eigen::VectorXi>& labels,
                                   Eigen::Index k) {
  Eigen::VectorXd min_cmi = Eigen::VectorXd::Constant(
      dd.band_count(), std::numeric_limits<double>::infinity());
  return detail::greedy_select(
      dd, labels, k, "cmim", std::move(min_cmi),
      [&dd, &labels](Eigen::Index j, Eigen::Index picked,
                     Eigen::VectorXd& best) {
        best[j] = std::min(
            best[j], conditional_mi(dd.codes.col(j), labels, dd.codes.col(picked)));
      },
      [](Eigen::Index j, const SelectorState& state, Eigen::Index) {
        return state.cached_terms[j];
      });
}

}  // namespace bandsel

#endif
