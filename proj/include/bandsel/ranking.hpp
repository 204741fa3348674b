#ifndef BANDSEL_RANKING_HPP
#define BANDSEL_RANKING_HPP

#include <Eigen/Core>

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

namespace bandsel {

/// Ordered band list produced by any selector. `order` holds 0-based band
/// (column) indices; file outputs convert to 1-based. `scores[r]` is the
/// selector's score for the band at rank r: for sort-based selectors it is
/// non-increasing, for the greedy information criteria it is the criterion
/// value at pick time.
template <class Scalar = double>
struct FeatureRanking {
  std::vector<Eigen::Index> order;
  std::vector<Scalar> scores;
  std::string method;

  std::vector<Eigen::Index> top(std::size_t k) const {
    k = std::min(k, order.size());
    return {order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k)};
  }
};

/// Ranks all D entries of `score` descending, ties broken by lower index.
template <class Derived>
FeatureRanking<typename Derived::Scalar> rank_by_score(
    const Eigen::DenseBase<Derived>& score, std::string method) {
  using Scalar = typename Derived::Scalar;
  FeatureRanking<Scalar> ranking;
  ranking.method = std::move(method);
  ranking.order.resize(static_cast<std::size_t>(score.size()));
  std::iota(ranking.order.begin(), ranking.order.end(), Eigen::Index{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](Eigen::Index a, Eigen::Index b) {
                     return score(a) > score(b);
                   });
  ranking.scores.reserve(ranking.order.size());
  for (Eigen::Index band : ranking.order)
    ranking.scores.push_back(score(band));
  return ranking;
}

/// CSV layout used by the `rank` subcommand: rank,band_index,score with
/// 1-based band indices.
template <class Scalar>
void write_ranking_csv(std::ostream& out, const FeatureRanking<Scalar>& r) {
  out << "rank,band_index,score\n";
  out.precision(17);
  for (std::size_t i = 0; i < r.order.size(); ++i)
    out << (i + 1) << ',' << (r.order[i] + 1) << ',' << r.scores[i] << '\n';
}

}  // namespace bandsel

#endif
