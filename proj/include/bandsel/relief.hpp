#ifndef BANDSEL_RELIEF_HPP
#define BANDSEL_RELIEF_HPP

#include <Eigen/Core>

#include <limits>
#include <stdexcept>
#include <string>

#include "bandsel/dataset.hpp"
#include "bandsel/random.hpp"
#include "bandsel/ranking.hpp"

namespace bandsel {

template <class Scalar = double>
struct ReliefWeights {
  VectorX<Scalar> weights;      // W, one per band
  Eigen::Index iterations = 0;  // m
  std::uint64_t seed = 0;
};

/// One weight update at the given instance:
///   W += -(x - nearHit)^2 + (x - nearMiss)^2   (componentwise)
/// nearHit is the closest same-class sample excluding the instance itself,
/// nearMiss the closest sample of any other class, both by Euclidean
/// distance over all bands with ties to the lower row index.
template <class Scalar>
void relief_step(const Dataset<Scalar>& train, Eigen::Index instance,
                 VectorX<Scalar>& weights) {
  const auto x = train.samples.row(instance);
  const int label = train.labels[instance];
  Eigen::Index hit = -1, miss = -1;
  Scalar hit_distance = std::numeric_limits<Scalar>::infinity();
  Scalar miss_distance = std::numeric_limits<Scalar>::infinity();
  for (Eigen::Index i = 0; i < train.sample_count(); ++i) {
    if (i == instance) continue;
    const Scalar distance = (train.samples.row(i) - x).squaredNorm();
    if (train.labels[i] == label) {
      if (distance < hit_distance) {
        hit_distance = distance;
        hit = i;
      }
    } else if (distance < miss_distance) {
      miss_distance = distance;
      miss = i;
    }
  }
  if (hit < 0)
    throw std::runtime_error(
        "relief: class " + std::to_string(label) +
        " has a single sample; every class needs at least 2");
  if (miss < 0) throw std::runtime_error("relief: need at least two classes");
  weights.array() -= (x - train.samples.row(hit)).array().square();
  weights.array() += (x - train.samples.row(miss)).array().square();
}

/// Runs `iterations` seeded uniform instance draws (0 means one draw per
/// training sample) and accumulates the componentwise updates. Expects
/// data normalized to [0,1] for comparable band contributions.
template <class Scalar>
ReliefWeights<Scalar> relief_weights(const Dataset<Scalar>& train,
                                     Eigen::Index iterations,
                                     std::uint64_t seed) {
  if (train.class_count() < 2)
    throw std::invalid_argument("relief: need at least two classes");
  auto sizes = train.class_sizes();
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] < 2)
      throw std::invalid_argument(
          "relief: class " + std::to_string(c + 1) +
          " has " + std::to_string(sizes[c]) +
          " sample(s); every class needs at least 2");
  ReliefWeights<Scalar> result;
  result.iterations = iterations > 0 ? iterations : train.sample_count();
  result.seed = seed;
  result.weights = VectorX<Scalar>::Zero(train.band_count());
  SplitMix64 rng(seed);
  for (Eigen::Index t = 0; t < result.iterations; ++t) {
    const auto instance = static_cast<Eigen::Index>(
        rng.below(static_cast<std::uint64_t>(train.sample_count())));
    relief_step(train, instance, result.weights);
  }
  return result;
}

/// Descending by weight, ties to the lower band index. All bands are
/// ranked; truncation is the caller's concern.
template <class Scalar>
FeatureRanking<Scalar> rank_relief(const ReliefWeights<Scalar>& w) {
  return rank_by_score(w.weights, "relief");
}

}  // namespace bandsel

#endif
