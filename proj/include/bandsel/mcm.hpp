#ifndef BANDSEL_MCM_HPP
#define BANDSEL_MCM_HPP

#include <Eigen/Core>

#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsel/dataset.hpp"
#include "bandsel/lp.hpp"
#include "bandsel/parallel.hpp"
#include "bandsel/random.hpp"
#include "bandsel/ranking.hpp"

namespace bandsel {

/// Linear classifier fit by minimizing a bound on the VC dimension.
/// Obtained from the LP
///   min  h + C * sum_i q_i
///   s.t. h >= y_i (w.x_i + b) + q_i
///        y_i (w.x_i + b) + q_i >= 1
///        q_i >= 0,  w, b, h free.
template <class Scalar = double>
struct McmModel {
  VectorX<Scalar> weights;     // w, one per band
  Scalar bias = 0;             // b
  Scalar vc_bound = 0;         // h at the optimum
  VectorX<Scalar> slacks;      // q, one per training sample
  Scalar tradeoff = 0;         // C
  Scalar objective_value = 0;
};

struct McmOptions {
  double tradeoff = 10.0;       // C
  bool subsample = false;       // cap the negative class per one-vs-rest fit
  Eigen::Index max_negatives = 5000;
  std::uint64_t seed = 0;       // drives the optional subsampling
};

namespace detail {

template <class Scalar>
LinearProgram<Scalar> build_mcm_lp(
    const Eigen::Ref<const MatrixX<Scalar>>& samples,
    const Eigen::Ref<const Eigen::VectorXi>& signs, Scalar tradeoff) {
  const Eigen::Index m = samples.rows();
  const Eigen::Index d = samples.cols();
  // variables: w (d, free), b (free), h (free), q (m, nonneg)
  LinearProgram<Scalar> lp;
  lp.objective.setZero(d + 2 + m);
  lp.objective[d + 1] = 1;                       // h
  lp.objective.tail(m).setConstant(tradeoff);    // C * q_i
  lp.bounds.assign(static_cast<std::size_t>(d + 2), VariableBound::Free);
  lp.bounds.resize(static_cast<std::size_t>(d + 2 + m),
                   VariableBound::NonNegative);
  lp.constraints.reserve(static_cast<std::size_t>(2 * m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto y = static_cast<Scalar>(signs[i]);
    VectorX<Scalar> margin = VectorX<Scalar>::Zero(d + 2 + m);
    margin.head(d) = y * samples.row(i).transpose();
    margin[d] = y;           // b
    margin[d + 2 + i] = 1;   // q_i
    VectorX<Scalar> bound = margin;
    bound[d + 1] = -1;       // ... - h <= 0
    lp.constraints.push_back({std::move(bound), Relation::LessEqual, 0});
    lp.constraints.push_back({std::move(margin), Relation::GreaterEqual, 1});
  }
  return lp;
}

}  // namespace detail

/// Fits the margin LP on a binary problem. `signs` must contain both +1
/// and -1. Infeasibility cannot occur for finite data and is treated as an
/// internal error; an unbounded LP indicates a bad tradeoff value.
template <class Scalar>
McmModel<Scalar> fit_binary(const Eigen::Ref<const MatrixX<Scalar>>& samples,
                            const Eigen::Ref<const Eigen::VectorXi>& signs,
                            Scalar tradeoff) {
  if (samples.rows() != signs.size())
    throw std::invalid_argument("mcm: label count mismatch");
  if (!(tradeoff > 0)) throw std::invalid_argument("mcm: C must be positive");
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < signs.size(); ++i) {
    if (signs[i] == 1) has_pos = true;
    else if (signs[i] == -1) has_neg = true;
    else throw std::invalid_argument("mcm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("mcm: both classes must be present");

  const Eigen::Index d = samples.cols();
  const Eigen::Index m = samples.rows();
  auto lp = detail::build_mcm_lp<Scalar>(samples, signs, tradeoff);
  auto solution = solve(lp);
  if (solution.status == LpStatus::Unbounded)
    throw std::runtime_error("mcm: LP unbounded (C = " +
                             std::to_string(static_cast<double>(tradeoff)) +
                             "); check the tradeoff and constraints");
  if (solution.status != LpStatus::Optimal)
    throw std::runtime_error("mcm: internal error, LP reported infeasible");

  McmModel<Scalar> model;
  model.weights = solution.values.head(d);
  model.bias = solution.values[d];
  model.vc_bound = solution.values[d + 1];
  model.slacks = solution.values.tail(m);
  model.tradeoff = tradeoff;
  model.objective_value = solution.objective_value;
  return model;
}

template <class Scalar>
McmModel<Scalar> fit_binary(const Dataset<Scalar>& train, int positive_class,
                            Scalar tradeoff) {
  Eigen::VectorXi signs(train.labels.size());
  for (Eigen::Index i = 0; i < train.labels.size(); ++i)
    signs[i] = train.labels[i] == positive_class ? 1 : -1;
  return fit_binary<Scalar>(train.samples, signs, tradeoff);
}

/// Bands sorted by |w| descending, ties to the lower band index.
template <class Scalar>
FeatureRanking<Scalar> rank_bands(const McmModel<Scalar>& model) {
  VectorX<Scalar> magnitude = model.weights.cwiseAbs();
  if (magnitude.maxCoeff() <= Scalar(0))
    std::cerr << "warning: mcm weight vector is all zero; "
                 "ranking is the identity order\n";
  return rank_by_score(magnitude, "mcm");
}

/// Fits the K one-vs-rest models, in parallel, class order fixed.
/// Fit errors propagate with the offending class named.
template <class Scalar>
std::vector<McmModel<Scalar>> fit_ovr(const Dataset<Scalar>& train,
                                      const McmOptions& options = {}) {
  const int k = train.class_count();
  if (k < 2) throw std::invalid_argument("mcm: need at least two classes");
  std::vector<McmModel<Scalar>> models(static_cast<std::size_t>(k));
  std::vector<std::string> failures(static_cast<std::size_t>(k));
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t ci) {
    const int positive = static_cast<int>(ci) + 1;
    try {
      Dataset<Scalar> problem = train;
      if (options.subsample) {
        IndexList keep;
        IndexList negatives;
        for (Eigen::Index i = 0; i < train.labels.size(); ++i) {
          if (train.labels[i] == positive) keep.push_back(i);
          else negatives.push_back(i);
        }
        if (static_cast<Eigen::Index>(negatives.size()) >
            options.max_negatives) {
          SplitMix64 rng(options.seed ^ (0x9E3779B9ULL * (ci + 1)));
          fisher_yates(negatives, rng);
          negatives.resize(static_cast<std::size_t>(options.max_negatives));
          keep.insert(keep.end(), negatives.begin(), negatives.end());
          std::sort(keep.begin(), keep.end());
          problem = train.rows(keep);
        }
      }
      models[ci] = fit_binary<Scalar>(problem, positive,
                                      static_cast<Scalar>(options.tradeoff));
    } catch (const std::exception& e) {
      failures[ci] = e.what();
    }
  });
  for (std::size_t ci = 0; ci < failures.size(); ++ci)
    if (!failures[ci].empty())
      throw std::runtime_error("mcm: class " + std::to_string(ci + 1) + ": " +
                               failures[ci]);
  return models;
}

/// One-vs-rest extension of the ranking rule: per-band score is the sum of
/// |w| over the class models. Reduces to rank_bands(fit_binary) at K = 2.
template <class Scalar>
FeatureRanking<Scalar> rank_bands_multiclass(const Dataset<Scalar>& train,
                                             const McmOptions& options = {}) {
  auto models = fit_ovr(train, options);
  VectorX<Scalar> score = VectorX<Scalar>::Zero(train.band_count());
  for (const auto& model : models) score += model.weights.cwiseAbs();
  return rank_by_score(score, "mcm");
}

/// Training-set weighted-MCC score of the one-vs-rest MCM classifier,
/// used only to pick C from a small grid. Prediction is the argmax of
/// w_c.x + b_c with ties to the lower class id.
template <class Scalar>
Eigen::VectorXi predict_mcm_ovr(const std::vector<McmModel<Scalar>>& models,
                                const Eigen::Ref<const MatrixX<Scalar>>& x) {
  Eigen::VectorXi labels(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    int best = 0;
    Scalar best_value = -std::numeric_limits<Scalar>::infinity();
    for (std::size_t c = 0; c < models.size(); ++c) {
      const Scalar value = models[c].weights.dot(x.row(i)) + models[c].bias;
      if (value > best_value) {
        best_value = value;
        best = static_cast<int>(c) + 1;
      }
    }
    labels[i] = best;
  }
  return labels;
}

}  // namespace bandsel

#endif
