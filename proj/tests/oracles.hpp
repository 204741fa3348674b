// Test-only reference implementations. Everything here is deliberately
// brute-force and kept independent of the library's solver paths.
#ifndef BANDSEL_TESTS_ORACLES_HPP
#define BANDSEL_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <tuple>
#include <vector>

#include "bandsel/lp.hpp"

namespace oracles {

struct LpReference {
  bandsel::LpStatus status;
  double objective;
};

// Exhaustive basis enumeration on an independently built standard form:
// every nonsingular column subset of size rank(A) is inspected, feasible
// vertices give candidate objectives, and recession directions out of
// feasible bases certify unboundedness.
inline LpReference enumerate_lp(const bandsel::LinearProgram<double>& lp) {
  using bandsel::Relation;
  using bandsel::VariableBound;

  const Eigen::Index vars = lp.variable_count();
  std::vector<std::pair<Eigen::Index, double>> column_map;  // (var, sign)
  for (Eigen::Index v = 0; v < vars; ++v) {
    column_map.emplace_back(v, +1.0);
    if (lp.bounds[static_cast<std::size_t>(v)] == VariableBound::Free)
      column_map.emplace_back(v, -1.0);
  }
  const auto m = static_cast<Eigen::Index>(lp.constraints.size());
  Eigen::Index n = static_cast<Eigen::Index>(column_map.size());
  Eigen::Index slacks = 0;
  for (const auto& row : lp.constraints)
    if (row.relation != Relation::Equal) ++slacks;

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, n + slacks);
  Eigen::VectorXd b(m);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n + slacks);
  for (Eigen::Index j = 0; j < n; ++j)
    c[j] = column_map[static_cast<std::size_t>(j)].second *
           lp.objective[column_map[static_cast<std::size_t>(j)].first];
  Eigen::Index slack = n;
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto& row = lp.constraints[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < n; ++j)
      a(r, j) = column_map[static_cast<std::size_t>(j)].second *
                row.coeffs[column_map[static_cast<std::size_t>(j)].first];
    b[r] = row.rhs;
    if (row.relation == Relation::LessEqual) a(r, slack++) = 1.0;
    else if (row.relation == Relation::GreaterEqual) a(r, slack++) = -1.0;
  }
  n += slacks;

  // Row-reduce [a | b] to full row rank; an inconsistent zero row proves
  // infeasibility outright.
  Eigen::MatrixXd work(m, n + 1);
  work << a, b;
  Eigen::Index rank = 0;
  for (Eigen::Index col = 0; col < n && rank < m; ++col) {
    Eigen::Index pivot = rank;
    for (Eigen::Index r = rank + 1; r < m; ++r)
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    if (std::abs(work(pivot, col)) < 1e-9) continue;
    work.row(rank).swap(work.row(pivot));
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r == rank) continue;
      work.row(r) -= (work(r, col) / work(rank, col)) * work.row(rank);
    }
    ++rank;
  }
  for (Eigen::Index r = rank; r < m; ++r)
    if (std::abs(work(r, n)) > 1e-7)
      return {bandsel::LpStatus::Infeasible, 0.0};
  Eigen::MatrixXd ar = work.topLeftCorner(rank, n);
  Eigen::VectorXd br = work.col(n).head(rank);

  if (rank == 0) {  // only x = 0 remains
    for (Eigen::Index j = 0; j < n; ++j)
      if (c[j] < -1e-9) return {bandsel::LpStatus::Unbounded, 0.0};
    return {bandsel::LpStatus::Optimal, 0.0};
  }

  bool feasible = false;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(rank));
  std::vector<char> basic(static_cast<std::size_t>(n));

  auto inspect = [&]() {
    Eigen::MatrixXd basis(rank, rank);
    for (Eigen::Index i = 0; i < rank; ++i)
      basis.col(i) = ar.col(pick[static_cast<std::size_t>(i)]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (!lu.isInvertible()) return false;
    Eigen::VectorXd xb = lu.solve(br);
    if ((xb.array() < -1e-9).any()) return false;
    feasible = true;
    double objective = 0;
    for (Eigen::Index i = 0; i < rank; ++i)
      objective += c[pick[static_cast<std::size_t>(i)]] * xb[i];
    best = std::min(best, objective);
    // recession directions through this vertex
    std::fill(basic.begin(), basic.end(), 0);
    for (Eigen::Index i = 0; i < rank; ++i)
      basic[static_cast<std::size_t>(pick[static_cast<std::size_t>(i)])] = 1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (basic[static_cast<std::size_t>(j)]) continue;
      Eigen::VectorXd step = lu.solve(ar.col(j));
      if ((step.array() > 1e-9).any()) continue;  // some basic var decreases
      double reduced = c[j];
      for (Eigen::Index i = 0; i < rank; ++i)
        reduced -= c[pick[static_cast<std::size_t>(i)]] * step[i];
      if (reduced < -1e-9) return true;  // improving feasible ray
    }
    return false;
  };

  // iterate over all rank-subsets of the n columns
  for (Eigen::Index i = 0; i < rank; ++i) pick[static_cast<std::size_t>(i)] = i;
  for (;;) {
    if (inspect()) return {bandsel::LpStatus::Unbounded, 0.0};
    Eigen::Index level = rank - 1;
    while (level >= 0 &&
           pick[static_cast<std::size_t>(level)] == n - rank + level)
      --level;
    if (level < 0) break;
    ++pick[static_cast<std::size_t>(level)];
    for (Eigen::Index i = level + 1; i < rank; ++i)
      pick[static_cast<std::size_t>(i)] = pick[static_cast<std::size_t>(i - 1)] + 1;
  }
  if (!feasible) return {bandsel::LpStatus::Infeasible, 0.0};
  return {bandsel::LpStatus::Optimal, best};
}

// Small random LPs with integer data: mixed relations, mixed bounds,
// deliberately tie-heavy so degenerate pivoting gets exercised.
inline bandsel::LinearProgram<double> random_lp(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> var_count(1, 6), row_count(1, 6);
  std::uniform_int_distribution<int> coeff(-3, 3), rhs(-5, 5);
  std::uniform_int_distribution<int> rel(0, 2), bound(0, 3);

  bandsel::LinearProgram<double> lp;
  const int vars = var_count(rng);
  const int rows = row_count(rng);
  lp.objective.resize(vars);
  for (int v = 0; v < vars; ++v) lp.objective[v] = coeff(rng);
  for (int v = 0; v < vars; ++v)
    lp.bounds.push_back(bound(rng) == 0 ? bandsel::VariableBound::Free
                                        : bandsel::VariableBound::NonNegative);
  for (int r = 0; r < rows; ++r) {
    Eigen::VectorXd row(vars);
    for (int v = 0; v < vars; ++v) row[v] = coeff(rng);
    auto relation = rel(rng) == 0   ? bandsel::Relation::LessEqual
                    : rel(rng) == 1 ? bandsel::Relation::GreaterEqual
                                    : bandsel::Relation::Equal;
    lp.add_constraint(row, relation, rhs(rng));
  }
  return lp;
}

// Entropy arithmetic over exact joint histograms, in bits.
inline double entropy_of_counts(const std::map<std::vector<int>, int>& counts,
                                int total) {
  double h = 0;
  for (const auto& [_, count] : counts) {
    if (count == 0) continue;
    const double p = static_cast<double>(count) / total;
    h -= p * std::log2(p);
  }
  return h;
}

template <class... Views>
double joint_entropy(int n, const Views&... views) {
  std::map<std::vector<int>, int> counts;
  for (int i = 0; i < n; ++i) ++counts[std::vector<int>{views[i]...}];
  return entropy_of_counts(counts, n);
}

template <class V1, class V2>
double mi_reference(const V1& x, const V2& y) {
  const int n = static_cast<int>(x.size());
  return joint_entropy(n, x) + joint_entropy(n, y) - joint_entropy(n, x, y);
}

// I(X;Y|Z) = H(X,Z) + H(Y,Z) - H(Z) - H(X,Y,Z)
template <class V1, class V2, class V3>
double cmi_reference(const V1& x, const V2& y, const V3& z) {
  const int n = static_cast<int>(x.size());
  return joint_entropy(n, x, z) + joint_entropy(n, y, z) - joint_entropy(n, z) -
         joint_entropy(n, x, y, z);
}

}  // namespace oracles

#endif
