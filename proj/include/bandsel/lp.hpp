#ifndef BANDSEL_LP_HPP
#define BANDSEL_LP_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsel/dataset.hpp"

namespace bandsel {

enum class Relation { LessEqual, GreaterEqual, Equal };
enum class VariableBound { NonNegative, Free };
enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

template <class Scalar = double>
struct LpConstraint {
  VectorX<Scalar> coeffs;
  Relation relation = Relation::LessEqual;
  Scalar rhs = 0;
};

/// General-form linear program, minimized. Variables are free or
/// nonnegative; rows may use any relation.
template <class Scalar = double>
struct LinearProgram {
  VectorX<Scalar> objective;
  std::vector<LpConstraint<Scalar>> constraints;
  std::vector<VariableBound> bounds;

  Eigen::Index variable_count() const { return objective.size(); }

  void add_constraint(VectorX<Scalar> coeffs, Relation relation, Scalar rhs) {
    constraints.push_back({std::move(coeffs), relation, rhs});
  }
};

template <class Scalar = double>
struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  VectorX<Scalar> values;   // empty unless Optimal
  Scalar objective_value = std::numeric_limits<Scalar>::quiet_NaN();
};

struct SimplexOptions {
  double pivot_tol = 1e-9;        // minimum magnitude of a pivot element
  double feasibility_tol = 1e-7;  // phase-1 optimum / residual acceptance
  double optimality_tol = 1e-9;   // reduced-cost threshold
  long max_iterations = 0;        // 0: scaled from problem size
  long refactor_interval = 512;   // basis-inverse rebuild cadence
};

namespace detail {

/// Two-phase revised simplex on a dense standard form with an explicit
/// basis inverse. Entering variable: most negative reduced cost with ties
/// to the lowest column index; after a run of degenerate pivots the rule
/// drops to Bland's (lowest eligible index), which guarantees termination.
/// Leaving variable: minimum ratio, ties to the lowest basic variable
/// index. Free variables are split into positive/negative parts.
template <class Scalar>
class SimplexEngine {
 public:
  SimplexEngine(const LinearProgram<Scalar>& lp, const SimplexOptions& opt)
      : lp_(lp), opt_(opt) {
    build_standard_form();
  }

  LpSolution<Scalar> run() {
    long budget = opt_.max_iterations > 0
                      ? opt_.max_iterations
                      : 20000 + 40 * static_cast<long>(m_ + n_);
    LpSolution<Scalar> solution;
    if (art_begin_ < n_) {  // some rows required artificials
      LpStatus phase1 = iterate(true, budget);
      if (phase1 == LpStatus::Unbounded)
        throw std::runtime_error("simplex: phase-1 problem unbounded");
      Scalar infeasibility = 0;
      for (Eigen::Index i = 0; i < m_; ++i)
        if (basis_[static_cast<std::size_t>(i)] >= art_begin_)
          infeasibility += std::max<Scalar>(x_basic_[i], 0);
      if (infeasibility > static_cast<Scalar>(opt_.feasibility_tol)) {
        solution.status = LpStatus::Infeasible;
        return solution;
      }
      evict_basic_artificials();
    }
    LpStatus phase2 = iterate(false, budget);
    solution.status = phase2;
    if (phase2 != LpStatus::Optimal) {
      if (phase2 == LpStatus::Unbounded)
        solution.objective_value = -std::numeric_limits<Scalar>::infinity();
      return solution;
    }
    solution.values = recombine();
    solution.objective_value = lp_.objective.dot(solution.values);
    return solution;
  }

 private:
  void build_standard_form() {
    const Eigen::Index vars = lp_.variable_count();
    if (vars == 0) throw std::invalid_argument("lp: no variables");
    if (static_cast<Eigen::Index>(lp_.bounds.size()) != vars)
      throw std::invalid_argument("lp: bounds size mismatch");
    m_ = static_cast<Eigen::Index>(lp_.constraints.size());
    for (const auto& row : lp_.constraints) {
      if (row.coeffs.size() != vars)
        throw std::invalid_argument("lp: constraint width mismatch");
      if (!std::isfinite(static_cast<double>(row.rhs)) ||
          !row.coeffs.allFinite())
        throw std::invalid_argument("lp: non-finite constraint");
    }

    // Structural columns: one per nonnegative variable, two per free one.
    for (Eigen::Index v = 0; v < vars; ++v) {
      col_var_.push_back(v);
      col_sign_.push_back(+1);
      if (lp_.bounds[static_cast<std::size_t>(v)] == VariableBound::Free) {
        col_var_.push_back(v);
        col_sign_.push_back(-1);
      }
    }
    const auto n_struct = static_cast<Eigen::Index>(col_var_.size());

    // Row normalization: flip rows with negative rhs so b >= 0, then count
    // logical columns. LE rows take a slack that doubles as the initial
    // basic variable; GE rows take a surplus plus an artificial; EQ rows
    // take an artificial.
    std::vector<Relation> relation(static_cast<std::size_t>(m_));
    std::vector<int> row_sign(static_cast<std::size_t>(m_), +1);
    Eigen::Index n_slack = 0, n_art = 0;
    for (Eigen::Index r = 0; r < m_; ++r) {
      Relation rel = lp_.constraints[static_cast<std::size_t>(r)].relation;
      if (lp_.constraints[static_cast<std::size_t>(r)].rhs < 0) {
        row_sign[static_cast<std::size_t>(r)] = -1;
        if (rel == Relation::LessEqual) rel = Relation::GreaterEqual;
        else if (rel == Relation::GreaterEqual) rel = Relation::LessEqual;
      }
      relation[static_cast<std::size_t>(r)] = rel;
      if (rel != Relation::Equal) ++n_slack;
      if (rel != Relation::LessEqual) ++n_art;
    }
    art_begin_ = n_struct + n_slack;
    n_ = art_begin_ + n_art;

    A_.setZero(m_, n_);
    b_.resize(m_);
    cost_.setZero(n_);
    basis_.resize(static_cast<std::size_t>(m_));
    in_basis_.assign(static_cast<std::size_t>(n_), 0);

    for (Eigen::Index c = 0; c < n_struct; ++c)
      cost_[c] = static_cast<Scalar>(col_sign_[static_cast<std::size_t>(c)]) *
                 lp_.objective[col_var_[static_cast<std::size_t>(c)]];

    Eigen::Index slack = n_struct, art = art_begin_;
    for (Eigen::Index r = 0; r < m_; ++r) {
      const auto& row = lp_.constraints[static_cast<std::size_t>(r)];
      const auto sign = static_cast<Scalar>(row_sign[static_cast<std::size_t>(r)]);
      for (Eigen::Index c = 0; c < n_struct; ++c)
        A_(r, c) = sign * row.coeffs[col_var_[static_cast<std::size_t>(c)]] *
                   static_cast<Scalar>(col_sign_[static_cast<std::size_t>(c)]);
      b_[r] = sign * row.rhs;
      switch (relation[static_cast<std::size_t>(r)]) {
        case Relation::LessEqual:
          A_(r, slack) = 1;
          set_basic(r, slack++);
          break;
        case Relation::GreaterEqual:
          A_(r, slack++) = -1;
          A_(r, art) = 1;
          set_basic(r, art++);
          break;
        case Relation::Equal:
          A_(r, art) = 1;
          set_basic(r, art++);
          break;
      }
    }
    // Initial basis columns are unit vectors, so the inverse starts exact.
    inverse_ = MatrixX<Scalar>::Identity(m_, m_);
    x_basic_ = b_;

    // Column structure for pricing: logical columns (slack, surplus,
    // artificial) and near-empty structural ones are priced entrywise, the
    // rest through one dense block. Margin-style programs are almost
    // entirely sparse columns, which removes the m*n term per iteration.
    sparse_cols_.resize(static_cast<std::size_t>(n_));
    for (Eigen::Index j = 0; j < n_; ++j) {
      Eigen::Index nnz = 0;
      for (Eigen::Index r = 0; r < m_; ++r)
        if (A_(r, j) != Scalar(0)) ++nnz;
      if (nnz <= 8) {
        auto& entries = sparse_cols_[static_cast<std::size_t>(j)];
        for (Eigen::Index r = 0; r < m_; ++r)
          if (A_(r, j) != Scalar(0)) entries.push_back({r, A_(r, j)});
        if (entries.empty()) entries.push_back({0, Scalar(0)});  // mark sparse
      } else {
        dense_cols_.push_back(j);
      }
    }
    dense_block_.resize(m_, static_cast<Eigen::Index>(dense_cols_.size()));
    for (std::size_t idx = 0; idx < dense_cols_.size(); ++idx)
      dense_block_.col(static_cast<Eigen::Index>(idx)) =
          A_.col(dense_cols_[idx]);
  }

  void price(const VectorX<Scalar>& cost, const VectorX<Scalar>& duals,
             VectorX<Scalar>& reduced) const {
    if (dense_block_.cols() > 0) {
      VectorX<Scalar> dense_activity = dense_block_.transpose() * duals;
      for (std::size_t idx = 0; idx < dense_cols_.size(); ++idx)
        reduced[dense_cols_[idx]] =
            cost[dense_cols_[idx]] -
            dense_activity[static_cast<Eigen::Index>(idx)];
    }
    for (Eigen::Index j = 0; j < art_begin_; ++j) {
      const auto& entries = sparse_cols_[static_cast<std::size_t>(j)];
      if (entries.empty()) continue;  // priced through the dense block
      Scalar activity = 0;
      for (const auto& [row, value] : entries) activity += value * duals[row];
      reduced[j] = cost[j] - activity;
    }
  }

  void direction_of(Eigen::Index column, VectorX<Scalar>& direction) const {
    const auto& entries = sparse_cols_[static_cast<std::size_t>(column)];
    if (entries.empty()) {
      direction.noalias() = inverse_ * A_.col(column);
      return;
    }
    direction.setZero();
    for (const auto& [row, value] : entries)
      direction += value * inverse_.col(row);
  }

  void set_basic(Eigen::Index row, Eigen::Index col) {
    basis_[static_cast<std::size_t>(row)] = col;
    in_basis_[static_cast<std::size_t>(col)] = 1;
  }

  void refactor() {
    MatrixX<Scalar> basis_matrix(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i)
      basis_matrix.col(i) = A_.col(basis_[static_cast<std::size_t>(i)]);
    Eigen::PartialPivLU<MatrixX<Scalar>> lu(basis_matrix);
    inverse_ = lu.inverse();
    x_basic_ = lu.solve(b_);  // direct solve beats inverse-multiply
    iters_since_refactor_ = 0;
  }

  Eigen::Index choose_entering(const VectorX<Scalar>& reduced,
                               bool bland) const {
    const auto tol = static_cast<Scalar>(opt_.optimality_tol);
    Eigen::Index best = -1;
    Scalar best_value = -tol;
    for (Eigen::Index j = 0; j < art_begin_; ++j) {
      if (in_basis_[static_cast<std::size_t>(j)]) continue;
      if (reduced[j] < best_value) {
        best = j;
        if (bland) break;  // lowest eligible index
        best_value = reduced[j];
      }
    }
    return best;
  }

  // Minimum-ratio test, Harris style: a first pass finds the smallest
  // ratio under a small feasibility relaxation, a second pass picks the
  // best-conditioned pivot among rows within it (ties to the lowest basic
  // variable index; Bland mode collapses to the strict lowest-index rule).
  // Basic artificials pinned at zero may leave on a pivot of either sign
  // in phase 2 so they cannot turn positive again.
  Eigen::Index choose_leaving(const VectorX<Scalar>& direction, bool phase_one,
                              bool bland) const {
    const auto pivot_tol = static_cast<Scalar>(opt_.pivot_tol);
    const auto feas_tol = static_cast<Scalar>(opt_.feasibility_tol);
    auto ratio_of = [&](Eigen::Index i, bool relaxed, Scalar& theta) {
      if (direction[i] > pivot_tol) {
        const Scalar value = std::max<Scalar>(x_basic_[i], 0) +
                             (relaxed ? feas_tol : Scalar(0));
        theta = value / direction[i];
        return true;
      }
      if (!phase_one && basis_[static_cast<std::size_t>(i)] >= art_begin_ &&
          std::abs(direction[i]) > pivot_tol && x_basic_[i] <= feas_tol) {
        theta = 0;
        return true;
      }
      return false;
    };

    Scalar limit = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      Scalar theta;
      if (ratio_of(i, !bland, theta)) limit = std::min(limit, theta);
    }
    if (limit == std::numeric_limits<Scalar>::infinity()) return -1;

    Eigen::Index leave = -1;
    Scalar best_pivot = 0;
    for (Eigen::Index i = 0; i < m_; ++i) {
      Scalar theta;
      if (!ratio_of(i, false, theta) || theta > limit) continue;
      const Scalar magnitude = std::abs(direction[i]);
      if (leave < 0 ||
          (bland ? basis_[static_cast<std::size_t>(i)] <
                       basis_[static_cast<std::size_t>(leave)]
                 : (magnitude > best_pivot ||
                    (magnitude == best_pivot &&
                     basis_[static_cast<std::size_t>(i)] <
                         basis_[static_cast<std::size_t>(leave)])))) {
        leave = i;
        best_pivot = magnitude;
      }
    }
    return leave;
  }

  Scalar pivot(Eigen::Index leave_row, Eigen::Index enter,
               const VectorX<Scalar>& direction) {
    Scalar step = std::max<Scalar>(x_basic_[leave_row], 0) /
                  direction[leave_row];
    if (!(step > 0)) step = 0;  // degenerate or artificial-eviction pivot
    x_basic_ -= step * direction;
    x_basic_[leave_row] = step;
    Eigen::RowVectorX<Scalar> pivot_row =
        inverse_.row(leave_row) / direction[leave_row];
    inverse_.noalias() -= direction * pivot_row;
    inverse_.row(leave_row) = pivot_row;
    in_basis_[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave_row)])] = 0;
    set_basic(leave_row, enter);
    ++iters_since_refactor_;
    return step;
  }

  LpStatus iterate(bool phase_one, long& budget) {
    const auto degenerate_eps = static_cast<Scalar>(1e-12);
    long degenerate_run = 0;
    bool bland = false;
    VectorX<Scalar> phase_cost;
    if (phase_one) {
      phase_cost.setZero(n_);
      phase_cost.tail(n_ - art_begin_).setOnes();
    }
    const VectorX<Scalar>& cost = phase_one ? phase_cost : cost_;

    VectorX<Scalar> basic_cost(m_), duals(m_), direction(m_);
    VectorX<Scalar> reduced = VectorX<Scalar>::Zero(n_);
    for (;;) {
      if (--budget < 0)
        throw std::runtime_error("simplex: iteration limit exceeded");
      if (iters_since_refactor_ >= opt_.refactor_interval) refactor();

      for (Eigen::Index i = 0; i < m_; ++i)
        basic_cost[i] = cost[basis_[static_cast<std::size_t>(i)]];
      duals.noalias() = inverse_.transpose() * basic_cost;
      price(cost, duals, reduced);

      Eigen::Index enter = choose_entering(reduced, bland);
      if (enter < 0) {
        if (iters_since_refactor_ > 0) {
          refactor();  // confirm optimality against a fresh factorization
          continue;
        }
        return LpStatus::Optimal;
      }

      direction_of(enter, direction);
      Eigen::Index leave = choose_leaving(direction, phase_one, bland);
      if (leave < 0) {
        if (iters_since_refactor_ > 0) {
          refactor();  // an unbounded ray must survive a fresh factorization
          continue;
        }
        return LpStatus::Unbounded;
      }

      const Scalar step = pivot(leave, enter, direction);
      if (std::abs(step) <= degenerate_eps) {
        // long fully-degenerate runs are routine on margin programs; the
        // Bland fallback is a last resort against genuine cycling
        if (++degenerate_run > 2 * m_ + 5000) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
    }
  }

  // After a feasible phase 1, pivot basic artificials out wherever a
  // non-artificial column has a usable pivot element; rows left over are
  // redundant and keep their artificial pinned at zero.
  void evict_basic_artificials() {
    bool pivoted = false;
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < art_begin_) continue;
      Eigen::RowVectorX<Scalar> tableau_row = inverse_.row(i) * A_;
      for (Eigen::Index j = 0; j < art_begin_; ++j) {
        if (in_basis_[static_cast<std::size_t>(j)]) continue;
        if (std::abs(tableau_row[j]) > static_cast<Scalar>(1e-6)) {
          VectorX<Scalar> direction(m_);
          direction_of(j, direction);
          pivot(i, j, direction);
          pivoted = true;
          break;
        }
      }
    }
    if (pivoted) refactor();
  }

  VectorX<Scalar> recombine() const {
    VectorX<Scalar> values = VectorX<Scalar>::Zero(lp_.variable_count());
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index col = basis_[static_cast<std::size_t>(i)];
      if (col >= static_cast<Eigen::Index>(col_var_.size())) continue;
      values[col_var_[static_cast<std::size_t>(col)]] +=
          static_cast<Scalar>(col_sign_[static_cast<std::size_t>(col)]) *
          std::max<Scalar>(x_basic_[i], 0);
    }
    return values;
  }

  struct SparseEntry {
    Eigen::Index row;
    Scalar value;
  };

  const LinearProgram<Scalar>& lp_;
  SimplexOptions opt_;
  Eigen::Index m_ = 0, n_ = 0, art_begin_ = 0;
  MatrixX<Scalar> A_;
  VectorX<Scalar> b_, cost_;
  std::vector<Eigen::Index> basis_;
  std::vector<char> in_basis_;
  std::vector<Eigen::Index> col_var_;
  std::vector<int> col_sign_;
  std::vector<std::vector<SparseEntry>> sparse_cols_;
  std::vector<Eigen::Index> dense_cols_;
  MatrixX<Scalar> dense_block_;
  MatrixX<Scalar> inverse_;
  VectorX<Scalar> x_basic_;
  long iters_since_refactor_ = 0;
};

}  // namespace detail

namespace detail {

template <class Scalar>
bool residuals_hold(const LinearProgram<Scalar>& lp,
                    const LpSolution<Scalar>& solution, double tolerance) {
  for (const auto& row : lp.constraints) {
    const Scalar activity = row.coeffs.dot(solution.values);
    const Scalar scale = std::max<Scalar>(
        Scalar(1), row.coeffs.template lpNorm<Eigen::Infinity>());
    const Scalar residual = (activity - row.rhs) / scale;
    const auto tol = static_cast<Scalar>(tolerance);
    const bool ok = row.relation == Relation::LessEqual ? residual <= tol
                    : row.relation == Relation::GreaterEqual ? residual >= -tol
                    : std::abs(residual) <= tol;
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

/// Solves to proven optimality or returns Infeasible/Unbounded; never
/// throws for those outcomes. At Optimal every constraint holds to the
/// feasibility tolerance on max-abs-normalized rows; an ill-conditioned
/// run is retried once with conservative tolerances before giving up.
template <class Scalar>
LpSolution<Scalar> solve(const LinearProgram<Scalar>& lp,
                         const SimplexOptions& options = {}) {
  SimplexOptions attempt = options;
  for (int round = 0; round < 2; ++round) {
    detail::SimplexEngine<Scalar> engine(lp, attempt);
    LpSolution<Scalar> solution = engine.run();
    if (solution.status != LpStatus::Optimal ||
        detail::residuals_hold(lp, solution, 10 * options.feasibility_tol))
      return solution;
    attempt.pivot_tol = std::max(options.pivot_tol, 1e-7);
    attempt.refactor_interval = std::max(32L, options.refactor_interval / 8);
  }
  throw std::runtime_error("simplex: solution failed residual check");
}

/// Plain-text fixed-column dump for debugging.
template <class Scalar>
void dump_lp(std::ostream& out, const LinearProgram<Scalar>& lp) {
  out << "minimize  ";
  for (Eigen::Index v = 0; v < lp.variable_count(); ++v)
    out << std::setw(12) << lp.objective[v];
  out << "\nbounds    ";
  for (auto bound : lp.bounds)
    out << std::setw(12)
        << (bound == VariableBound::Free ? "free" : "nonneg");
  out << '\n';
  for (const auto& row : lp.constraints) {
    out << "row       ";
    for (Eigen::Index v = 0; v < row.coeffs.size(); ++v)
      out << std::setw(12) << row.coeffs[v];
    out << (row.relation == Relation::LessEqual      ? "  <= "
            : row.relation == Relation::GreaterEqual ? "  >= "
                                                     : "  == ")
        << row.rhs << '\n';
  }
}

}  // namespace bandsel

#endif
