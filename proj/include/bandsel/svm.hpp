#ifndef BANDSEL_SVM_HPP
#define BANDSEL_SVM_HPP

#include <Eigen/Core>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <list>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bandsel/dataset.hpp"
#include "bandsel/metrics.hpp"
#include "bandsel/parallel.hpp"

namespace bandsel {

enum class KernelKind { Rbf, Linear };

template <class Scalar = double>
struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  Scalar gamma = 1;  // k(u,v) = exp(-gamma * |u - v|^2)
};

/// Soft-margin binary SVM in dual form.
template <class Scalar = double>
struct SvmModel {
  MatrixX<Scalar> support_vectors;  // one row per SV
  VectorX<Scalar> alphas;           // dual coefficients in (0, C]
  Eigen::VectorXi sv_signs;         // +-1 per SV
  Scalar bias = 0;
  KernelSpec<Scalar> kernel;
  Scalar box = 0;  // C
  bool converged = true;
  Scalar kkt_violation = 0;  // max violating-pair gap at stop
};

struct SmoOptions {
  double epsilon = 1e-3;                 // stop when the KKT gap drops below
  long long max_pair_updates = 1000000;  // hard cap; sets converged=false
  std::size_t cache_bytes = 256u << 20;  // kernel row cache budget
};

namespace detail {

/// LRU cache over kernel matrix rows.
template <class Scalar>
class KernelCache {
 public:
  KernelCache(const Eigen::Ref<const MatrixX<Scalar>>& x,
              const KernelSpec<Scalar>& kernel, std::size_t budget_bytes)
      : x_(x), kernel_(kernel) {
    if (kernel.kind == KernelKind::Rbf)
      sq_norms_ = x.rowwise().squaredNorm();
    const std::size_t row_bytes =
        sizeof(Scalar) * static_cast<std::size_t>(x.rows());
    capacity_ = std::max<std::size_t>(2, budget_bytes / std::max<std::size_t>(
                                             row_bytes, 1));
  }

  std::shared_ptr<const VectorX<Scalar>> row(Eigen::Index i) {
    if (auto it = index_.find(i); it != index_.end()) {
      order_.splice(order_.begin(), order_, it->second);
      return it->second->second;
    }
    auto fresh = std::make_shared<VectorX<Scalar>>(compute_row(i));
    order_.emplace_front(i, fresh);
    index_[i] = order_.begin();
    if (order_.size() > capacity_) {
      index_.erase(order_.back().first);
      order_.pop_back();
    }
    return fresh;
  }

 private:
  VectorX<Scalar> compute_row(Eigen::Index i) const {
    if (kernel_.kind == KernelKind::Linear) return x_ * x_.row(i).transpose();
    VectorX<Scalar> d2 =
        (sq_norms_.array() + sq_norms_[i] -
         2 * (x_ * x_.row(i).transpose()).array())
            .max(Scalar(0));
    return (-kernel_.gamma * d2.array()).exp();
  }

  Eigen::Ref<const MatrixX<Scalar>> x_;
  KernelSpec<Scalar> kernel_;
  VectorX<Scalar> sq_norms_;
  std::size_t capacity_;
  std::list<std::pair<Eigen::Index, std::shared_ptr<const VectorX<Scalar>>>>
      order_;
  std::unordered_map<Eigen::Index,
                     typename decltype(order_)::iterator>
      index_;
};

}  // namespace detail

/// Sequential minimal optimization on the dual
///   min 1/2 a'Qa - sum a   s.t. 0 <= a <= C, sum y a = 0,
/// working set = the maximal violating pair, stopping when the pair gap
/// drops below epsilon. Hitting the update cap returns converged = false
/// (with a warning on stderr) rather than failing.
template <class Scalar>
SvmModel<Scalar> train_binary(const Eigen::Ref<const MatrixX<Scalar>>& x,
                              const Eigen::Ref<const Eigen::VectorXi>& signs,
                              const KernelSpec<Scalar>& kernel, Scalar box,
                              const SmoOptions& options = {}) {
  const Eigen::Index n = x.rows();
  if (signs.size() != n) throw std::invalid_argument("svm: label mismatch");
  if (!(box > 0)) throw std::invalid_argument("svm: C must be positive");
  if (kernel.kind == KernelKind::Rbf && !(kernel.gamma > 0))
    throw std::invalid_argument("svm: rbf gamma must be positive");
  bool has_pos = false, has_neg = false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (signs[i] == 1) has_pos = true;
    else if (signs[i] == -1) has_neg = true;
    else throw std::invalid_argument("svm: labels must be +1 or -1");
  }
  if (!has_pos || !has_neg)
    throw std::invalid_argument("svm: both classes must be present");

  detail::KernelCache<Scalar> cache(x, kernel, options.cache_bytes);
  VectorX<Scalar> alpha = VectorX<Scalar>::Zero(n);
  VectorX<Scalar> gradient = VectorX<Scalar>::Constant(n, -1);
  VectorX<Scalar> y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = static_cast<Scalar>(signs[i]);

  const auto eps = static_cast<Scalar>(options.epsilon);
  // Coordinates within rounding dust of a bound are treated as clamped;
  // otherwise a pair with ~1e-17 of room can be selected forever.
  const Scalar dust = box * static_cast<Scalar>(1e-12);
  Scalar gap = std::numeric_limits<Scalar>::infinity();
  bool converged = false;
  long long updates = 0;
  while (updates < options.max_pair_updates) {
    // maximal violating pair
    Eigen::Index up = -1, low = -1;
    Scalar up_value = -std::numeric_limits<Scalar>::infinity();
    Scalar low_value = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const Scalar v = -y[t] * gradient[t];
      const bool clear_of_zero = alpha[t] > dust;
      const bool clear_of_box = alpha[t] < box - dust;
      const bool in_up = y[t] > 0 ? clear_of_box : clear_of_zero;
      const bool in_low = y[t] > 0 ? clear_of_zero : clear_of_box;
      if (in_up && v > up_value) {
        up_value = v;
        up = t;
      }
      if (in_low && v < low_value) {
        low_value = v;
        low = t;
      }
    }
    gap = up_value - low_value;
    if (gap < eps) {
      converged = true;
      break;
    }
    const Eigen::Index i = up, j = low;
    auto ki = cache.row(i);
    auto kj = cache.row(j);
    Scalar eta = (*ki)[i] + (*kj)[j] - 2 * (*ki)[j];
    if (eta <= 0) eta = static_cast<Scalar>(1e-12);

    const Scalar error_i = y[i] * gradient[i];  // f(x_i) - y_i, bias-free
    const Scalar error_j = y[j] * gradient[j];
    const Scalar old_i = alpha[i], old_j = alpha[j];
    Scalar lo, hi;
    if (signs[i] != signs[j]) {
      lo = std::max<Scalar>(0, old_j - old_i);
      hi = std::min<Scalar>(box, box + old_j - old_i);
    } else {
      lo = std::max<Scalar>(0, old_i + old_j - box);
      hi = std::min<Scalar>(box, old_i + old_j);
    }
    Scalar next_j = old_j + y[j] * (error_i - error_j) / eta;
    next_j = std::clamp(next_j, lo, hi);
    const Scalar s = y[i] * y[j];
    alpha[j] = next_j;
    alpha[i] = old_i + s * (old_j - next_j);

    const Scalar delta_i = (alpha[i] - old_i) * y[i];
    const Scalar delta_j = (alpha[j] - old_j) * y[j];
    gradient.array() +=
        y.array() * (delta_i * ki->array() + delta_j * kj->array());
    ++updates;
  }
  if (!converged)
    std::cerr << "warning: svm stopped at " << updates
              << " pair updates with KKT gap " << static_cast<double>(gap)
              << "\n";

  // bias: average over free support vectors, else the KKT interval midpoint
  Scalar free_sum = 0;
  Eigen::Index free_count = 0;
  const Scalar margin = static_cast<Scalar>(1e-8) * box;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > margin && alpha[t] < box - margin) {
      free_sum += -y[t] * gradient[t];
      ++free_count;
    }
  Scalar bias;
  if (free_count > 0) {
    bias = free_sum / static_cast<Scalar>(free_count);
  } else {
    Scalar up_value = -std::numeric_limits<Scalar>::infinity();
    Scalar low_value = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index t = 0; t < n; ++t) {
      const Scalar v = -y[t] * gradient[t];
      const bool clear_of_zero = alpha[t] > dust;
      const bool clear_of_box = alpha[t] < box - dust;
      if ((signs[t] == 1 ? clear_of_box : clear_of_zero))
        up_value = std::max(up_value, v);
      if ((signs[t] == 1 ? clear_of_zero : clear_of_box))
        low_value = std::min(low_value, v);
    }
    bias = (up_value + low_value) / 2;
  }

  SvmModel<Scalar> model;
  model.kernel = kernel;
  model.box = box;
  model.bias = bias;
  model.converged = converged;
  model.kkt_violation = gap;
  Eigen::Index sv_count = 0;
  for (Eigen::Index t = 0; t < n; ++t)
    if (alpha[t] > dust) ++sv_count;
  model.support_vectors.resize(sv_count, x.cols());
  model.alphas.resize(sv_count);
  model.sv_signs.resize(sv_count);
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    if (alpha[t] <= dust) continue;
    model.support_vectors.row(k) = x.row(t);
    model.alphas[k] = alpha[t];
    model.sv_signs[k] = signs[t];
    ++k;
  }
  return model;
}

/// Decision values sum alpha_i y_i k(sv_i, x) + b for a batch of rows.
template <class Scalar>
VectorX<Scalar> decision(const SvmModel<Scalar>& model,
                         const Eigen::Ref<const MatrixX<Scalar>>& x) {
  if (x.cols() != model.support_vectors.cols())
    throw std::invalid_argument("svm: dimension mismatch (" +
                                std::to_string(x.cols()) + " vs " +
                                std::to_string(model.support_vectors.cols()) +
                                ")");
  VectorX<Scalar> coeffs(model.alphas.size());
  for (Eigen::Index i = 0; i < coeffs.size(); ++i)
    coeffs[i] = model.alphas[i] * static_cast<Scalar>(model.sv_signs[i]);
  if (model.kernel.kind == KernelKind::Linear)
    return ((x * model.support_vectors.transpose()) * coeffs).array() +
           model.bias;
  VectorX<Scalar> sv_norms = model.support_vectors.rowwise().squaredNorm();
  VectorX<Scalar> x_norms = x.rowwise().squaredNorm();
  MatrixX<Scalar> d2 = (-2 * (x * model.support_vectors.transpose())).rowwise() +
                       sv_norms.transpose();
  d2.colwise() += x_norms;
  return ((-model.kernel.gamma * d2.array().max(Scalar(0))).exp().matrix() *
          coeffs)
             .array() +
         model.bias;
}

/// Single-sample convenience form.
template <class Scalar>
Scalar decision_value(const SvmModel<Scalar>& model,
                      const VectorX<Scalar>& x) {
  return decision<Scalar>(model, MatrixX<Scalar>(x.transpose()))[0];
}

/// One one-vs-rest machine per class, trained on a band subset.
template <class Scalar = double>
struct OvrClassifier {
  std::vector<SvmModel<Scalar>> models;  // index c-1 for class c
  IndexList bands;                       // 0-based columns the models see
};

/// Trains K one-vs-rest machines on the selected bands, in parallel.
template <class Scalar>
OvrClassifier<Scalar> train_ovr(const Dataset<Scalar>& train,
                                const IndexList& bands,
                                const KernelSpec<Scalar>& kernel, Scalar box,
                                const SmoOptions& options = {}) {
  if (bands.empty()) throw std::invalid_argument("svm: no bands selected");
  const int k = train.class_count();
  if (k < 2) throw std::invalid_argument("svm: need at least two classes");
  auto sizes = train.class_sizes();
  for (std::size_t c = 0; c < sizes.size(); ++c)
    if (sizes[c] == 0)
      throw std::runtime_error("svm: class " + std::to_string(c + 1) +
                               " absent from training data");
  Dataset<Scalar> restricted = train.bands(bands);
  OvrClassifier<Scalar> ovr;
  ovr.bands = bands;
  ovr.models.resize(static_cast<std::size_t>(k));
  std::vector<std::string> failures(static_cast<std::size_t>(k));
  parallel_for(static_cast<std::size_t>(k), [&](std::size_t ci) {
    try {
      Eigen::VectorXi signs(restricted.labels.size());
      for (Eigen::Index i = 0; i < restricted.labels.size(); ++i)
        signs[i] = restricted.labels[i] == static_cast<int>(ci) + 1 ? 1 : -1;
      ovr.models[ci] = train_binary<Scalar>(restricted.samples, signs, kernel,
                                            box, options);
    } catch (const std::exception& e) {
      failures[ci] = e.what();
    }
  });
  for (std::size_t ci = 0; ci < failures.size(); ++ci)
    if (!failures[ci].empty())
      throw std::runtime_error("svm: class " + std::to_string(ci + 1) + ": " +
                               failures[ci]);
  return ovr;
}

/// Argmax of the K decision values, ties to the lower class id.
template <class Scalar>
Eigen::VectorXi predict(const OvrClassifier<Scalar>& ovr,
                        const Eigen::Ref<const MatrixX<Scalar>>& samples) {
  Dataset<Scalar> shim;  // reuse the column-subset helper
  shim.samples = samples;
  shim.labels = Eigen::VectorXi::Ones(samples.rows());
  MatrixX<Scalar> x = shim.bands(ovr.bands).samples;
  MatrixX<Scalar> scores(x.rows(), ovr.models.size());
  parallel_for(ovr.models.size(), [&](std::size_t c) {
    scores.col(static_cast<Eigen::Index>(c)) =
        decision<Scalar>(ovr.models[c], x);
  });
  Eigen::VectorXi labels(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best;
    scores.row(i).maxCoeff(&best);  // first max: lowest class id on ties
    labels[i] = static_cast<int>(best) + 1;
  }
  return labels;
}

/// Versioned plain-text dump so experiments can be resumed elsewhere.
template <class Scalar>
void save_classifier(const std::string& path, const OvrClassifier<Scalar>& ovr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "bandsel.ovr.v1\n";
  out << "classes " << ovr.models.size() << '\n';
  out << "bands " << ovr.bands.size();
  for (auto b : ovr.bands) out << ' ' << (b + 1);
  out << '\n';
  for (const auto& model : ovr.models) {
    out << "kernel "
        << (model.kernel.kind == KernelKind::Rbf ? "rbf" : "linear") << ' '
        << model.kernel.gamma << '\n';
    out << "box " << model.box << '\n';
    out << "bias " << model.bias << '\n';
    out << "converged " << (model.converged ? 1 : 0) << '\n';
    out << "sv " << model.support_vectors.rows() << ' '
        << model.support_vectors.cols() << '\n';
    for (Eigen::Index i = 0; i < model.support_vectors.rows(); ++i) {
      out << model.alphas[i] << ' ' << model.sv_signs[i];
      for (Eigen::Index j = 0; j < model.support_vectors.cols(); ++j)
        out << ' ' << model.support_vectors(i, j);
      out << '\n';
    }
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

template <class Scalar = double>
OvrClassifier<Scalar> load_classifier(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string token;
  in >> token;
  if (token != "bandsel.ovr.v1")
    throw std::runtime_error(path + ": unknown model format '" + token + "'");
  OvrClassifier<Scalar> ovr;
  std::size_t classes = 0, band_count = 0;
  in >> token >> classes;  // "classes"
  in >> token >> band_count;
  for (std::size_t i = 0; i < band_count; ++i) {
    long long b;
    in >> b;
    ovr.bands.push_back(static_cast<Eigen::Index>(b - 1));
  }
  ovr.models.resize(classes);
  for (auto& model : ovr.models) {
    std::string kind;
    double gamma, box, bias;
    int converged;
    Eigen::Index rows, cols;
    in >> token >> kind >> gamma;  // "kernel"
    in >> token >> box;
    in >> token >> bias;
    in >> token >> converged;
    in >> token >> rows >> cols;
    model.kernel.kind = kind == "rbf" ? KernelKind::Rbf : KernelKind::Linear;
    model.kernel.gamma = static_cast<Scalar>(gamma);
    model.box = static_cast<Scalar>(box);
    model.bias = static_cast<Scalar>(bias);
    model.converged = converged != 0;
    model.support_vectors.resize(rows, cols);
    model.alphas.resize(rows);
    model.sv_signs.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      double alpha;
      int sign;
      in >> alpha >> sign;
      model.alphas[i] = static_cast<Scalar>(alpha);
      model.sv_signs[i] = sign;
      for (Eigen::Index j = 0; j < cols; ++j) {
        double v;
        in >> v;
        model.support_vectors(i, j) = static_cast<Scalar>(v);
      }
    }
  }
  if (!in) throw std::runtime_error(path + ": truncated model file");
  return ovr;
}

/// 3-fold cross-validated choice of the RBF width from the grid
/// {0.1, 0.5, 1, 2, 5}/d, maximizing weighted MCC on held-out folds.
/// Folds are assigned per class round-robin in row order, so the pick is
/// deterministic. Returns gamma itself.
template <class Scalar>
Scalar select_gamma(const Dataset<Scalar>& train, Scalar box,
                    const SmoOptions& options = {}) {
  const auto d = static_cast<Scalar>(train.band_count());
  const std::vector<Scalar> grid = {static_cast<Scalar>(0.1) / d,
                                    static_cast<Scalar>(0.5) / d,
                                    static_cast<Scalar>(1) / d,
                                    static_cast<Scalar>(2) / d,
                                    static_cast<Scalar>(5) / d};
  auto sizes = train.class_sizes();
  for (auto size : sizes)
    if (size < 2) {
      std::cerr << "warning: class too small for 3-fold cross-validation; "
                   "using gamma = 1/bands\n";
      return Scalar(1) / d;
    }

  std::vector<int> fold(static_cast<std::size_t>(train.sample_count()));
  std::vector<int> counter(sizes.size(), 0);
  for (Eigen::Index i = 0; i < train.sample_count(); ++i) {
    auto c = static_cast<std::size_t>(train.labels[i] - 1);
    fold[static_cast<std::size_t>(i)] = counter[c]++ % 3;
  }

  IndexList all_bands;
  for (Eigen::Index j = 0; j < train.band_count(); ++j)
    all_bands.push_back(j);

  Scalar best_gamma = grid[2];
  double best_score = -std::numeric_limits<double>::infinity();
  for (Scalar gamma : grid) {
    double score = 0;
    for (int held = 0; held < 3; ++held) {
      IndexList fit_rows, val_rows;
      for (Eigen::Index i = 0; i < train.sample_count(); ++i)
        (fold[static_cast<std::size_t>(i)] == held ? val_rows : fit_rows)
            .push_back(i);
      auto fit = train.rows(fit_rows);
      auto val = train.rows(val_rows);
      auto ovr = train_ovr<Scalar>(fit, all_bands,
                                   {KernelKind::Rbf, gamma}, box, options);
      auto predicted = predict<Scalar>(ovr, val.samples);
      score += score_predictions(val.labels, predicted,
                                 train.class_count())
                   .weighted;
    }
    if (score > best_score) {
      best_score = score;
      best_gamma = gamma;
    }
  }
  return best_gamma;
}

}  // namespace bandsel

#endif
