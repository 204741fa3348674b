#ifndef BANDSEL_METRICS_HPP
#define BANDSEL_METRICS_HPP

#include <Eigen/Core>

#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bandsel {

struct ConfusionCounts {
  long long tp = 0;
  long long fp = 0;
  long long tn = 0;
  long long fn = 0;

  long long total() const { return tp + fp + tn + fn; }
};

/// Matthews correlation coefficient,
///   (tp*tn - fp*fn) / sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn)),
/// with any zero factor mapping to 0 by convention.
inline double mcc(const ConfusionCounts& c) {
  if (c.tp < 0 || c.fp < 0 || c.tn < 0 || c.fn < 0)
    throw std::invalid_argument("mcc: negative count");
  const double pp = static_cast<double>(c.tp + c.fp);
  const double ap = static_cast<double>(c.tp + c.fn);
  const double pn = static_cast<double>(c.tn + c.fp);
  const double an = static_cast<double>(c.tn + c.fn);
  if (pp == 0 || ap == 0 || pn == 0 || an == 0) return 0.0;
  const double numerator = static_cast<double>(c.tp) * static_cast<double>(c.tn) -
                           static_cast<double>(c.fp) * static_cast<double>(c.fn);
  return numerator / std::sqrt(pp * ap * pn * an);
}

/// Class-size-weighted average of per-class MCC values.
inline double weighted_mcc(const std::vector<double>& per_class,
                           const std::vector<long long>& sizes) {
  if (per_class.size() != sizes.size())
    throw std::invalid_argument("weighted_mcc: length mismatch");
  long long total = 0;
  for (long long s : sizes) {
    if (s < 0) throw std::invalid_argument("weighted_mcc: negative size");
    total += s;
  }
  if (total == 0) throw std::invalid_argument("weighted_mcc: all sizes zero");
  double sum = 0;
  for (std::size_t c = 0; c < per_class.size(); ++c)
    sum += static_cast<double>(sizes[c]) / static_cast<double>(total) *
           per_class[c];
  return sum;
}

/// Which population's class sizes weight the average.
enum class Weighting { Test, Train, Total };

inline const char* to_string(Weighting w) {
  switch (w) {
    case Weighting::Test: return "test";
    case Weighting::Train: return "train";
    case Weighting::Total: return "total";
  }
  return "?";
}

inline Weighting weighting_from_string(const std::string& s) {
  if (s == "test") return Weighting::Test;
  if (s == "train") return Weighting::Train;
  if (s == "total") return Weighting::Total;
  throw std::invalid_argument("unknown weighting '" + s + "'");
}

/// Per-class one-vs-rest confusion accounting over multiclass predictions,
/// the per-class MCCs, and their weighted average.
struct McReport {
  std::vector<ConfusionCounts> confusion;
  std::vector<double> per_class_mcc;
  std::vector<double> weights;  // fractions, sum to 1
  double weighted = 0;
};

/// Scores predictions against truth. `weight_sizes` picks the weighting
/// population (defaults to the class sizes of `truth`, i.e. the evaluated
/// set itself).
inline McReport score_predictions(const Eigen::VectorXi& truth,
                                  const Eigen::VectorXi& predicted,
                                  int class_count,
                                  std::vector<long long> weight_sizes = {}) {
  if (truth.size() != predicted.size())
    throw std::invalid_argument("score_predictions: length mismatch");
  McReport report;
  report.confusion.resize(static_cast<std::size_t>(class_count));
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    for (int c = 1; c <= class_count; ++c) {
      auto& counts = report.confusion[static_cast<std::size_t>(c - 1)];
      const bool actual = truth[i] == c;
      const bool guessed = predicted[i] == c;
      if (actual && guessed) ++counts.tp;
      else if (actual) ++counts.fn;
      else if (guessed) ++counts.fp;
      else ++counts.tn;
    }
  }
  if (weight_sizes.empty()) {
    weight_sizes.resize(static_cast<std::size_t>(class_count), 0);
    for (Eigen::Index i = 0; i < truth.size(); ++i)
      if (truth[i] >= 1 && truth[i] <= class_count)
        ++weight_sizes[static_cast<std::size_t>(truth[i] - 1)];
  }
  for (const auto& counts : report.confusion)
    report.per_class_mcc.push_back(mcc(counts));
  report.weighted = weighted_mcc(report.per_class_mcc, weight_sizes);
  long long total = 0;
  for (long long s : weight_sizes) total += s;
  for (long long s : weight_sizes)
    report.weights.push_back(static_cast<double>(s) /
                             static_cast<double>(total));
  return report;
}

/// CSV form: one row per class (name, size, mcc), weighted-average footer.
inline void write_mcc_report(std::ostream& out, const McReport& report,
                             const std::vector<std::string>& class_names,
                             const std::vector<long long>& sizes) {
  out << "class,size,mcc\n";
  out.precision(10);
  for (std::size_t c = 0; c < report.per_class_mcc.size(); ++c) {
    const std::string name = c < class_names.size()
                                 ? class_names[c]
                                 : "class_" + std::to_string(c + 1);
    out << name << ',' << (c < sizes.size() ? sizes[c] : 0) << ','
        << report.per_class_mcc[c] << '\n';
  }
  out << "weighted_average,," << report.weighted << '\n';
}

}  // namespace bandsel

#endif
