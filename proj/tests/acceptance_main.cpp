// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 8 needs the Indian Pines export on disk and is
// skipped (not failed) when absent.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "bandsel/harness.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace bandsel;

namespace {

int failures = 0;

void report(int number, const std::string& label,
            const std::function<bool(std::string&)>& body,
            bool skip = false, const std::string& skip_reason = "") {
  if (skip) {
    std::cout << "[SKIP] " << number << ". " << label << " (" << skip_reason
              << ")\n";
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  std::cout << (ok ? "[PASS] " : "[FAIL] ") << number << ". " << label;
  if (!detail.empty()) std::cout << " — " << detail;
  std::cout << " (" << seconds << " s)\n";
  if (!ok) ++failures;
}

bool approximately(double a, double b, double tol) {
  return std::abs(a - b) <= tol;
}

// ---- criterion 1 -------------------------------------------------------
bool lp_oracle_equivalence(std::string& detail) {
  int optimal = 0;
  for (std::uint64_t seed = 1000; seed < 1200; ++seed) {
    auto lp = oracles::random_lp(seed);
    auto expected = oracles::enumerate_lp(lp);
    auto got = solve(lp);
    if (got.status != expected.status) {
      detail = "status mismatch at seed " + std::to_string(seed);
      return false;
    }
    if (got.status == LpStatus::Optimal) {
      ++optimal;
      if (!approximately(got.objective_value, expected.objective, 1e-6)) {
        detail = "objective mismatch at seed " + std::to_string(seed);
        return false;
      }
    }
  }
  detail = std::to_string(optimal) + "/200 optimal, all statuses agree";
  return true;
}

// ---- criterion 2 -------------------------------------------------------
bool mcm_hand_case(std::string& detail) {
  Eigen::MatrixXd x(2, 1);
  x << 1, -1;
  Eigen::VectorXi signs(2);
  signs << 1, -1;
  auto model = fit_binary<double>(x, signs, 10.0);
  const bool ok = approximately(model.weights[0], 1.0, 1e-7) &&
                  approximately(model.bias, 0.0, 1e-7) &&
                  approximately(model.vc_bound, 1.0, 1e-7) &&
                  approximately(model.objective_value, 1.0, 1e-7);
  std::ostringstream os;
  os << "w=" << model.weights[0] << " b=" << model.bias
     << " h=" << model.vc_bound << " obj=" << model.objective_value;
  detail = os.str();
  return ok;
}

// ---- criterion 3 -------------------------------------------------------
bool mi_oracle_equivalence(std::string& detail) {
  std::mt19937 rng(2024);
  std::uniform_int_distribution<int> len(1, 300), alphabet(1, 5);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const int n = len(rng);
    auto draw = [&](int a) {
      std::uniform_int_distribution<int> dist(0, a - 1);
      Eigen::VectorXi v(n);
      for (int i = 0; i < n; ++i) v[i] = dist(rng);
      return v;
    };
    auto x = draw(alphabet(rng));
    auto y = draw(alphabet(rng));
    auto z = draw(alphabet(rng));
    const double mi_err =
        std::abs(mutual_info(x, y) - oracles::mi_reference(x, y));
    const double cmi_err =
        std::abs(conditional_mi(x, y, z) - oracles::cmi_reference(x, y, z));
    auto xz = paired_codes(x, z, z.maxCoeff() + 1);
    const double chain_err = std::abs(
        mutual_info(xz, y) - (mutual_info(z, y) + conditional_mi(x, y, z)));
    worst = std::max({worst, mi_err, cmi_err, chain_err});
    if (worst > 1e-12) {
      detail = "max error " + std::to_string(worst) + " at trial " +
               std::to_string(trial);
      return false;
    }
  }
  std::ostringstream os;
  os << "500 triples, max error " << worst;
  detail = os.str();
  return true;
}

// ---- criterion 4 -------------------------------------------------------
bool selector_sanity(std::string& detail) {
  // xor truth table x6; band 2 duplicates band 0
  DiscretizedData<double> dd;
  dd.bin_count = 2;
  dd.codes.resize(24, 3);
  Eigen::VectorXi y(24);
  for (int c = 0; c < 6; ++c)
    for (int pattern = 0; pattern < 4; ++pattern) {
      const int row = 4 * c + pattern;
      dd.codes(row, 0) = pattern & 1;
      dd.codes(row, 1) = (pattern >> 1) & 1;
      dd.codes(row, 2) = pattern & 1;
      y[row] = dd.codes(row, 0) ^ dd.codes(row, 1);
    }
  auto cmim = select_cmim(dd, y, 2);
  if (cmim.order[0] != 0 || cmim.order[1] != 1) {
    detail = "cmim picked band " + std::to_string(cmim.order[1] + 1);
    return false;
  }
  const double dup_criterion = mutual_info(dd.codes.col(2), y) -
                               mutual_info(dd.codes.col(2), dd.codes.col(0));
  const double independent_criterion =
      mutual_info(dd.codes.col(1), y) -
      mutual_info(dd.codes.col(1), dd.codes.col(0));
  if (!(dup_criterion < independent_criterion)) {
    detail = "mrmr did not penalize the duplicate";
    return false;
  }
  auto mrmr = select_mrmr(dd, y, 2);
  std::ostringstream os;
  os << "cmim second pick = complementary band; mrmr duplicate criterion "
     << dup_criterion << " < " << independent_criterion
     << ", second pick band " << (mrmr.order[1] + 1);
  detail = os.str();
  return mrmr.order[1] == 1;
}

// ---- criterion 5 -------------------------------------------------------
bool relief_hand_case(std::string& detail) {
  Dataset<> d;
  d.samples.resize(3, 1);
  d.samples << 0.0, 0.1, 1.0;
  d.labels.resize(3);
  d.labels << 1, 1, 2;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(1);
  relief_step(d, 0, w);
  std::ostringstream os;
  os << "W = " << w[0];
  detail = os.str();
  return w[0] == 0.99;
}

// ---- criterion 6 -------------------------------------------------------
bool svm_dual_check(std::string& detail) {
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss(0.0, 0.5);
  std::uniform_int_distribution<int> size(6, 30);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = size(rng);
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXi signs(n);
    std::vector<Eigen::Index> pos, neg;
    for (int i = 0; i < n; ++i) {
      const bool first = i % 2 == 0;
      x(i, 0) = (first ? -1.0 : 1.0) + gauss(rng);
      x(i, 1) = (first ? -1.0 : 1.0) + gauss(rng);
      signs[i] = first ? 1 : -1;
      (first ? pos : neg).push_back(i);
    }
    KernelSpec<double> kernel{KernelKind::Rbf, 1.0};
    const double box = 5.0;
    auto model = train_binary<double>(x, signs, kernel, box);
    if (!(model.kkt_violation < 1e-3)) {
      detail = "KKT gap " + std::to_string(model.kkt_violation) + " at trial " +
               std::to_string(trial);
      return false;
    }
    Eigen::MatrixXd gram(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        gram(i, j) = std::exp(-(x.row(i) - x.row(j)).squaredNorm());
    auto objective = [&](const Eigen::VectorXd& alpha) {
      double quad = 0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          quad += alpha[i] * alpha[j] * signs[i] * signs[j] * gram(i, j);
      return alpha.sum() - 0.5 * quad;
    };
    Eigen::VectorXd trained = Eigen::VectorXd::Zero(n);
    double best = 0;
    {  // evaluate at the trained point via its support vectors
      double quad = 0;
      for (Eigen::Index i = 0; i < model.alphas.size(); ++i)
        for (Eigen::Index j = 0; j < model.alphas.size(); ++j)
          quad += model.alphas[i] * model.alphas[j] * model.sv_signs[i] *
                  model.sv_signs[j] *
                  std::exp(-(model.support_vectors.row(i) -
                             model.support_vectors.row(j))
                                .squaredNorm());
      best = model.alphas.sum() - 0.5 * quad;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int probe = 0; probe < 1000; ++probe) {
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
      for (int round = 0; round < 10; ++round) {
        auto i = pos[rng() % pos.size()];
        auto j = neg[rng() % neg.size()];
        const double room =
            std::min(box - alpha[i], box - alpha[j]) * unit(rng);
        alpha[i] += room;
        alpha[j] += room;
      }
      if (objective(alpha) > best + 1e-6) {
        detail = "random feasible point beat smo at trial " +
                 std::to_string(trial);
        return false;
      }
    }
  }
  detail = "20 problems, 1000 feasible probes each";
  return true;
}

// ---- criterion 7 -------------------------------------------------------
bool mcc_arithmetic(std::string& detail) {
  const bool ok = mcc({5, 0, 5, 0}) == 1.0 && mcc({0, 3, 4, 0}) == 0.0 &&
                  approximately(mcc({4, 1, 3, 2}), 10.0 / std::sqrt(600.0),
                                1e-6);
  std::ostringstream os;
  os << "perfect=" << mcc({5, 0, 5, 0}) << " zero-factor=" << mcc({0, 3, 4, 0})
     << " mixed=" << mcc({4, 1, 3, 2});
  detail = os.str();
  return ok;
}

// ---- criterion 8 -------------------------------------------------------
std::string find_indian_pines() {
  if (const char* env = std::getenv("BANDSEL_INDIAN_PINES"))
    if (fs::exists(env)) return env;
  for (const char* candidate :
       {"data/indian_pines.csv", "../data/indian_pines.csv",
        "../../data/indian_pines.csv", "../../../data/indian_pines.csv"})
    if (fs::exists(candidate)) return candidate;
  return {};
}

bool indian_pines_reproduction(std::string& detail, const std::string& csv) {
  ExperimentConfig config;
  config.dataset = csv;
  config.methods = {"mcm", "mrmr", "jmi", "pca"};
  config.band_counts = {15, 50};
  config.ratios = {0.9};
  config.seeds = {1, 2, 3, 4, 5};
  config.out_dir = "acceptance_out";
  auto run_report = run(config);
  if (run_report.failed_count() > 0) {
    detail = "sweep had failed records";
    return false;
  }
  auto mean_mcc = [&](const std::string& method, Eigen::Index k) {
    double sum = 0;
    int count = 0;
    for (const auto& r : run_report.records)
      if (r.ok && r.method == method && r.band_count == k) {
        sum += r.weighted_mcc;
        ++count;
      }
    return count ? sum / count : -1.0;
  };
  const double mcm15 = mean_mcc("mcm", 15);
  const double mcm50 = mean_mcc("mcm", 50);
  const double pca15 = mean_mcc("pca", 15);
  const double mrmr15 = mean_mcc("mrmr", 15);
  const double jmi15 = mean_mcc("jmi", 15);

  // (b) reference top-15 band list for the MCM selector on this scene at a
  // 0.90 test fraction (1-based indices)
  const std::set<Eigen::Index> reference = {114, 133, 118, 129, 70,
                                            127, 125, 131, 46,  116,
                                            128, 63,  134, 159, 53};
  int seeds_with_overlap = 0, seeds_total = 0;
  for (const auto& r : run_report.records) {
    if (!r.ok || r.method != "mcm" || r.band_count != 15) continue;
    ++seeds_total;
    int overlap = 0;
    for (auto band : r.bands)
      if (reference.count(band + 1)) ++overlap;
    if (overlap >= 5) ++seeds_with_overlap;
  }

  std::ostringstream os;
  os << "mcm15=" << mcm15 << " pca15=" << pca15 << " mrmr15=" << mrmr15
     << " jmi15=" << jmi15 << " mcm50=" << mcm50 << " overlap-majority "
     << seeds_with_overlap << "/" << seeds_total;
  detail = os.str();
  const bool ordering = mcm15 >= pca15 + 0.15 && mcm15 > mrmr15 &&
                        mcm15 > jmi15;
  const bool overlap_majority = seeds_with_overlap * 2 > seeds_total;
  const bool sparsity = std::abs(mcm15 - mcm50) <= 0.05;
  return ordering && overlap_majority && sparsity;
}

// ---- criterion 9 -------------------------------------------------------
bool leakage_guard(std::string& detail) {
  // toy scene, then the same scene with every test-row value poisoned;
  // selectors and trainers only ever see the training view, so both runs
  // must match bit for bit
  std::mt19937 rng(31337);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Dataset<> d;
  const int per_class = 14, classes = 3, bands = 4;
  d.samples.resize(per_class * classes, bands);
  d.labels.resize(per_class * classes);
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      const Eigen::Index row = c * per_class + i;
      for (int b = 0; b < bands; ++b)
        d.samples(row, b) =
            b == 1 ? 0.25 * c + 0.2 * unit(rng) : unit(rng);
      d.labels[row] = c + 1;
    }
  d = normalize(d);

  ExperimentConfig config;
  config.methods = {"mcm", "mrmr", "jmi", "cmim", "relief", "pca"};
  config.band_counts = {1, 2, 3};
  config.bins = 4;
  config.gamma = 0.0;  // exercise the cross-validated width path too

  const double ratio = 0.5;
  const std::uint64_t seed = 11;
  auto split = stratified_split(d, ratio, seed);
  Dataset<> poisoned = d;
  for (auto i : split.test_indices)
    poisoned.samples.row(i).setConstant(
        std::numeric_limits<double>::quiet_NaN());

  auto clean_train = d.rows(split.train_indices);
  auto poisoned_train = poisoned.rows(split.train_indices);
  auto test = d.rows(split.test_indices);  // clean rows, kept aside

  if (clean_train.samples != poisoned_train.samples) {
    detail = "training view overlapped the poisoned rows";
    return false;
  }

  for (const auto& method : config.methods) {
    auto a = rank_bands_with(method, clean_train, config, seed);
    auto b = rank_bands_with(method, poisoned_train, config, seed);
    if (a.order != b.order || a.scores != b.scores) {
      detail = method + " ranking changed under test-row poisoning";
      return false;
    }
    for (Eigen::Index k : config.band_counts) {
      const double gamma = select_gamma<double>(
          poisoned_train.bands(b.top(static_cast<std::size_t>(k))), 100.0);
      auto ovr_a = train_ovr<double>(clean_train, a.top(static_cast<std::size_t>(k)),
                                     {KernelKind::Rbf, gamma}, 100.0);
      auto ovr_b = train_ovr<double>(poisoned_train,
                                     b.top(static_cast<std::size_t>(k)),
                                     {KernelKind::Rbf, gamma}, 100.0);
      auto pa = predict<double>(ovr_a, test.samples);
      auto pb = predict<double>(ovr_b, test.samples);
      if (pa != pb) {
        detail = method + " predictions changed under test-row poisoning";
        return false;
      }
      auto scored = score_predictions(test.labels, pa, d.class_count());
      if (!std::isfinite(scored.weighted)) {
        detail = method + " produced a non-finite score";
        return false;
      }
    }
  }
  detail = "6 selectors x 3 band counts, zero test-value reads";
  return true;
}

}  // namespace

int main() {
  std::cout << "acceptance suite\n";
  report(1, "LP solver matches the vertex-enumeration oracle on 200 programs",
         lp_oracle_equivalence);
  report(2, "two-point margin program solves to (w,b,h,obj)=(1,0,1,1)",
         mcm_hand_case);
  report(3, "MI estimators match entropy arithmetic on 500 random triples",
         mi_oracle_equivalence);
  report(4, "greedy selectors handle xor-with-duplicate correctly",
         selector_sanity);
  report(5, "RELIEF hand case yields W = 0.99 exactly", relief_hand_case);
  report(6, "SMO dominates 1000 random feasible dual points per problem",
         svm_dual_check);
  report(7, "MCC arithmetic on the three hand cases", mcc_arithmetic);
  const std::string indian_pines = find_indian_pines();
  report(8,
         "Indian Pines reproduction (ordering, band overlap, sparsity)",
         [&](std::string& detail) {
           return indian_pines_reproduction(detail, indian_pines);
         },
         indian_pines.empty(),
         "dataset not found: set BANDSEL_INDIAN_PINES or place "
         "data/indian_pines.csv");
  report(9, "no selector or trainer reads test rows across the sweep grid",
         leakage_guard);

  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all criteria passed"
            << (indian_pines.empty() ? " (criterion 8 skipped)" : "") << "\n";
  return 0;
}
