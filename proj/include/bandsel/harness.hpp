#ifndef BANDSEL_HARNESS_HPP
#define BANDSEL_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsel/dataset.hpp"
#include "bandsel/mcm.hpp"
#include "bandsel/metrics.hpp"
#include "bandsel/mutual_info.hpp"
#include "bandsel/pca.hpp"
#include "bandsel/ranking.hpp"
#include "bandsel/relief.hpp"
#include "bandsel/svm.hpp"

namespace bandsel {

/// Everything a sweep needs. Flat key=value config files and CLI flags
/// both funnel through apply_override, CLI last.
struct ExperimentConfig {
  std::string dataset;
  std::string format = "csv";  // csv | cube
  std::string header;          // cube header path
  std::vector<std::string> methods = {"mcm", "mrmr", "jmi", "cmim",
                                      "relief", "pca"};
  std::vector<Eigen::Index> band_counts = {1,  2,  3,  4,  5,  6,  7,
                                           8,  9,  10, 13, 15, 20, 25,
                                           30, 35, 40, 45, 50};
  std::vector<double> ratios = {0.9};
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  double mcm_c = 10.0;
  bool mcm_c_grid = false;
  bool mcm_subsample = false;
  Eigen::Index mcm_max_negatives = 5000;
  int bins = 16;
  Eigen::Index relief_iters = 0;  // 0: one draw per training sample
  double svm_c = 100.0;
  double gamma = 0.0;  // 0: 3-fold grid per (method, ratio, seed)
  Weighting weighting = Weighting::Test;
  std::string out_dir = "out";
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) items.push_back(item.substr(b, e - b + 1));
  }
  return items;
}

inline std::string format_ratio(double ratio) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%g", ratio);
  return buffer;
}

}  // namespace detail

inline void apply_override(ExperimentConfig& config, const std::string& key,
                           const std::string& value) {
  auto as_index_list = [&] {
    std::vector<Eigen::Index> out;
    for (const auto& item : detail::split_list(value))
      out.push_back(std::stoll(item));
    return out;
  };
  if (key == "dataset") config.dataset = value;
  else if (key == "format") config.format = value;
  else if (key == "header") config.header = value;
  else if (key == "methods") config.methods = detail::split_list(value);
  else if (key == "band_counts") config.band_counts = as_index_list();
  else if (key == "ratios") {
    config.ratios.clear();
    for (const auto& item : detail::split_list(value))
      config.ratios.push_back(std::stod(item));
  } else if (key == "seeds") {
    config.seeds.clear();
    for (const auto& item : detail::split_list(value))
      config.seeds.push_back(std::stoull(item));
  } else if (key == "c") {
    if (value == "grid") config.mcm_c_grid = true;
    else {
      config.mcm_c_grid = false;
      config.mcm_c = std::stod(value);
    }
  } else if (key == "subsample") config.mcm_subsample = value == "1" || value == "true";
  else if (key == "max_negatives") config.mcm_max_negatives = std::stoll(value);
  else if (key == "bins") config.bins = std::stoi(value);
  else if (key == "relief_iters") config.relief_iters = std::stoll(value);
  else if (key == "c_svm") config.svm_c = std::stod(value);
  else if (key == "gamma") config.gamma = value == "grid" ? 0.0 : std::stod(value);
  else if (key == "weighting") config.weighting = weighting_from_string(value);
  else if (key == "out_dir") config.out_dir = value;
  else throw std::invalid_argument("unknown config key '" + key + "'");
}

/// Flat "key = value" lines, # comments, lists comma-separated.
inline ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ExperimentConfig config;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    try {
      apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": " + e.what());
    }
  }
  return config;
}

inline std::string grid_key(const std::string& method, Eigen::Index bands,
                            double ratio, std::uint64_t seed) {
  return method + "|" + std::to_string(bands) + "|" +
         detail::format_ratio(ratio) + "|" + std::to_string(seed);
}

/// One grid point of the sweep.
struct RunRecord {
  std::string method;
  Eigen::Index band_count = 0;
  double ratio = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double weighted_mcc = 0;
  double gamma = 0;  // effective kernel width used
  long long wall_ms = 0;
  std::vector<Eigen::Index> bands;  // 0-based prefix of the ranking
  std::vector<double> per_class_mcc;
  std::string message;

  std::string key() const {
    return grid_key(method, band_count, ratio, seed);
  }
};

struct ExperimentReport {
  std::vector<RunRecord> records;
  std::vector<std::string> class_names;

  long long failed_count() const {
    long long failed = 0;
    for (const auto& r : records)
      if (!r.ok) ++failed;
    return failed;
  }
};

namespace detail {

inline const char* records_header() {
  return "method,band_count,ratio,seed,status,weighted_mcc,gamma,wall_ms,"
         "bands,per_class_mcc,message\n";
}

inline void append_record(std::ostream& out, const RunRecord& r) {
  out << r.method << ',' << r.band_count << ',' << format_ratio(r.ratio)
      << ',' << r.seed << ',' << (r.ok ? "ok" : "failed") << ',';
  out.precision(10);
  out << r.weighted_mcc << ',' << r.gamma << ',' << r.wall_ms << ',';
  for (std::size_t i = 0; i < r.bands.size(); ++i)
    out << (i ? " " : "") << (r.bands[i] + 1);
  out << ',';
  for (std::size_t i = 0; i < r.per_class_mcc.size(); ++i)
    out << (i ? " " : "") << r.per_class_mcc[i];
  std::string message = r.message;
  std::replace(message.begin(), message.end(), ',', ';');
  std::replace(message.begin(), message.end(), '\n', ' ');
  out << ',' << message << '\n';
  out.flush();
}

}  // namespace detail

inline std::vector<RunRecord> load_records(const std::string& path) {
  std::vector<RunRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    if (fields.size() < 11) continue;
    RunRecord r;
    r.method = std::string(fields[0]);
    r.band_count = std::stoll(std::string(fields[1]));
    r.ratio = std::stod(std::string(fields[2]));
    r.seed = std::stoull(std::string(fields[3]));
    r.ok = fields[4] == "ok";
    r.weighted_mcc = std::stod(std::string(fields[5]));
    r.gamma = std::stod(std::string(fields[6]));
    r.wall_ms = std::stoll(std::string(fields[7]));
    {
      std::stringstream stream{std::string(fields[8])};
      long long band;
      while (stream >> band) r.bands.push_back(band - 1);
    }
    {
      std::stringstream stream{std::string(fields[9])};
      double mcc_value;
      while (stream >> mcc_value) r.per_class_mcc.push_back(mcc_value);
    }
    r.message = std::string(fields[10]);
    records.push_back(std::move(r));
  }
  return records;
}

/// Loads, normalizes and validates the configured dataset.
inline Dataset<double> load_configured_dataset(const ExperimentConfig& config,
                                               std::size_t* discarded = nullptr) {
  if (config.dataset.empty())
    throw std::invalid_argument("config: dataset path is required");
  Dataset<double> d;
  if (config.format == "csv") {
    d = load_csv<double>(config.dataset, discarded);
  } else if (config.format == "cube") {
    if (config.header.empty())
      throw std::invalid_argument("config: cube format needs a header path");
    d = load_raw_cube<double>(config.dataset, config.header, discarded);
  } else {
    throw std::invalid_argument("config: unknown format '" + config.format +
                                "'");
  }
  return normalize(d);
}

/// Ranks all bands of the training view with the named method. This is the
/// only selector entry point the sweep uses, so tests can drive the exact
/// path the experiments take.
inline FeatureRanking<double> rank_bands_with(const std::string& method,
                                              const Dataset<double>& train,
                                              const ExperimentConfig& config,
                                              std::uint64_t seed) {
  if (method == "mcm") {
    McmOptions options;
    options.tradeoff = config.mcm_c;
    options.subsample = config.mcm_subsample;
    options.max_negatives = config.mcm_max_negatives;
    options.seed = seed;
    if (config.mcm_c_grid) {
      double best_score = -2.0;
      for (double candidate : {0.1, 1.0, 10.0, 100.0}) {
        McmOptions probe = options;
        probe.tradeoff = candidate;
        auto models = fit_ovr(train, probe);
        auto predicted = predict_mcm_ovr<double>(models, train.samples);
        const double score =
            score_predictions(train.labels, predicted, train.class_count())
                .weighted;
        if (score > best_score) {
          best_score = score;
          options.tradeoff = candidate;
        }
      }
    }
    return rank_bands_multiclass(train, options);
  }
  if (method == "mrmr" || method == "jmi" || method == "cmim") {
    auto dd = discretize(train, config.bins);
    if (method == "mrmr") return select_mrmr(dd, train.labels, train.band_count());
    if (method == "jmi") return select_jmi(dd, train.labels, train.band_count());
    return select_cmim(dd, train.labels, train.band_count());
  }
  if (method == "relief") {
    auto weights = relief_weights(train, config.relief_iters, seed);
    return rank_relief(weights);
  }
  if (method == "pca") return rank_pca(covariance_eigen(train));
  throw std::invalid_argument("unknown method '" + method + "'");
}

namespace detail {

/// Kernel width for a k-band evaluation from the per-band scale g0,
/// mirroring the {0.1,...,5}/d grid normalization.
inline double effective_gamma(double per_band_scale, Eigen::Index bands) {
  return per_band_scale / static_cast<double>(bands);
}

inline std::vector<long long> weight_sizes_for(const ExperimentConfig& config,
                                               const Dataset<double>& full,
                                               const Dataset<double>& train,
                                               const Dataset<double>& test) {
  const Dataset<double>& source = config.weighting == Weighting::Train ? train
                                  : config.weighting == Weighting::Total
                                      ? full
                                      : test;
  const int k = full.class_count();
  std::vector<long long> counts(static_cast<std::size_t>(k), 0);
  for (Eigen::Index i = 0; i < source.labels.size(); ++i)
    ++counts[static_cast<std::size_t>(source.labels[i] - 1)];
  return counts;
}

}  // namespace detail

/// Runs the full sweep grid, writing each record to
/// <out_dir>/records.csv as soon as it completes. Grid points already
/// present in that file are skipped, so an interrupted sweep resumes and a
/// finished one leaves the file byte-identical. Per-record failures are
/// recorded, not fatal.
inline ExperimentReport run(const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const std::string records_path =
      (fs::path(config.out_dir) / "records.csv").string();

  ExperimentReport report;
  report.records = load_records(records_path);
  std::set<std::string> done;
  for (const auto& r : report.records) done.insert(r.key());

  for (const auto& method : config.methods)
    if (method != "mcm" && method != "mrmr" && method != "jmi" &&
        method != "cmim" && method != "relief" && method != "pca")
      throw std::invalid_argument("unknown method '" + method + "'");
  if (config.methods.empty() || config.seeds.empty() ||
      config.band_counts.empty() || config.ratios.empty())
    throw std::invalid_argument(
        "config: need at least one method, band count, ratio and seed");
  for (double ratio : config.ratios)
    if (!(ratio > 0.0 && ratio < 1.0))
      throw std::invalid_argument("config: ratios must lie in (0,1)");

  bool anything_missing = false;
  for (const auto& method : config.methods)
    for (Eigen::Index k : config.band_counts)
      for (double ratio : config.ratios)
        for (auto seed : config.seeds)
          if (!done.count(grid_key(method, k, ratio, seed)))
            anything_missing = true;

  std::ofstream out;
  if (!fs::exists(records_path)) {
    out.open(records_path);
    if (!out) throw std::runtime_error("cannot write " + records_path);
    out << detail::records_header();
  } else if (anything_missing) {
    out.open(records_path, std::ios::app);
    if (!out) throw std::runtime_error("cannot write " + records_path);
  }
  if (!anything_missing) return report;

  auto full = load_configured_dataset(config);
  report.class_names.clear();
  for (int c = 1; c <= full.class_count(); ++c)
    report.class_names.push_back(full.class_name(c));
  for (Eigen::Index k : config.band_counts)
    if (k < 1 || k > full.band_count())
      throw std::invalid_argument("config: band count " + std::to_string(k) +
                                  " outside 1.." +
                                  std::to_string(full.band_count()));

  for (auto seed : config.seeds) {
    for (double ratio : config.ratios) {
      auto split = stratified_split(full, ratio, seed);
      // leakage boundary: the split must partition the rows
      std::vector<char> seen(static_cast<std::size_t>(full.sample_count()), 0);
      for (auto i : split.train_indices) ++seen[static_cast<std::size_t>(i)];
      for (auto i : split.test_indices) ++seen[static_cast<std::size_t>(i)];
      for (char count : seen)
        if (count != 1)
          throw std::logic_error("split is not a partition of the dataset");
      auto train = full.rows(split.train_indices);
      auto test = full.rows(split.test_indices);
      auto weight_sizes = detail::weight_sizes_for(config, full, train, test);

      for (const auto& method : config.methods) {
        std::vector<Eigen::Index> missing;
        for (Eigen::Index k : config.band_counts)
          if (!done.count(grid_key(method, k, ratio, seed)))
            missing.push_back(k);
        if (missing.empty()) continue;

        FeatureRanking<double> ranking;
        std::string ranking_error;
        const auto rank_start = std::chrono::steady_clock::now();
        try {
          ranking = rank_bands_with(method, train, config, seed);
        } catch (const std::exception& e) {
          ranking_error = e.what();
        }
        const auto rank_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - rank_start)
                .count();

        double gamma_scale = config.gamma;
        if (ranking_error.empty() && config.gamma <= 0) {
          const auto probe_bands = static_cast<Eigen::Index>(std::min<std::size_t>(
              15, static_cast<std::size_t>(
                      *std::max_element(config.band_counts.begin(),
                                        config.band_counts.end()))));
          auto cv_view = train.bands(ranking.top(
              static_cast<std::size_t>(probe_bands)));
          const double cv_gamma =
              select_gamma<double>(cv_view, config.svm_c);
          gamma_scale = cv_gamma * static_cast<double>(probe_bands);
        }

        for (Eigen::Index k : missing) {
          RunRecord record;
          record.method = method;
          record.band_count = k;
          record.ratio = ratio;
          record.seed = seed;
          const auto start = std::chrono::steady_clock::now();
          if (!ranking_error.empty()) {
            record.ok = false;
            record.message = ranking_error;
            record.wall_ms = rank_ms;
          } else {
            try {
              record.bands = ranking.top(static_cast<std::size_t>(k));
              record.gamma = detail::effective_gamma(gamma_scale, k);
              auto ovr = train_ovr<double>(
                  train, record.bands,
                  {KernelKind::Rbf, record.gamma}, config.svm_c);
              auto predicted = predict<double>(ovr, test.samples);
              auto scored = score_predictions(test.labels, predicted,
                                              full.class_count(), weight_sizes);
              record.per_class_mcc = scored.per_class_mcc;
              record.weighted_mcc = scored.weighted;
              record.ok = true;
            } catch (const std::exception& e) {
              record.ok = false;
              record.message = e.what();
            }
            record.wall_ms =
                rank_ms / static_cast<long long>(missing.size()) +
                std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - start)
                    .count();
          }
          detail::append_record(out, record);
          done.insert(record.key());
          report.records.push_back(std::move(record));
        }
      }
    }
  }
  return report;
}

/// Writes the three report files: the per-method selected-band lists, the
/// per-class MCC table at one grid point per (ratio, seed), and the
/// long-format sweep results.
inline void emit_tables(const ExperimentReport& report,
                        const std::string& out_dir,
                        Eigen::Index table_bands = 15) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const auto bands_path = fs::path(out_dir) / "selected_bands.csv";
  const auto table_path = fs::path(out_dir) / "mcc_per_class.csv";
  const auto long_path = fs::path(out_dir) / "results_long.csv";
  std::ofstream bands_out(bands_path);
  std::ofstream table_out(table_path);
  std::ofstream long_out(long_path);
  if (!bands_out || !table_out || !long_out)
    throw std::runtime_error("cannot write report files under " + out_dir);

  // (a) per-method band lists: the longest available prefix, capped at 15
  bands_out << "ratio,seed,method,bands\n";
  std::map<std::string, const RunRecord*> widest;
  for (const auto& r : report.records) {
    if (!r.ok) continue;
    const std::string group =
        detail::format_ratio(r.ratio) + "|" + std::to_string(r.seed) + "|" +
        r.method;
    auto [it, inserted] = widest.emplace(group, &r);
    if (!inserted && r.band_count > it->second->band_count) it->second = &r;
  }
  for (const auto& [group, record] : widest) {
    bands_out << detail::format_ratio(record->ratio) << ',' << record->seed
              << ',' << record->method << ',';
    const std::size_t shown =
        std::min<std::size_t>(15, record->bands.size());
    for (std::size_t i = 0; i < shown; ++i)
      bands_out << (i ? " " : "") << (record->bands[i] + 1);
    bands_out << '\n';
  }

  // (b) class x method MCC matrix at the chosen band count
  std::set<std::string> methods;
  std::set<std::pair<std::string, std::uint64_t>> grid_points;
  std::vector<const RunRecord*> table_records;
  for (const auto& r : report.records) {
    if (!r.ok || r.band_count != table_bands) continue;
    table_records.push_back(&r);
    methods.insert(r.method);
    grid_points.insert({detail::format_ratio(r.ratio), r.seed});
  }
  auto find_record = [&](const std::string& method,
                         const std::string& ratio_text,
                         std::uint64_t seed) -> const RunRecord* {
    for (const auto* r : table_records)
      if (r->method == method &&
          detail::format_ratio(r->ratio) == ratio_text && r->seed == seed)
        return r;
    return nullptr;
  };
  table_out.precision(10);
  table_out << "ratio,seed,class";
  for (const auto& m : methods) table_out << ',' << m;
  table_out << '\n';
  std::size_t classes = 0;
  for (const auto* r : table_records)
    classes = std::max(classes, r->per_class_mcc.size());
  for (const auto& [ratio_text, seed] : grid_points) {
    for (std::size_t c = 0; c < classes; ++c) {
      table_out << ratio_text << ',' << seed << ','
                << (c < report.class_names.size()
                        ? report.class_names[c]
                        : "class_" + std::to_string(c + 1));
      for (const auto& m : methods) {
        table_out << ',';
        if (const auto* r = find_record(m, ratio_text, seed);
            r && c < r->per_class_mcc.size())
          table_out << r->per_class_mcc[c];
      }
      table_out << '\n';
    }
    table_out << ratio_text << ',' << seed << ",weighted_average";
    for (const auto& m : methods) {
      table_out << ',';
      if (const auto* r = find_record(m, ratio_text, seed))
        table_out << r->weighted_mcc;
    }
    table_out << '\n';
  }

  // (c) long format for plotting
  long_out << "method,band_count,ratio,seed,weighted_mcc\n";
  long_out.precision(10);
  for (const auto& r : report.records)
    if (r.ok)
      long_out << r.method << ',' << r.band_count << ','
               << detail::format_ratio(r.ratio) << ',' << r.seed << ','
               << r.weighted_mcc << '\n';
}

}  // namespace bandsel

#endif
