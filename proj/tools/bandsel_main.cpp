// bandsel: band selection and classification benchmarking for
// hyperspectral sample matrices.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "bandsel/harness.hpp"

namespace {

using bandsel::ExperimentConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
};

// every config key doubles as a CLI flag; CLI wins over the file
void add_config_flags(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "key=value config file");
  static const std::vector<std::pair<std::string, std::string>> keys = {
      {"dataset", "dataset path"},
      {"format", "csv or cube"},
      {"header", "cube header path"},
      {"methods", "comma list of mcm,mrmr,jmi,cmim,relief,pca"},
      {"band_counts", "comma list of band counts"},
      {"ratios", "comma list of test fractions"},
      {"seeds", "comma list of split seeds"},
      {"c", "MCM tradeoff C, or 'grid'"},
      {"subsample", "cap MCM negatives per one-vs-rest fit"},
      {"max_negatives", "negative-class cap when subsampling"},
      {"bins", "discretization bin count"},
      {"relief_iters", "RELIEF iterations (0: one per train sample)"},
      {"c_svm", "SVM box constraint"},
      {"gamma", "RBF width scale, or 'grid'"},
      {"weighting", "MCC weighting population: test, train or total"},
      {"out_dir", "output directory"},
  };
  for (const auto& [key, help] : keys) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    cmd->add_option_function<std::string>(
        flag,
        [&flags, key = key](const std::string& value) {
          flags.overrides.emplace_back(key, value);
        },
        help);
  }
}

ExperimentConfig build_config(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty())
    config = bandsel::parse_config_file(flags.config_path);
  for (const auto& [key, value] : flags.overrides)
    bandsel::apply_override(config, key, value);
  return config;
}

int run_ingest(const std::string& data, const std::string& header,
               const std::string& out) {
  std::size_t discarded = 0;
  auto dataset = bandsel::load_raw_cube<double>(data, header, &discarded);
  bandsel::save_csv(out, dataset);
  std::cout << "wrote " << out << ": " << dataset.sample_count()
            << " samples, " << dataset.band_count() << " bands, "
            << dataset.class_count() << " classes (" << discarded
            << " unlabeled pixels discarded)\n";
  return 0;
}

int run_rank(const CommonFlags& flags, const std::string& method,
             double ratio, std::uint64_t seed, const std::string& out_path,
             const std::string& dump_lp_path) {
  auto config = build_config(flags);
  auto full = bandsel::load_configured_dataset(config);
  auto split = bandsel::stratified_split(full, ratio, seed);
  for (const auto& warning : split.warnings)
    std::cerr << "warning: " << warning << '\n';
  auto train = full.rows(split.train_indices);

  if (!dump_lp_path.empty() && method == "mcm") {
    Eigen::VectorXi signs(train.labels.size());
    for (Eigen::Index i = 0; i < train.labels.size(); ++i)
      signs[i] = train.labels[i] == 1 ? 1 : -1;
    auto lp = bandsel::detail::build_mcm_lp<double>(train.samples, signs,
                                                    config.mcm_c);
    std::ofstream dump(dump_lp_path);
    bandsel::dump_lp(dump, lp);
    std::cerr << "dumped class-1 LP to " << dump_lp_path << '\n';
  }

  auto ranking = bandsel::rank_bands_with(method, train, config, seed);
  if (out_path.empty()) {
    bandsel::write_ranking_csv(std::cout, ranking);
  } else {
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    bandsel::write_ranking_csv(out, ranking);
    std::cout << "wrote " << out_path << '\n';
  }
  return 0;
}

int run_eval(const CommonFlags& flags, const std::string& method,
             Eigen::Index bands, double ratio, std::uint64_t seed,
             const std::string& save_model, const std::string& load_model,
             const std::string& report_path) {
  auto config = build_config(flags);
  auto full = bandsel::load_configured_dataset(config);
  auto split = bandsel::stratified_split(full, ratio, seed);
  auto train = full.rows(split.train_indices);
  auto test = full.rows(split.test_indices);

  bandsel::OvrClassifier<double> ovr;
  double gamma = 0;
  if (!load_model.empty()) {
    ovr = bandsel::load_classifier<double>(load_model);
    gamma = ovr.models.empty() ? 0 : ovr.models[0].kernel.gamma;
  } else {
    auto ranking = bandsel::rank_bands_with(method, train, config, seed);
    auto selected = ranking.top(static_cast<std::size_t>(bands));
    if (config.gamma > 0) {
      gamma = config.gamma / static_cast<double>(bands);
    } else {
      gamma = bandsel::select_gamma<double>(train.bands(selected),
                                            config.svm_c);
    }
    ovr = bandsel::train_ovr<double>(train, selected,
                                     {bandsel::KernelKind::Rbf, gamma},
                                     config.svm_c);
    if (!save_model.empty()) {
      bandsel::save_classifier(save_model, ovr);
      std::cerr << "saved model to " << save_model << '\n';
    }
  }

  auto predicted = bandsel::predict<double>(ovr, test.samples);
  std::vector<long long> weight_sizes;
  {
    const auto& source = config.weighting == bandsel::Weighting::Train
                             ? train
                             : config.weighting == bandsel::Weighting::Total
                                 ? full
                                 : test;
    weight_sizes.assign(static_cast<std::size_t>(full.class_count()), 0);
    for (Eigen::Index i = 0; i < source.labels.size(); ++i)
      ++weight_sizes[static_cast<std::size_t>(source.labels[i] - 1)];
  }
  auto scored = bandsel::score_predictions(test.labels, predicted,
                                           full.class_count(), weight_sizes);
  std::vector<std::string> names;
  for (int c = 1; c <= full.class_count(); ++c)
    names.push_back(full.class_name(c));
  std::vector<long long> test_sizes(static_cast<std::size_t>(full.class_count()), 0);
  for (Eigen::Index i = 0; i < test.labels.size(); ++i)
    ++test_sizes[static_cast<std::size_t>(test.labels[i] - 1)];

  bandsel::write_mcc_report(std::cout, scored, names, test_sizes);
  std::cerr << "bands=" << ovr.bands.size() << " gamma=" << gamma
            << " weighted_mcc=" << scored.weighted << '\n';
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    bandsel::write_mcc_report(out, scored, names, test_sizes);
  }
  return 0;
}

int run_sweep(const CommonFlags& flags) {
  auto config = build_config(flags);
  auto report = bandsel::run(config);
  const auto failed = report.failed_count();
  std::cout << "sweep complete: " << report.records.size() << " records, "
            << failed << " failed; records at " << config.out_dir
            << "/records.csv\n";
  return failed > 0 ? 1 : 0;
}

int run_report(const std::string& records_path, const std::string& out_dir,
               Eigen::Index table_bands, const CommonFlags& flags) {
  bandsel::ExperimentReport report;
  report.records = bandsel::load_records(records_path);
  if (report.records.empty())
    throw std::runtime_error("no records found at " + records_path);
  auto config = build_config(flags);
  if (!config.dataset.empty()) {
    auto full = bandsel::load_configured_dataset(config);
    for (int c = 1; c <= full.class_count(); ++c)
      report.class_names.push_back(full.class_name(c));
  }
  bandsel::emit_tables(report, out_dir, table_bands);
  std::cout << "wrote selected_bands.csv, mcc_per_class.csv and "
               "results_long.csv under "
            << out_dir << '\n';

  // per-grid-point weighted MCC across seeds, mean +- std
  std::map<std::string, std::vector<double>> groups;
  for (const auto& r : report.records)
    if (r.ok)
      groups[r.method + " k=" + std::to_string(r.band_count) +
             " ratio=" + bandsel::detail::format_ratio(r.ratio)]
          .push_back(r.weighted_mcc);
  std::cout.precision(4);
  for (const auto& [label, values] : groups) {
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double variance = 0;
    for (double v : values) variance += (v - mean) * (v - mean);
    const double stddev =
        values.size() > 1
            ? std::sqrt(variance / static_cast<double>(values.size() - 1))
            : 0.0;
    std::cout << label << "  weighted_mcc " << mean << " +- " << stddev
              << "  (" << values.size() << " seed"
              << (values.size() == 1 ? "" : "s") << ")\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"band selection and classification benchmarking"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "convert a raw cube + label raster to the CSV format");
  std::string ingest_data, ingest_header, ingest_out;
  ingest->add_option("--data", ingest_data, "raw float32 cube")->required();
  ingest->add_option("--header", ingest_header, "key=value header file")
      ->required();
  ingest->add_option("--out", ingest_out, "output CSV path")->required();

  // rank
  auto* rank = app.add_subcommand("rank", "rank bands with one selector");
  CommonFlags rank_flags;
  add_config_flags(rank, rank_flags);
  std::string rank_method;
  double rank_ratio = 0.9;
  std::uint64_t rank_seed = 1;
  std::string rank_out, rank_dump_lp;
  rank->add_option("--method", rank_method,
                   "mcm, mrmr, jmi, cmim, relief or pca")
      ->required();
  rank->add_option("--ratio", rank_ratio, "test fraction of the split");
  rank->add_option("--seed", rank_seed, "split seed");
  rank->add_option("--out", rank_out, "ranking CSV (default: stdout)");
  rank->add_option("--dump-lp", rank_dump_lp,
                   "debug: dump the class-1 MCM program as text");

  // eval
  auto* eval = app.add_subcommand(
      "eval", "train the one-vs-rest SVM on top-k bands and score the test set");
  CommonFlags eval_flags;
  add_config_flags(eval, eval_flags);
  std::string eval_method = "mcm";
  Eigen::Index eval_bands = 15;
  double eval_ratio = 0.9;
  std::uint64_t eval_seed = 1;
  std::string eval_save, eval_load, eval_report;
  eval->add_option("--method", eval_method, "selector to rank with");
  eval->add_option("--bands", eval_bands, "number of top bands to keep");
  eval->add_option("--ratio", eval_ratio, "test fraction of the split");
  eval->add_option("--seed", eval_seed, "split seed");
  eval->add_option("--save-model", eval_save, "dump the trained classifier");
  eval->add_option("--load-model", eval_load,
                   "evaluate a previously saved classifier");
  eval->add_option("--report", eval_report, "also write the MCC table here");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "run the full (method x bands x ratio x seed) grid, resumably");
  CommonFlags sweep_flags;
  add_config_flags(sweep, sweep_flags);

  // report
  auto* report = app.add_subcommand(
      "report", "emit band/MCC tables and the long-format CSV from records");
  CommonFlags report_flags;
  add_config_flags(report, report_flags);
  std::string report_records = "out/records.csv";
  std::string report_out = "out";
  Eigen::Index report_bands = 15;
  report->add_option("--records", report_records, "records.csv from a sweep");
  report->add_option("--out", report_out, "directory for the three tables");
  report->add_option("--bands", report_bands,
                     "band count of the per-class table");

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest->parsed()) return run_ingest(ingest_data, ingest_header, ingest_out);
    if (rank->parsed())
      return run_rank(rank_flags, rank_method, rank_ratio, rank_seed, rank_out,
                      rank_dump_lp);
    if (eval->parsed())
      return run_eval(eval_flags, eval_method, eval_bands, eval_ratio,
                      eval_seed, eval_save, eval_load, eval_report);
    if (sweep->parsed()) return run_sweep(sweep_flags);
    if (report->parsed())
      return run_report(report_records, report_out, report_bands, report_flags);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
