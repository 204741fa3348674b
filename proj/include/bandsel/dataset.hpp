#ifndef BANDSEL_DATASET_HPP
#define BANDSEL_DATASET_HPP

#include <Eigen/Core>

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bandsel/random.hpp"

namespace bandsel {

template <class Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using IndexList = std::vector<Eigen::Index>;

/// Labeled sample matrix: one row per pixel, one column per band.
/// Labels are contiguous class ids 1..K; label 0 (unlabeled background)
/// never survives ingestion. Immutable by convention after construction.
template <class Scalar = double>
struct Dataset {
  MatrixX<Scalar> samples;          // N x D
  Eigen::VectorXi labels;           // N, values in 1..K
  std::vector<std::string> class_names;  // size K or empty

  Eigen::Index sample_count() const { return samples.rows(); }
  Eigen::Index band_count() const { return samples.cols(); }
  int class_count() const {
    return labels.size() == 0 ? 0 : labels.maxCoeff();
  }

  std::vector<Eigen::Index> class_sizes() const {
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(class_count()), 0);
    for (Eigen::Index i = 0; i < labels.size(); ++i)
      ++sizes[static_cast<std::size_t>(labels[i] - 1)];
    return sizes;
  }

  std::string class_name(int label) const {
    if (!class_names.empty())
      return class_names[static_cast<std::size_t>(label - 1)];
    return "class_" + std::to_string(label);
  }

  /// Copy of the given rows, labels included.
  Dataset rows(const IndexList& indices) const {
    Dataset out;
    out.samples.resize(static_cast<Eigen::Index>(indices.size()), band_count());
    out.labels.resize(static_cast<Eigen::Index>(indices.size()));
    for (std::size_t i = 0; i < indices.size(); ++i) {
      out.samples.row(static_cast<Eigen::Index>(i)) = samples.row(indices[i]);
      out.labels[static_cast<Eigen::Index>(i)] = labels[indices[i]];
    }
    out.class_names = class_names;
    return out;
  }

  /// Copy restricted to the given 0-based band columns.
  Dataset bands(const IndexList& band_indices) const {
    Dataset out;
    out.samples.resize(sample_count(),
                       static_cast<Eigen::Index>(band_indices.size()));
    for (std::size_t j = 0; j < band_indices.size(); ++j)
      out.samples.col(static_cast<Eigen::Index>(j)) =
          samples.col(band_indices[j]);
    out.labels = labels;
    out.class_names = class_names;
    return out;
  }
};

/// Train/test partition of a dataset's row indices.
struct Split {
  IndexList train_indices;
  IndexList test_indices;
  double ratio = 0;   // test fraction
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline bool parse_real(std::string_view field, double& value) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(*begin)))
    ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(end[-1])))
    --end;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc{} && ptr == end && begin != end;
}

inline std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

/// Compacts labels to 1..K (order-preserving) and checks sample values are
/// finite. Throws on NaN/Inf. Original ids are kept as class names when the
/// ids were not already contiguous.
template <class Scalar>
void finalize_labels(Dataset<Scalar>& d, const std::string& origin) {
  if (d.sample_count() == 0)
    throw std::runtime_error(origin + ": no labeled samples");
  if (!d.samples.allFinite())
    throw std::runtime_error(origin + ": non-finite sample value");
  std::map<int, int> remap;
  for (Eigen::Index i = 0; i < d.labels.size(); ++i)
    remap.emplace(d.labels[i], 0);
  int next = 1;
  bool contiguous = true;
  for (auto& [original, compact] : remap) {
    compact = next++;
    if (original != compact) contiguous = false;
  }
  if (contiguous) return;
  for (Eigen::Index i = 0; i < d.labels.size(); ++i)
    d.labels[i] = remap.at(d.labels[i]);
  d.class_names.clear();
  for (const auto& [original, compact] : remap)
    d.class_names.push_back("class_" + std::to_string(original));
}

}  // namespace detail

/// Loads a CSV of D numeric band columns followed by one integer label
/// column; a single header row is allowed and detected by a non-numeric
/// first field. Rows with label 0 are dropped and counted in `discarded`.
template <class Scalar = double>
Dataset<Scalar> load_csv(const std::string& path,
                         std::size_t* discarded = nullptr) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::vector<std::vector<Scalar>> rows;
  std::vector<int> labels;
  std::size_t dropped = 0;
  std::size_t line_number = 0;
  Eigen::Index width = -1;
  std::string line;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = detail::split_fields(line);
    double probe;
    if (line_number == 1 && !detail::parse_real(fields.front(), probe))
      continue;  // header row
    if (fields.size() < 2)
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": expected at least 2 columns");
    if (width < 0) width = static_cast<Eigen::Index>(fields.size()) - 1;
    if (static_cast<Eigen::Index>(fields.size()) - 1 != width)
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": expected " + std::to_string(width + 1) +
                               " columns, got " + std::to_string(fields.size()));
    std::vector<Scalar> row(static_cast<std::size_t>(width));
    for (Eigen::Index j = 0; j < width; ++j) {
      double value;
      if (!detail::parse_real(fields[static_cast<std::size_t>(j)], value))
        throw std::runtime_error(path + ":" + std::to_string(line_number) +
                                 ": non-numeric field '" +
                                 std::string(fields[static_cast<std::size_t>(j)]) + "'");
      row[static_cast<std::size_t>(j)] = static_cast<Scalar>(value);
    }
    double label_value;
    if (!detail::parse_real(fields.back(), label_value) ||
        label_value != std::floor(label_value))
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": non-integer label '" +
                               std::string(fields.back()) + "'");
    int label = static_cast<int>(label_value);
    if (label == 0) {
      ++dropped;
      continue;
    }
    if (label < 0)
      throw std::runtime_error(path + ":" + std::to_string(line_number) +
                               ": negative label");
    rows.push_back(std::move(row));
    labels.push_back(label);
  }
  if (line_number == 0) throw std::runtime_error(path + ": empty file");

  Dataset<Scalar> d;
  d.samples.resize(static_cast<Eigen::Index>(rows.size()), std::max<Eigen::Index>(width, 0));
  d.labels.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Eigen::Index j = 0; j < width; ++j)
      d.samples(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
    d.labels[static_cast<Eigen::Index>(i)] = labels[i];
  }
  detail::finalize_labels(d, path);
  if (discarded) *discarded = dropped;
  return d;
}

/// Inverse of load_csv: header row, then one line per sample with
/// round-trippable precision.
template <class Scalar>
void save_csv(const std::string& path, const Dataset<Scalar>& d) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (Eigen::Index j = 0; j < d.band_count(); ++j)
    out << "band_" << (j + 1) << ',';
  out << "label\n";
  out.precision(17);
  for (Eigen::Index i = 0; i < d.sample_count(); ++i) {
    for (Eigen::Index j = 0; j < d.band_count(); ++j)
      out << d.samples(i, j) << ',';
    out << d.labels[i] << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline float le_float(const std::uint8_t* p) {
  std::uint32_t bits = std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 |
                       std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
  return std::bit_cast<float>(bits);
}

inline std::uint16_t le_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(std::uint16_t(p[0]) |
                                    std::uint16_t(p[1]) << 8);
}

}  // namespace detail

/// Raw cube ingestion. The data file holds rows*cols*bands little-endian
/// 32-bit floats in band-interleaved-by-pixel order (all bands of a pixel
/// contiguous, pixels row-major). The header is "key=value" lines with
/// rows, cols, bands and labels=<path to a rows*cols uint16 LE raster>;
/// a relative labels path is resolved against the header's directory.
template <class Scalar = double>
Dataset<Scalar> load_raw_cube(const std::string& data_path,
                              const std::string& header_path,
                              std::size_t* discarded = nullptr) {
  std::ifstream header(header_path);
  if (!header) throw std::runtime_error("cannot open " + header_path);
  std::size_t rows = 0, cols = 0, bands = 0;
  std::string labels_path;
  std::string line;
  while (std::getline(header, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t");
      auto e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "rows") rows = std::stoul(value);
    else if (key == "cols") cols = std::stoul(value);
    else if (key == "bands") bands = std::stoul(value);
    else if (key == "labels") labels_path = value;
  }
  if (rows == 0 || cols == 0 || bands == 0 || labels_path.empty())
    throw std::runtime_error(header_path +
                             ": header needs rows, cols, bands and labels");
  if (labels_path.find('/') != 0) {
    auto dir = header_path.find_last_of('/');
    if (dir != std::string::npos)
      labels_path = header_path.substr(0, dir + 1) + labels_path;
  }

  auto data = detail::read_file_bytes(data_path);
  const std::size_t expected_data = rows * cols * bands * 4;
  if (data.size() != expected_data)
    throw std::runtime_error(data_path + ": expected " +
                             std::to_string(expected_data) + " bytes, got " +
                             std::to_string(data.size()));
  auto raster = detail::read_file_bytes(labels_path);
  const std::size_t expected_labels = rows * cols * 2;
  if (raster.size() != expected_labels)
    throw std::runtime_error(labels_path + ": expected " +
                             std::to_string(expected_labels) +
                             " bytes, got " + std::to_string(raster.size()));

  const std::size_t pixels = rows * cols;
  std::size_t labeled = 0;
  for (std::size_t p = 0; p < pixels; ++p)
    if (detail::le_u16(raster.data() + 2 * p) != 0) ++labeled;

  Dataset<Scalar> d;
  d.samples.resize(static_cast<Eigen::Index>(labeled),
                   static_cast<Eigen::Index>(bands));
  d.labels.resize(static_cast<Eigen::Index>(labeled));
  Eigen::Index n = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    std::uint16_t label = detail::le_u16(raster.data() + 2 * p);
    if (label == 0) continue;
    for (std::size_t b = 0; b < bands; ++b)
      d.samples(n, static_cast<Eigen::Index>(b)) = static_cast<Scalar>(
          detail::le_float(data.data() + 4 * (p * bands + b)));
    d.labels[n] = label;
    ++n;
  }
  detail::finalize_labels(d, data_path);
  if (discarded) *discarded = pixels - labeled;
  return d;
}

/// Rescales each band linearly to [0,1] over the whole dataset.
/// Constant bands map to 0. Idempotent.
template <class Scalar>
Dataset<Scalar> normalize(const Dataset<Scalar>& d) {
  Dataset<Scalar> out = d;
  for (Eigen::Index j = 0; j < d.band_count(); ++j) {
    const Scalar lo = d.samples.col(j).minCoeff();
    const Scalar hi = d.samples.col(j).maxCoeff();
    if (hi > lo)
      out.samples.col(j) = (d.samples.col(j).array() - lo) / (hi - lo);
    else
      out.samples.col(j).setZero();
  }
  return out;
}

/// Seeded stratified split. Per class the train size is
/// round((1-ratio)*class_size) clamped to [1, class_size-1]; a singleton
/// class goes entirely to train with a warning. Class index lists are
/// sorted and then shuffled by one SplitMix64 stream in ascending class
/// order, so the result is a pure function of (dataset, ratio, seed).
template <class Scalar>
Split stratified_split(const Dataset<Scalar>& d, double ratio,
                       std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw std::invalid_argument("ratio must be in (0,1)");
  const int k = d.class_count();
  std::vector<IndexList> by_class(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < d.labels.size(); ++i)
    by_class[static_cast<std::size_t>(d.labels[i] - 1)].push_back(i);

  Split split;
  split.ratio = ratio;
  split.seed = seed;
  SplitMix64 rng(seed);
  for (int c = 0; c < k; ++c) {
    IndexList& members = by_class[static_cast<std::size_t>(c)];
    std::sort(members.begin(), members.end());
    fisher_yates(members, rng);
    const auto size = static_cast<double>(members.size());
    if (members.size() == 1) {
      split.train_indices.push_back(members[0]);
      split.warnings.push_back("class " + std::to_string(c + 1) +
                               " has a single sample; kept in train, absent "
                               "from test");
      continue;
    }
    // Round half up with a nudge so exact .5 boundaries are immune to the
    // binary representation of the ratio.
    auto train = static_cast<Eigen::Index>(
        std::floor((1.0 - ratio) * size + 0.5 + 1e-9));
    train = std::clamp<Eigen::Index>(train, 1,
                                     static_cast<Eigen::Index>(members.size()) - 1);
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (static_cast<Eigen::Index>(i) < train)
        split.train_indices.push_back(members[i]);
      else
        split.test_indices.push_back(members[i]);
    }
  }
  std::sort(split.train_indices.begin(), split.train_indices.end());
  std::sort(split.test_indices.begin(), split.test_indices.end());
  return split;
}

}  // namespace bandsel

#endif
