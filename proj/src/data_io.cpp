#include "gpsales/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "gpsales/errors.hpp"
#include "gpsales/rng.hpp"

namespace gpsales {

namespace {

const std::array<const char*, 6> kChannelNames = {
    "TV", "Billboards", "Google_Ads", "Social_Media", "Influencer_Marketing",
    "Affiliate_Marketing"};
constexpr const char* kTargetName = "Product_Sold";

// Per-channel rescaling of the raw skewed draws into spend-like units, and
// the response-curve constants used by synth_response.
constexpr double kChannelScale[6] = {40.0, 15.0, 25.0, 20.0, 18.0, 10.0};
constexpr double kChannelLoc[6] = {20.0, 5.0, 5.0, 4.0, 2.0, 1.0};
constexpr double kResponseGain[6] = {120.0, 60.0, 90.0, 70.0, 50.0, 40.0};
constexpr double kResponseSat[6] = {60.0, 25.0, 35.0, 30.0, 25.0, 15.0};
constexpr double kResponseBase = 50.0;
constexpr double kInteractionGain = 80.0;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

struct Table {
  std::vector<std::string> names;
  Eigen::MatrixXd values;
};

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open file: " + path);

  Table table;
  std::vector<std::vector<double>> rows;
  std::string line;
  bool have_header = false;
  int data_row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') continue;
    if (!have_header) {
      table.names = split_line(line);
      if (table.names.empty())
        throw IoError(path + ": empty header row");
      for (const auto& name : table.names)
        if (name.empty()) throw IoError(path + ": header has an empty column name");
      have_header = true;
      continue;
    }
    ++data_row;
    const auto cells = split_line(line);
    if (cells.size() != table.names.size()) {
      std::ostringstream msg;
      msg << path << ": row " << data_row << ": expected " << table.names.size()
          << " cells, found " << cells.size();
      throw IoError(msg.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string& cell = cells[c];
      double v = 0.0;
      const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size() ||
          !std::isfinite(v)) {
        std::ostringstream msg;
        msg << path << ": row " << data_row << ", column '" << table.names[c]
            << "': unparseable value '" << cell << "'";
        throw IoError(msg.str());
      }
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (!have_header) throw IoError(path + ": file has no header row");
  if (rows.empty()) throw IoError(path + ": no data rows");

  table.values.resize(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(table.names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c)
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  return table;
}

Dataset take_rows(const Dataset& data, const std::vector<int>& idx) {
  Dataset out;
  out.feature_names = data.feature_names;
  out.target_name = data.target_name;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), data.d());
  if (data.has_target()) out.target.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.features.row(static_cast<Eigen::Index>(i)) = data.features.row(idx[i]);
    if (data.has_target()) out.target(static_cast<Eigen::Index>(i)) = data.target(idx[i]);
  }
  return out;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Dataset load_csv(const std::string& path, const std::string& target_column) {
  const Table table = read_table(path);
  const auto it = std::find(table.names.begin(), table.names.end(), target_column);
  if (it == table.names.end())
    throw IoError(path + ": target column '" + target_column + "' not found");
  const auto target_idx = static_cast<Eigen::Index>(it - table.names.begin());
  if (table.names.size() < 2)
    throw IoError(path + ": no feature columns besides the target");

  Dataset data;
  data.target_name = target_column;
  data.target = table.values.col(target_idx);
  data.features.resize(table.values.rows(), table.values.cols() - 1);
  for (Eigen::Index c = 0, out = 0; c < table.values.cols(); ++c) {
    if (c == target_idx) continue;
    data.feature_names.push_back(table.names[static_cast<std::size_t>(c)]);
    data.features.col(out++) = table.values.col(c);
  }
  return data;
}

Dataset load_csv_columns(const std::string& path) {
  const Table table = read_table(path);
  Dataset data;
  data.feature_names = table.names;
  data.features = table.values;
  return data;
}

void save_csv(const Dataset& data, const std::string& path, const std::string& comment) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  if (!comment.empty()) out << "# " << comment << "\n";
  for (std::size_t c = 0; c < data.feature_names.size(); ++c) {
    if (c) out << ",";
    out << data.feature_names[c];
  }
  if (data.has_target()) out << "," << data.target_name;
  out << "\n";
  for (Eigen::Index r = 0; r < data.n(); ++r) {
    for (Eigen::Index c = 0; c < data.d(); ++c) {
      if (c) out << ",";
      out << format_number(data.features(r, c));
    }
    if (data.has_target()) out << "," << format_number(data.target(r));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

double synth_response(const Eigen::Ref<const Eigen::RowVectorXd>& x) {
  if (x.size() != 6)
    throw std::invalid_argument("synth_response: expected 6 channel values");
  double y = kResponseBase;
  for (int j = 0; j < 6; ++j)
    y += kResponseGain[j] * (1.0 - std::exp(-x(j) / kResponseSat[j]));
  y += kInteractionGain * (1.0 - std::exp(-x(0) / kResponseSat[0])) *
       (1.0 - std::exp(-x(3) / kResponseSat[3]));
  return y;
}

std::string synth_metadata_line(const SynthConfig& config) {
  std::ostringstream line;
  line << "synthetic marketing dataset: n=" << config.n << " seed=" << config.seed
       << " noise_sd=" << format_number(config.noise_sd) << " channel_skews=[";
  for (int j = 0; j < 6; ++j)
    line << (j ? "," : "") << format_number(config.channel_skews[static_cast<std::size_t>(j)]);
  line << "]; channels: even=gamma(shape)*scale+loc, odd=lognormal(sigma)*scale+loc;"
       << " target = " << format_number(kResponseBase)
       << " + sum_j gain_j*(1-exp(-x_j/sat_j))"
       << " + " << format_number(kInteractionGain)
       << "*(1-exp(-TV/sat_TV))*(1-exp(-Social_Media/sat_SM)) + noise_sd*N(0,1)";
  return line.str();
}

Dataset synth_generate(const SynthConfig& config) {
  if (config.n < 10) throw std::invalid_argument("synth_generate: n must be >= 10");
  if (!(config.noise_sd >= 0.0) || !std::isfinite(config.noise_sd))
    throw std::invalid_argument("synth_generate: noise_sd must be >= 0");
  for (double s : config.channel_skews)
    if (!(s > 0.0) || !std::isfinite(s))
      throw std::invalid_argument("synth_generate: channel skew controls must be positive");

  Dataset data;
  data.feature_names.assign(kChannelNames.begin(), kChannelNames.end());
  data.target_name = kTargetName;
  data.features.resize(config.n, 6);
  data.target.resize(config.n);

  std::mt19937_64 eng(config.seed);
  for (int i = 0; i < config.n; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double shape = config.channel_skews[static_cast<std::size_t>(j)];
      const double draw = (j % 2 == 0) ? gamma_draw(eng, shape)
                                       : std::exp(shape * normal01(eng));
      data.features(i, j) = kChannelLoc[j] + kChannelScale[j] * draw;
    }
    data.target(i) =
        synth_response(data.features.row(i)) + config.noise_sd * normal01(eng);
  }
  return data;
}

Eigen::MatrixXd correlation_matrix(const Dataset& data) {
  if (data.n() < 3)
    throw std::invalid_argument("correlation_matrix: need at least 3 rows");
  if (!data.has_target())
    throw std::invalid_argument("correlation_matrix: dataset has no target column");

  const Eigen::Index d = data.d();
  Eigen::MatrixXd cols(data.n(), d + 1);
  cols.leftCols(d) = data.features;
  cols.col(d) = data.target;

  std::vector<std::string> labels = data.feature_names;
  labels.push_back(data.target_name);

  const Eigen::RowVectorXd mean = cols.colwise().mean();
  Eigen::MatrixXd centered = cols.rowwise() - mean;
  Eigen::VectorXd sd(d + 1);
  for (Eigen::Index c = 0; c <= d; ++c) {
    sd(c) = std::sqrt(centered.col(c).squaredNorm() / static_cast<double>(data.n()));
    if (!(sd(c) > 0.0))
      throw std::invalid_argument("correlation_matrix: column '" +
                                  labels[static_cast<std::size_t>(c)] +
                                  "' has zero variance");
  }

  Eigen::MatrixXd corr(d + 1, d + 1);
  for (Eigen::Index i = 0; i <= d; ++i) {
    corr(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j <= d; ++j) {
      const double cov =
          centered.col(i).dot(centered.col(j)) / static_cast<double>(data.n());
      const double r = std::clamp(cov / (sd(i) * sd(j)), -1.0, 1.0);
      corr(i, j) = r;
      corr(j, i) = r;
    }
  }
  return corr;
}

void write_correlation_csv(const Dataset& data, const Eigen::MatrixXd& corr,
                           const std::string& path) {
  std::vector<std::string> labels = data.feature_names;
  labels.push_back(data.target_name);
  if (corr.rows() != static_cast<Eigen::Index>(labels.size()) || corr.rows() != corr.cols())
    throw std::invalid_argument("write_correlation_csv: matrix/label size mismatch");

  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  for (const auto& label : labels) out << "," << label;
  out << "\n";
  for (Eigen::Index i = 0; i < corr.rows(); ++i) {
    out << labels[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < corr.cols(); ++j) out << "," << format_number(corr(i, j));
    out << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed) {
  if (!(test_fraction > 0.0) || !(test_fraction < 1.0))
    throw std::invalid_argument("train_test_split: test_fraction must be in (0, 1)");
  const int n = static_cast<int>(data.n());
  const int n_test = static_cast<int>(
      std::ceil(static_cast<double>(n) * test_fraction));
  const int n_train = n - n_test;
  if (n_test < 1 || n_train < 1)
    throw std::invalid_argument("train_test_split: split leaves an empty part");

  std::mt19937_64 eng(seed);
  const std::vector<int> perm = random_permutation(n, eng);
  std::vector<int> test_idx(perm.begin(), perm.begin() + n_test);
  std::vector<int> train_idx(perm.begin() + n_test, perm.end());
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {take_rows(data, train_idx), take_rows(data, test_idx)};
}

}  // namespace gpsales
