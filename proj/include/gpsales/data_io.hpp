#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gpsales {

/// Tabular regression data: named feature columns plus an optional target
/// column (target_name empty means no target, e.g. prediction inputs).
struct Dataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;  // n x d
  std::string target_name;
  Eigen::VectorXd target;    // length n, or 0 when target_name is empty

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index d() const { return features.cols(); }
  bool has_target() const { return !target_name.empty(); }
};

/// Controls for the synthetic marketing-channel generator. channel_skews
/// steers per-channel shape: gamma shape for even channels, lognormal sigma
/// for odd channels (all right-skewed by default).
struct SynthConfig {
  int n = 400;
  std::uint64_t seed = 42;
  double noise_sd = 5.0;
  std::array<double, 6> channel_skews = {2.0, 0.6, 1.5, 0.5, 1.2, 0.8};
};

/// Shortest decimal representation that round-trips the exact double.
std::string format_number(double v);

/// Strict CSV reader: header row required, '#' lines skipped, every cell a
/// finite decimal real. Errors name the offending row and column.
Dataset load_csv(const std::string& path, const std::string& target_column);

/// Same reader, but every column becomes a feature (no target).
Dataset load_csv_columns(const std::string& path);

/// Writes header + rows; a non-empty comment becomes one leading '#' line.
void save_csv(const Dataset& data, const std::string& path, const std::string& comment = "");

/// Noiseless response surface of the generator: per-channel saturating
/// curves plus one TV x Social_Media interaction term.
double synth_response(const Eigen::Ref<const Eigen::RowVectorXd>& x);

/// One-line description of the generator recorded in the output CSV.
std::string synth_metadata_line(const SynthConfig& config);

Dataset synth_generate(const SynthConfig& config);

/// Pearson correlations over features plus target: (d+1) x (d+1),
/// symmetric, unit diagonal.
Eigen::MatrixXd correlation_matrix(const Dataset& data);

void write_correlation_csv(const Dataset& data, const Eigen::MatrixXd& corr,
                           const std::string& path);

/// Seeded shuffle split into (train, test); test gets ceil(n * test_fraction)
/// rows, row order within each part preserved.
std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double test_fraction,
                                             std::uint64_t seed);

}  // namespace gpsales
