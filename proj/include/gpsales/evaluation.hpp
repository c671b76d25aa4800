#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gpsales/data_io.hpp"
#include "gpsales/kernels.hpp"

namespace gpsales {

struct MetricReport {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
  double accuracy_pct = 0.0;  // see accuracy_definition()
};

/// The formula printed beside every accuracy_pct figure.
const char* accuracy_definition();

/// Standard regression metrics; R^2 requires nonzero target variance.
MetricReport compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                             const Eigen::Ref<const Eigen::VectorXd>& y_pred);

/// Fold assignment over n rows: sizes differ by at most one and every fold
/// index in [0, k) appears.
struct FoldPlan {
  int n = 0;
  int k = 0;
  std::vector<int> assignment;
};

/// Seeded shuffle then round-robin assignment.
FoldPlan make_folds(int n, int k, std::uint64_t seed);

/// Row indices sorted by lexicographic (features, target) value; the same
/// multiset of rows yields the same sequence regardless of input order.
std::vector<int> canonical_row_order(const Dataset& data);

/// Fold plan that is invariant to row permutations of the dataset: rows are
/// ordered by lexicographic (features, target) value before the seeded
/// assignment is applied.
FoldPlan canonical_fold_plan(const Dataset& data, int k, std::uint64_t seed);

/// Out-of-fold predictions, one per row, in original row order. Folds may
/// run in parallel; each row is predicted by a model that never saw it.
Eigen::VectorXd cross_validate_predictions(const Dataset& data, const KernelSpec& spec,
                                           double noise_variance, const FoldPlan& plan);

/// Per-fold RMSE of the out-of-fold predictions, in fold order.
std::vector<double> cross_validate_fold_rmse(const Dataset& data, const KernelSpec& spec,
                                             double noise_variance, const FoldPlan& plan);

/// Metrics over the concatenated out-of-fold predictions.
MetricReport cross_validate(const Dataset& data, const KernelSpec& spec,
                            double noise_variance, const FoldPlan& plan);

}  // namespace gpsales
