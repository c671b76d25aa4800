#include "gpsales/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <stdexcept>

#include "gpsales/gp.hpp"
#include "gpsales/rng.hpp"

namespace gpsales {

const char* accuracy_definition() { return "accuracy_pct = 100 * (1 - MAE / mean(|y_true|))"; }

MetricReport compute_metrics(const Eigen::Ref<const Eigen::VectorXd>& y_true,
                             const Eigen::Ref<const Eigen::VectorXd>& y_pred) {
  if (y_true.size() == 0)
    throw std::invalid_argument("compute_metrics: empty inputs");
  if (y_true.size() != y_pred.size())
    throw std::invalid_argument("compute_metrics: length mismatch");
  if (!y_true.allFinite() || !y_pred.allFinite())
    throw std::invalid_argument("compute_metrics: non-finite inputs");

  const double n = static_cast<double>(y_true.size());
  const Eigen::VectorXd resid = y_true - y_pred;
  MetricReport report;
  report.mse = resid.squaredNorm() / n;
  report.mae = resid.array().abs().sum() / n;
  report.rmse = std::sqrt(report.mse);

  const double mean = y_true.mean();
  const double ss_tot = (y_true.array() - mean).matrix().squaredNorm();
  if (!(ss_tot > 0.0))
    throw std::invalid_argument("compute_metrics: R^2 undefined, y_true has zero variance");
  report.r2 = 1.0 - resid.squaredNorm() / ss_tot;

  const double mean_abs = y_true.array().abs().sum() / n;
  report.accuracy_pct = 100.0 * (1.0 - report.mae / mean_abs);
  return report;
}

FoldPlan make_folds(int n, int k, std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("make_folds: k must be >= 2");
  if (n < k) throw std::invalid_argument("make_folds: n must be >= k");
  std::mt19937_64 eng(seed);
  const std::vector<int> perm = random_permutation(n, eng);
  FoldPlan plan;
  plan.n = n;
  plan.k = k;
  plan.assignment.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    plan.assignment[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = j % k;
  return plan;
}

std::vector<int> canonical_row_order(const Dataset& data) {
  std::vector<int> order(static_cast<std::size_t>(data.n()));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (Eigen::Index c = 0; c < data.d(); ++c) {
      if (data.features(a, c) != data.features(b, c))
        return data.features(a, c) < data.features(b, c);
    }
    if (data.has_target() && data.target(a) != data.target(b))
      return data.target(a) < data.target(b);
    return false;
  });
  return order;
}

FoldPlan canonical_fold_plan(const Dataset& data, int k, std::uint64_t seed) {
  const int n = static_cast<int>(data.n());
  const std::vector<int> order = canonical_row_order(data);
  const FoldPlan by_position = make_folds(n, k, seed);
  FoldPlan plan;
  plan.n = n;
  plan.k = k;
  plan.assignment.resize(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    plan.assignment[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])] =
        by_position.assignment[static_cast<std::size_t>(j)];
  return plan;
}

namespace {

void check_plan(const Dataset& data, const FoldPlan& plan) {
  if (!data.has_target())
    throw std::invalid_argument("cross_validate: dataset has no target column");
  if (plan.n != static_cast<int>(data.n()) ||
      plan.assignment.size() != static_cast<std::size_t>(plan.n))
    throw std::invalid_argument("cross_validate: fold plan does not match dataset");
  if (plan.k < 2) throw std::invalid_argument("cross_validate: plan needs k >= 2");
}

}  // namespace

Eigen::VectorXd cross_validate_predictions(const Dataset& data, const KernelSpec& spec,
                                           double noise_variance, const FoldPlan& plan) {
  check_plan(data, plan);
  const int n = plan.n;
  Eigen::VectorXd preds(n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(plan.k));

#pragma omp parallel for schedule(dynamic)
  for (int f = 0; f < plan.k; ++f) {
    try {
      std::vector<int> train_idx, test_idx;
      for (int i = 0; i < n; ++i)
        (plan.assignment[static_cast<std::size_t>(i)] == f ? test_idx : train_idx)
            .push_back(i);
      if (train_idx.empty() || test_idx.empty())
        throw std::invalid_argument("cross_validate: empty fold");

      Eigen::MatrixXd X_train(static_cast<Eigen::Index>(train_idx.size()), data.d());
      Eigen::VectorXd y_train(static_cast<Eigen::Index>(train_idx.size()));
      for (std::size_t i = 0; i < train_idx.size(); ++i) {
        X_train.row(static_cast<Eigen::Index>(i)) = data.features.row(train_idx[i]);
        y_train(static_cast<Eigen::Index>(i)) = data.target(train_idx[i]);
      }
      Eigen::MatrixXd X_test(static_cast<Eigen::Index>(test_idx.size()), data.d());
      for (std::size_t i = 0; i < test_idx.size(); ++i)
        X_test.row(static_cast<Eigen::Index>(i)) = data.features.row(test_idx[i]);

      const GPModel model = fit(X_train, y_train, spec, noise_variance);
      const Prediction p = predict(model, X_test);
      for (std::size_t i = 0; i < test_idx.size(); ++i)
        preds(test_idx[i]) = p.mean(static_cast<Eigen::Index>(i));
    } catch (...) {
      errors[static_cast<std::size_t>(f)] = std::current_exception();
    }
  }
  for (const auto& err : errors)
    if (err) std::rethrow_exception(err);
  return preds;
}

std::vector<double> cross_validate_fold_rmse(const Dataset& data, const KernelSpec& spec,
                                             double noise_variance, const FoldPlan& plan) {
  const Eigen::VectorXd preds = cross_validate_predictions(data, spec, noise_variance, plan);
  std::vector<double> rmse(static_cast<std::size_t>(plan.k), 0.0);
  std::vector<int> count(static_cast<std::size_t>(plan.k), 0);
  for (int i = 0; i < plan.n; ++i) {
    const auto f = static_cast<std::size_t>(plan.assignment[static_cast<std::size_t>(i)]);
    const double e = data.target(i) - preds(i);
    rmse[f] += e * e;
    ++count[f];
  }
  for (std::size_t f = 0; f < rmse.size(); ++f)
    rmse[f] = std::sqrt(rmse[f] / static_cast<double>(count[f]));
  return rmse;
}

MetricReport cross_validate(const Dataset& data, const KernelSpec& spec,
                            double noise_variance, const FoldPlan& plan) {
  const Eigen::VectorXd preds = cross_validate_predictions(data, spec, noise_variance, plan);
  return compute_metrics(data.target, preds);
}

}  // namespace gpsales
