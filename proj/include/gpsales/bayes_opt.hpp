#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gpsales/data_io.hpp"
#include "gpsales/evaluation.hpp"
#include "gpsales/gp.hpp"
#include "gpsales/kernels.hpp"

namespace gpsales {

struct BOConfig {
  int iterations = 30;
  int initial_designs = 8;
  int candidate_pool = 512;
  double acquisition_xi = 0.01;
  int cv_folds = 5;
  std::uint64_t seed = 42;
  void validate() const;
};

/// Optimization history: observed simplex points, their scores, and the
/// running incumbent. The surrogate GP lives over the first two weight
/// coordinates (the third is 1 - w_rbf - w_rq).
struct BOState {
  std::vector<EnsembleWeights> observed_weights;
  std::vector<double> observed_scores;
  EnsembleWeights incumbent_weights;
  double incumbent_score = 0.0;
  GPModel surrogate;
  bool surrogate_ready = false;
  int n_seed_points = 0;
  std::uint64_t rng_seed = 0;
};

struct BOResult {
  EnsembleWeights best_weights;
  double best_score = 0.0;
  BOState state;
};

/// (mu - best - xi) Phi(z) + sigma phi(z) with z = (mu - best - xi)/sigma;
/// max(0, mu - best - xi) when sigma == 0.
double expected_improvement(double mu, double sigma, double best, double xi);

/// The uniform simplex pool scored by acquire_threshold, derived
/// deterministically from (state.rng_seed, number of observations).
std::vector<EnsembleWeights> acquisition_candidates(const BOState& state,
                                                    const BOConfig& config);

/// Argmax of expected improvement over the candidate pool under the
/// surrogate posterior; ties break toward the lowest candidate index.
EnsembleWeights acquire_threshold(const BOState& state, const BOConfig& config);

/// Cross-validated score of the ensemble assembled from `members` with the
/// given weights: minus the per-fold RMSE average (higher is better). Fold
/// assignment is canonical (permutation-invariant) under config.seed.
double evaluate_model(const Dataset& data, const EnsembleWeights& weights,
                      const EnsembleSpec& members, double noise_variance,
                      const BOConfig& config);

/// Core loop over an arbitrary objective: seed designs (simplex vertices and
/// centroid first), then iterate acquire -> evaluate -> update incumbent ->
/// refit surrogate.
BOResult optimize_weights(const std::function<double(const EnsembleWeights&)>& objective,
                          const BOConfig& config);

/// The full pipeline objective: evaluate_model over the dataset.
BOResult optimize_kernel_weight(const Dataset& data, const EnsembleSpec& members,
                                double noise_variance, const BOConfig& config);

/// Tunes each member family's hyperparameters once by evidence maximization;
/// the returned spec's weights are placeholders for the BO loop to fill.
EnsembleSpec tune_ensemble_members(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   double noise_variance, int budget, MaternNu nu,
                                   std::uint64_t seed);

/// One row per observation: index, phase, weights, score, running incumbent.
void write_bo_trace_csv(const BOState& state, std::ostream& out);
void write_bo_trace_csv(const BOState& state, const std::string& path);

}  // namespace gpsales
