#include "gpsales/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "gpsales/errors.hpp"
#include "gpsales/rng.hpp"
#include "gpsales/transforms.hpp"

namespace gpsales {

namespace {

constexpr std::uint64_t kSeedStream = 0x5eedULL;
constexpr std::uint64_t kAcquireStream = 0xac901ULL;

KernelSpec surrogate_spec() {
  KernelSpec spec;
  spec.family = KernelFamily::Matern;
  spec.matern_nu = MaternNu::five_halves;
  spec.variance = 1.0;
  spec.lengthscale = 0.3;
  return spec;
}

EnsembleWeights sample_simplex(std::mt19937_64& eng) {
  const double e1 = exponential1(eng);
  const double e2 = exponential1(eng);
  const double e3 = exponential1(eng);
  const double s = e1 + e2 + e3;
  return {e1 / s, e2 / s, e3 / s};
}

Eigen::RowVector2d coords_of(const EnsembleWeights& w) {
  return {w.w_rbf, w.w_rq};
}

void refit_surrogate(BOState& state) {
  const auto n = static_cast<Eigen::Index>(state.observed_weights.size());
  Eigen::MatrixXd X(n, 2);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    X.row(i) = coords_of(state.observed_weights[static_cast<std::size_t>(i)]);
    y(i) = state.observed_scores[static_cast<std::size_t>(i)];
  }
  state.surrogate = fit(X, y, surrogate_spec(), 1e-6);
  state.surrogate_ready = true;
}

void observe(BOState& state, const EnsembleWeights& w, double score) {
  state.observed_weights.push_back(w);
  state.observed_scores.push_back(score);
  if (state.observed_scores.size() == 1 || score > state.incumbent_score) {
    state.incumbent_score = score;
    state.incumbent_weights = w;
  }
}

}  // namespace

void BOConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("BOConfig: iterations must be >= 1");
  if (initial_designs < 2)
    throw std::invalid_argument("BOConfig: initial_designs must be >= 2");
  if (candidate_pool < 1)
    throw std::invalid_argument("BOConfig: candidate_pool must be >= 1");
  if (!(acquisition_xi >= 0.0))
    throw std::invalid_argument("BOConfig: acquisition_xi must be >= 0");
  if (cv_folds < 2) throw std::invalid_argument("BOConfig: cv_folds must be >= 2");
}

double expected_improvement(double mu, double sigma, double best, double xi) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("expected_improvement: sigma must be >= 0");
  const double improve = mu - best - xi;
  if (sigma == 0.0) return std::max(0.0, improve);
  const double z = improve / sigma;
  return std::max(0.0, improve * normal_cdf(z) + sigma * normal_pdf(z));
}

std::vector<EnsembleWeights> acquisition_candidates(const BOState& state,
                                                    const BOConfig& config) {
  config.validate();
  std::mt19937_64 eng = seeded_engine(
      state.rng_seed, kAcquireStream + state.observed_weights.size());
  std::vector<EnsembleWeights> candidates(static_cast<std::size_t>(config.candidate_pool));
  for (auto& w : candidates) w = sample_simplex(eng);
  return candidates;
}

EnsembleWeights acquire_threshold(const BOState& state, const BOConfig& config) {
  config.validate();
  if (!state.surrogate_ready || state.observed_weights.size() < 2)
    throw std::runtime_error("acquire_threshold: surrogate not fitted on >= 2 observations");

  const std::vector<EnsembleWeights> candidates = acquisition_candidates(state, config);
  Eigen::MatrixXd X(static_cast<Eigen::Index>(candidates.size()), 2);
  for (std::size_t i = 0; i < candidates.size(); ++i)
    X.row(static_cast<Eigen::Index>(i)) = coords_of(candidates[i]);

  const Prediction post = predict(state.surrogate, X);
  std::size_t best_idx = 0;
  double best_ei = -1.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const double sigma = std::sqrt(post.variance(static_cast<Eigen::Index>(i)));
    const double ei = expected_improvement(post.mean(static_cast<Eigen::Index>(i)), sigma,
                                           state.incumbent_score, config.acquisition_xi);
    if (ei > best_ei) {
      best_ei = ei;
      best_idx = i;
    }
  }
  return candidates[best_idx];
}

double evaluate_model(const Dataset& data, const EnsembleWeights& weights,
                      const EnsembleSpec& members, double noise_variance,
                      const BOConfig& config) {
  config.validate();
  weights.validate();
  if (data.n() < 2 * config.cv_folds)
    throw std::invalid_argument("evaluate_model: dataset needs at least 2*cv_folds rows");

  EnsembleSpec with_weights = members;
  with_weights.weights = weights;
  const KernelSpec spec = make_ensemble_spec(with_weights);

  // Rows are physically reordered into canonical (value-sorted) order so the
  // score is bit-identical under any row permutation of the input.
  const std::vector<int> order = canonical_row_order(data);
  Dataset sorted = data;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.features.row(static_cast<Eigen::Index>(i)) = data.features.row(order[i]);
    sorted.target(static_cast<Eigen::Index>(i)) = data.target(order[i]);
  }

  const FoldPlan plan = make_folds(static_cast<int>(data.n()), config.cv_folds, config.seed);
  const std::vector<double> fold_rmse =
      cross_validate_fold_rmse(sorted, spec, noise_variance, plan);
  double mean_rmse = 0.0;
  for (double r : fold_rmse) mean_rmse += r;
  mean_rmse /= static_cast<double>(fold_rmse.size());
  return -mean_rmse;
}

BOResult optimize_weights(const std::function<double(const EnsembleWeights&)>& objective,
                          const BOConfig& config) {
  config.validate();

  BOState state;
  state.rng_seed = config.seed;
  state.n_seed_points = config.initial_designs;

  std::vector<EnsembleWeights> seeds;
  const EnsembleWeights vertices[] = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
  for (int i = 0; i < std::min(3, config.initial_designs); ++i)
    seeds.push_back(vertices[i]);
  if (config.initial_designs >= 4)
    seeds.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
  std::mt19937_64 eng = seeded_engine(config.seed, kSeedStream);
  while (static_cast<int>(seeds.size()) < config.initial_designs)
    seeds.push_back(sample_simplex(eng));

  for (const auto& w : seeds) observe(state, w, objective(w));

  for (int it = 0; it < config.iterations; ++it) {
    refit_surrogate(state);
    const EnsembleWeights w = acquire_threshold(state, config);
    observe(state, w, objective(w));
  }
  return {state.incumbent_weights, state.incumbent_score, std::move(state)};
}

BOResult optimize_kernel_weight(const Dataset& data, const EnsembleSpec& members,
                                double noise_variance, const BOConfig& config) {
  return optimize_weights(
      [&](const EnsembleWeights& w) {
        return evaluate_model(data, w, members, noise_variance, config);
      },
      config);
}

EnsembleSpec tune_ensemble_members(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::VectorXd>& y,
                                   double noise_variance, int budget, MaternNu nu,
                                   std::uint64_t seed) {
  EnsembleSpec members;
  members.matern_nu = nu;

  const KernelSpec rbf = tune_hyperparameters(X, y, default_spec(KernelFamily::RBF),
                                              noise_variance, budget, seed + 1);
  members.rbf_lengthscale = rbf.lengthscale;

  const KernelSpec rq = tune_hyperparameters(X, y, default_spec(KernelFamily::RQ),
                                             noise_variance, budget, seed + 2);
  members.rq_variance = rq.variance;
  members.rq_lengthscale = rq.lengthscale;
  members.rq_alpha = rq.rq_alpha;

  const KernelSpec matern = tune_hyperparameters(X, y, default_spec(KernelFamily::Matern, nu),
                                                 noise_variance, budget, seed + 3);
  members.matern_variance = matern.variance;
  members.matern_lengthscale = matern.lengthscale;
  return members;
}

void write_bo_trace_csv(const BOState& state, std::ostream& out) {
  out << "index,phase,w_rbf,w_rq,w_matern,score,incumbent_score\n";
  double incumbent = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < state.observed_weights.size(); ++i) {
    incumbent = std::max(incumbent, state.observed_scores[i]);
    const auto& w = state.observed_weights[i];
    out << i << "," << (static_cast<int>(i) < state.n_seed_points ? "seed" : "bo") << ","
        << format_number(w.w_rbf) << "," << format_number(w.w_rq) << ","
        << format_number(w.w_matern) << "," << format_number(state.observed_scores[i])
        << "," << format_number(incumbent) << "\n";
  }
}

void write_bo_trace_csv(const BOState& state, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write file: " + path);
  write_bo_trace_csv(state, out);
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace gpsales
