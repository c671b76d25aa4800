#include "gpsales/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gpsales/golden_section.hpp"
#include "gpsales/rng.hpp"

namespace gpsales {

GPModel fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
            const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& kernel,
            double noise_variance, bool center_target) {
  if (X.rows() < 1) throw std::invalid_argument("gp::fit: need at least one training row");
  if (X.rows() != y.size())
    throw std::invalid_argument("gp::fit: X rows and y length differ");
  if (!X.allFinite() || !y.allFinite())
    throw std::invalid_argument("gp::fit: non-finite training data");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw std::invalid_argument("gp::fit: noise_variance must be >= 0");
  kernel.validate();

  GPModel model;
  model.X_train = X;
  model.kernel = kernel;
  model.noise_variance = noise_variance;
  model.y_offset = center_target ? y.mean() : 0.0;
  model.y_train = y.array() - model.y_offset;

  const Eigen::MatrixXd K = gram_matrix(X, X, kernel);
  static const double jitters[] = {0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
  for (double jitter : jitters) {
    Eigen::MatrixXd A = K;
    A.diagonal().array() += noise_variance + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() == Eigen::Success) {
      model.chol_factor = llt.matrixL();
      model.alpha_vec = llt.solve(model.y_train);
      model.jitter = jitter;
      return model;
    }
  }
  throw std::runtime_error(
      "gp::fit: kernel matrix is not positive definite (jitter escalated to 1e-4)");
}

Prediction predict(const GPModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X_star) {
  if (!model.fitted()) throw std::runtime_error("gp::predict: model not fitted");
  if (X_star.cols() != model.X_train.cols())
    throw std::invalid_argument("gp::predict: feature dimension mismatch");
  if (!X_star.allFinite()) throw std::invalid_argument("gp::predict: non-finite inputs");

  const Eigen::MatrixXd K_star = gram_matrix(X_star, model.X_train, model.kernel);
  Prediction out;
  out.mean = (K_star * model.alpha_vec).array() + model.y_offset;

  const double prior_var = kernel_diag_value(model.kernel);
  const Eigen::Index m = X_star.rows();
  out.variance.resize(m);
  auto L = model.chol_factor.triangularView<Eigen::Lower>();
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::VectorXd v = L.solve(K_star.row(i).transpose());
    out.variance(i) = std::max(0.0, prior_var - v.squaredNorm());
  }
  return out;
}

double log_marginal_likelihood(const GPModel& model) {
  if (!model.fitted())
    throw std::runtime_error("gp::log_marginal_likelihood: model not fitted");
  const double n = static_cast<double>(model.y_train.size());
  const double log_det_half = model.chol_factor.diagonal().array().log().sum();
  return -0.5 * model.y_train.dot(model.alpha_vec) - log_det_half -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

namespace {

struct TunableParam {
  double KernelSpec::*field;
};

std::vector<TunableParam> tunable_params(KernelFamily family) {
  switch (family) {
    case KernelFamily::RBF:
      return {{&KernelSpec::lengthscale}};
    case KernelFamily::RQ:
      return {{&KernelSpec::variance}, {&KernelSpec::lengthscale}, {&KernelSpec::rq_alpha}};
    case KernelFamily::Matern:
      return {{&KernelSpec::variance}, {&KernelSpec::lengthscale}};
    case KernelFamily::Ensemble:
      throw std::invalid_argument(
          "tune_hyperparameters: tune ensemble member families individually");
  }
  throw std::invalid_argument("tune_hyperparameters: unknown family");
}

}  // namespace

KernelSpec tune_hyperparameters(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const KernelSpec& base, double noise_variance,
                                int budget, std::uint64_t seed) {
  if (budget < 1) throw std::invalid_argument("tune_hyperparameters: budget must be >= 1");
  base.validate();
  const auto params = tunable_params(base.family);

  auto lml_of = [&](const KernelSpec& spec) {
    try {
      return log_marginal_likelihood(fit(X, y, spec, noise_variance));
    } catch (const std::exception&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  KernelSpec best = base;
  double best_lml = lml_of(base);
  if (budget == 1) return best;

  const double log_lo = std::log(1e-2), log_hi = std::log(1e2);
  std::mt19937_64 eng = seeded_engine(seed, 0x70beULL);
  for (int k = 1; k < budget; ++k) {
    KernelSpec cand = base;
    for (const auto& p : params)
      cand.*(p.field) = std::exp(log_lo + (log_hi - log_lo) * uniform01(eng));
    const double lml = lml_of(cand);
    if (lml > best_lml) {
      best_lml = lml;
      best = cand;
    }
  }

  // Coordinate refinement; accept a coordinate move only when it improves.
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& p : params) {
      auto g = [&](double log_v) {
        KernelSpec s = best;
        s.*(p.field) = std::exp(log_v);
        return lml_of(s);
      };
      const double log_star = detail::golden_section_maximize(g, log_lo, log_hi, 1e-3);
      KernelSpec cand = best;
      cand.*(p.field) = std::exp(log_star);
      const double lml = lml_of(cand);
      if (lml > best_lml) {
        best_lml = lml;
        best = cand;
      }
    }
  }
  return best;
}

}  // namespace gpsales
