#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "gpsales/kernels.hpp"

namespace gpsales {

/// Trained exact-GP state. chol_factor * chol_factor^T reconstructs
/// K + (noise_variance + jitter) I; alpha_vec solves that system for the
/// stored (centered) targets.
struct GPModel {
  Eigen::MatrixXd X_train;
  Eigen::VectorXd y_train;  // centered by y_offset
  KernelSpec kernel;
  double noise_variance = 0.0;
  double jitter = 0.0;  // diagonal addition beyond noise_variance, 0 when unneeded
  double y_offset = 0.0;
  Eigen::MatrixXd chol_factor;  // lower triangular
  Eigen::VectorXd alpha_vec;

  bool fitted() const { return chol_factor.rows() > 0; }
};

/// Posterior marginals at the query points. Variances are clamped at zero
/// after the numerical subtraction.
struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Factorizes K + noise I by Cholesky, escalating jitter 1e-10 -> 1e-4
/// (x10) if the plain factorization fails. center_target subtracts the
/// target mean before solving and restores it at prediction.
GPModel fit(const Eigen::Ref<const Eigen::MatrixXd>& X,
            const Eigen::Ref<const Eigen::VectorXd>& y, const KernelSpec& kernel,
            double noise_variance, bool center_target = true);

Prediction predict(const GPModel& model, const Eigen::Ref<const Eigen::MatrixXd>& X_star);

/// -1/2 y^T alpha - sum(log diag L) - (n/2) log(2 pi), from the stored factor.
double log_marginal_likelihood(const GPModel& model);

/// Derivative-free evidence maximization over log-space box bounds
/// [1e-2, 1e2] for the base spec's free hyperparameters: random multi-start
/// (budget points including the base spec) then coordinate-wise
/// golden-section refinement. budget == 1 returns the base spec unchanged.
KernelSpec tune_hyperparameters(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                const Eigen::Ref<const Eigen::VectorXd>& y,
                                const KernelSpec& base, double noise_variance,
                                int budget, std::uint64_t seed = 0x5eed0001ULL);

}  // namespace gpsales
