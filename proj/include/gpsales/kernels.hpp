#pragma once

#include <Eigen/Dense>
#include <optional>

namespace gpsales {

enum class KernelFamily { RBF, RQ, Matern, Ensemble };

/// Matern smoothness, restricted to the half-integers with closed forms.
enum class MaternNu { half, three_halves, five_halves };

double matern_nu_value(MaternNu nu);
MaternNu matern_nu_from_value(double nu);

/// Non-negative mixing weights over (RBF, RQ, Matern); sum to 1 within 1e-9.
struct EnsembleWeights {
  double w_rbf = 1.0 / 3.0;
  double w_rq = 1.0 / 3.0;
  double w_matern = 1.0 / 3.0;
  void validate() const;
};

/// Fixed member hyperparameters plus mixing weights. The RBF member carries
/// no variance of its own; its scale is absorbed by the weight.
struct EnsembleSpec {
  EnsembleWeights weights;
  double rbf_lengthscale = 1.0;
  double rq_variance = 1.0;
  double rq_lengthscale = 1.0;
  double rq_alpha = 1.0;
  double matern_variance = 1.0;
  double matern_lengthscale = 1.0;
  MaternNu matern_nu = MaternNu::three_halves;
};

struct KernelSpec {
  KernelFamily family = KernelFamily::RBF;
  double variance = 1.0;    // unused by the RBF family
  double lengthscale = 1.0;
  double rq_alpha = 1.0;    // RQ shape
  MaternNu matern_nu = MaternNu::three_halves;
  std::optional<EnsembleSpec> ensemble;  // required when family == Ensemble
  void validate() const;
};

KernelSpec default_spec(KernelFamily family, MaternNu nu = MaternNu::three_halves);
KernelSpec make_ensemble_spec(const EnsembleSpec& members);

/// exp(-|x - x2|^2 / (2 l^2)); value in (0, 1].
double k_rbf(const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& x2, double lengthscale);

/// variance * (1 + d^2 / (2 alpha l^2))^(-alpha).
double k_rq(const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& x2, double variance,
            double lengthscale, double rq_alpha);

/// Closed-form half-integer Matern.
double k_matern(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& x2, double variance,
                double lengthscale, MaternNu nu);

/// Weighted sum of the three members, each with its own hyperparameters.
double k_ensemble(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& x2, const KernelSpec& spec);

/// Dispatch on spec.family.
double kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& x2);

/// k(x, x); constant for these stationary kernels.
double kernel_diag_value(const KernelSpec& spec);

/// Pairwise kernel evaluations, rows parallelized with OpenMP.
Eigen::MatrixXd gram_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::MatrixXd>& X2,
                            const KernelSpec& spec);

/// Serial reference for gram_matrix; bit-identical output, kept for testing
/// and benchmarking.
Eigen::MatrixXd gram_matrix_serial(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X2,
                                   const KernelSpec& spec);

namespace detail {
double kernel_from_sqdist(const KernelSpec& spec, double d2);
}

}  // namespace gpsales
