#include "gpsales/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gpsales {

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("KernelSpec: ") + name + " must be positive and finite");
}

void require_same_dim(const Eigen::Ref<const Eigen::VectorXd>& x,
                      const Eigen::Ref<const Eigen::VectorXd>& x2) {
  if (x.size() != x2.size())
    throw std::invalid_argument("kernel: input dimension mismatch");
}

double rbf_from_sqdist(double d2, double lengthscale) {
  return std::exp(-d2 / (2.0 * lengthscale * lengthscale));
}

// log1p form stays accurate in the large-alpha limit where RQ approaches RBF.
double rq_from_sqdist(double d2, double variance, double lengthscale, double rq_alpha) {
  const double q = d2 / (2.0 * rq_alpha * lengthscale * lengthscale);
  return variance * std::exp(-rq_alpha * std::log1p(q));
}

double matern_from_dist(double d, double variance, double lengthscale, MaternNu nu) {
  switch (nu) {
    case MaternNu::half:
      return variance * std::exp(-d / lengthscale);
    case MaternNu::three_halves: {
      const double t = std::sqrt(3.0) * d / lengthscale;
      return variance * (1.0 + t) * std::exp(-t);
    }
    case MaternNu::five_halves: {
      const double t = std::sqrt(5.0) * d / lengthscale;
      return variance * (1.0 + t + t * t / 3.0) * std::exp(-t);
    }
  }
  throw std::invalid_argument("k_matern: unsupported nu");
}

}  // namespace

double matern_nu_value(MaternNu nu) {
  switch (nu) {
    case MaternNu::half: return 0.5;
    case MaternNu::three_halves: return 1.5;
    case MaternNu::five_halves: return 2.5;
  }
  throw std::invalid_argument("matern_nu_value: unsupported nu");
}

MaternNu matern_nu_from_value(double nu) {
  if (nu == 0.5) return MaternNu::half;
  if (nu == 1.5) return MaternNu::three_halves;
  if (nu == 2.5) return MaternNu::five_halves;
  throw std::invalid_argument("matern_nu_from_value: nu must be one of 0.5, 1.5, 2.5");
}

void EnsembleWeights::validate() const {
  if (!(w_rbf >= 0.0) || !(w_rq >= 0.0) || !(w_matern >= 0.0))
    throw std::invalid_argument("EnsembleWeights: weights must be non-negative");
  const double sum = w_rbf + w_rq + w_matern;
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("EnsembleWeights: weights must sum to 1");
}

void KernelSpec::validate() const {
  require_positive(variance, "variance");
  require_positive(lengthscale, "lengthscale");
  require_positive(rq_alpha, "rq_alpha");
  if (family == KernelFamily::Ensemble) {
    if (!ensemble.has_value())
      throw std::invalid_argument("KernelSpec: ensemble family requires member spec");
    ensemble->weights.validate();
    require_positive(ensemble->rbf_lengthscale, "ensemble rbf_lengthscale");
    require_positive(ensemble->rq_variance, "ensemble rq_variance");
    require_positive(ensemble->rq_lengthscale, "ensemble rq_lengthscale");
    require_positive(ensemble->rq_alpha, "ensemble rq_alpha");
    require_positive(ensemble->matern_variance, "ensemble matern_variance");
    require_positive(ensemble->matern_lengthscale, "ensemble matern_lengthscale");
  }
}

KernelSpec default_spec(KernelFamily family, MaternNu nu) {
  KernelSpec spec;
  spec.family = family;
  spec.matern_nu = nu;
  if (family == KernelFamily::Ensemble) {
    EnsembleSpec members;
    members.matern_nu = nu;
    spec.ensemble = members;
  }
  return spec;
}

KernelSpec make_ensemble_spec(const EnsembleSpec& members) {
  KernelSpec spec;
  spec.family = KernelFamily::Ensemble;
  spec.ensemble = members;
  spec.validate();
  return spec;
}

namespace detail {

double kernel_from_sqdist(const KernelSpec& spec, double d2) {
  switch (spec.family) {
    case KernelFamily::RBF:
      return rbf_from_sqdist(d2, spec.lengthscale);
    case KernelFamily::RQ:
      return rq_from_sqdist(d2, spec.variance, spec.lengthscale, spec.rq_alpha);
    case KernelFamily::Matern:
      return matern_from_dist(std::sqrt(d2), spec.variance, spec.lengthscale, spec.matern_nu);
    case KernelFamily::Ensemble: {
      const EnsembleSpec& e = *spec.ensemble;
      return e.weights.w_rbf * rbf_from_sqdist(d2, e.rbf_lengthscale) +
             e.weights.w_rq * rq_from_sqdist(d2, e.rq_variance, e.rq_lengthscale, e.rq_alpha) +
             e.weights.w_matern *
                 matern_from_dist(std::sqrt(d2), e.matern_variance, e.matern_lengthscale,
                                  e.matern_nu);
    }
  }
  throw std::invalid_argument("kernel_from_sqdist: unknown family");
}

}  // namespace detail

double k_rbf(const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& x2, double lengthscale) {
  require_same_dim(x, x2);
  require_positive(lengthscale, "lengthscale");
  return rbf_from_sqdist((x - x2).squaredNorm(), lengthscale);
}

double k_rq(const Eigen::Ref<const Eigen::VectorXd>& x,
            const Eigen::Ref<const Eigen::VectorXd>& x2, double variance,
            double lengthscale, double rq_alpha) {
  require_same_dim(x, x2);
  require_positive(variance, "variance");
  require_positive(lengthscale, "lengthscale");
  require_positive(rq_alpha, "rq_alpha");
  return rq_from_sqdist((x - x2).squaredNorm(), variance, lengthscale, rq_alpha);
}

double k_matern(const Eigen::Ref<const Eigen::VectorXd>& x,
                const Eigen::Ref<const Eigen::VectorXd>& x2, double variance,
                double lengthscale, MaternNu nu) {
  require_same_dim(x, x2);
  require_positive(variance, "variance");
  require_positive(lengthscale, "lengthscale");
  return matern_from_dist((x - x2).norm(), variance, lengthscale, nu);
}

double k_ensemble(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& x2, const KernelSpec& spec) {
  require_same_dim(x, x2);
  if (spec.family != KernelFamily::Ensemble)
    throw std::invalid_argument("k_ensemble: spec.family must be Ensemble");
  spec.validate();
  return detail::kernel_from_sqdist(spec, (x - x2).squaredNorm());
}

double kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& x2) {
  require_same_dim(x, x2);
  spec.validate();
  return detail::kernel_from_sqdist(spec, (x - x2).squaredNorm());
}

double kernel_diag_value(const KernelSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case KernelFamily::RBF:
      return 1.0;
    case KernelFamily::RQ:
    case KernelFamily::Matern:
      return spec.variance;
    case KernelFamily::Ensemble: {
      const EnsembleSpec& e = *spec.ensemble;
      return e.weights.w_rbf + e.weights.w_rq * e.rq_variance +
             e.weights.w_matern * e.matern_variance;
    }
  }
  throw std::invalid_argument("kernel_diag_value: unknown family");
}

Eigen::MatrixXd gram_matrix(const Eigen::Ref<const Eigen::MatrixXd>& X,
                            const Eigen::Ref<const Eigen::MatrixXd>& X2,
                            const KernelSpec& spec) {
  if (X.cols() != X2.cols())
    throw std::invalid_argument("gram_matrix: feature dimension mismatch");
  spec.validate();
  const Eigen::Index n = X.rows(), m = X2.rows();
  Eigen::MatrixXd K(n, m);
#pragma omp parallel for schedule(static)
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      K(i, j) = detail::kernel_from_sqdist(spec, (X.row(i) - X2.row(j)).squaredNorm());
  return K;
}

Eigen::MatrixXd gram_matrix_serial(const Eigen::Ref<const Eigen::MatrixXd>& X,
                                   const Eigen::Ref<const Eigen::MatrixXd>& X2,
                                   const KernelSpec& spec) {
  if (X.cols() != X2.cols())
    throw std::invalid_argument("gram_matrix_serial: feature dimension mismatch");
  spec.validate();
  const Eigen::Index n = X.rows(), m = X2.rows();
  Eigen::MatrixXd K(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      K(i, j) = detail::kernel_from_sqdist(spec, (X.row(i) - X2.row(j)).squaredNorm());
  return K;
}

}  // namespace gpsales
