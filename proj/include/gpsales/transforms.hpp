#pragma once

#include <cstddef>
#include <variant>
#include <vector>

namespace gpsales {

/// Monotone power transform fitted by maximum likelihood, followed by
/// standardization of the transformed sample.
struct YeoJohnsonTransform {
  double lambda = 1.0;       ///< fitted exponent, in [-5, 5]
  double fitted_mean = 0.0;  ///< mean of the transformed training sample
  double fitted_std = 1.0;   ///< std of the transformed training sample (> 0)
};

/// Empirical-CDF-to-Gaussian map backed by the sorted training sample.
struct QuantileMap {
  std::vector<double> sorted_reference;  // ascending, ties preserved
  std::size_t n() const { return sorted_reference.size(); }
};

struct IdentityTransform {};

/// Per-column Gaussianizer; exactly one variant is active.
using ColumnTransform = std::variant<IdentityTransform, YeoJohnsonTransform, QuantileMap>;

double yeo_johnson_forward(double x, double lambda);
double yeo_johnson_inverse(double y, double lambda);

/// Gaussian profile log-likelihood of the transformed sample, Jacobian
/// included. Degenerate transformed samples evaluate to -inf, never throw.
double yeo_johnson_log_likelihood(const std::vector<double>& data, double lambda);

/// Maximizes the profile log-likelihood over lambda in [-5, 5]
/// (101-point grid scan, then golden-section to 1e-6).
YeoJohnsonTransform fit_yeo_johnson(const std::vector<double>& data);

QuantileMap fit_quantile_transform(std::vector<double> data);

/// Empirical CDF with plotting positions (rank - 0.5)/n, linearly
/// interpolated and clamped into [1/(2n), 1 - 1/(2n)], composed with the
/// Gaussian quantile function. Monotone non-decreasing in x.
double quantile_forward(double x, const QuantileMap& map);

/// Gaussian CDF composed with the interpolated inverse empirical CDF;
/// out-of-range values clamp to the reference min/max.
double quantile_inverse(double y, const QuantileMap& map);

double normal_cdf(double x);
double normal_pdf(double x);

/// Standard normal quantile, |error| <= 1e-9 (rational approximation plus
/// one Halley step against the exact CDF). Requires 0 < p < 1.
double inverse_normal_cdf(double p);

/// Sample skewness m3 / m2^(3/2) with biased central moments.
double skewness(const std::vector<double>& data);

double transform_forward(double x, const ColumnTransform& t);
double transform_inverse(double y, const ColumnTransform& t);

}  // namespace gpsales
