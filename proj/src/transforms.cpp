#include "gpsales/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gpsales/golden_section.hpp"

namespace gpsales {

namespace {

template <class... Ts>
struct Overload : Ts... {
  using Ts::operator()...;
};

void require_finite(double v, const char* who) {
  if (!std::isfinite(v)) throw std::domain_error(std::string(who) + ": non-finite input");
}

}  // namespace

double yeo_johnson_forward(double x, double lambda) {
  require_finite(x, "yeo_johnson_forward");
  require_finite(lambda, "yeo_johnson_forward");
  if (x >= 0.0) {
    if (lambda == 0.0) return std::log1p(x);
    return std::expm1(lambda * std::log1p(x)) / lambda;
  }
  const double two_ml = 2.0 - lambda;
  if (two_ml == 0.0) return -std::log1p(-x);
  return -std::expm1(two_ml * std::log1p(-x)) / two_ml;
}

double yeo_johnson_inverse(double y, double lambda) {
  require_finite(y, "yeo_johnson_inverse");
  require_finite(lambda, "yeo_johnson_inverse");
  if (y >= 0.0) {
    if (lambda == 0.0) return std::expm1(y);
    double t = 1.0 + lambda * y;
    if (t < 1e-12) t = 1e-12;  // clamp values outside the branch's open range
    return std::expm1(std::log(t) / lambda);
  }
  const double two_ml = 2.0 - lambda;
  if (two_ml == 0.0) return -std::expm1(-y);
  double t = 1.0 - two_ml * y;
  if (t < 1e-12) t = 1e-12;
  return -std::expm1(std::log(t) / two_ml);
}

double yeo_johnson_log_likelihood(const std::vector<double>& data, double lambda) {
  if (data.size() < 3)
    throw std::invalid_argument("yeo_johnson_log_likelihood: need at least 3 samples");
  require_finite(lambda, "yeo_johnson_log_likelihood");
  constexpr double ninf = -std::numeric_limits<double>::infinity();

  const double n = static_cast<double>(data.size());
  std::vector<double> z(data.size());
  double jacobian = 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    require_finite(data[i], "yeo_johnson_log_likelihood");
    z[i] = yeo_johnson_forward(data[i], lambda);
    if (!std::isfinite(z[i])) return ninf;
    jacobian += (data[i] >= 0.0 ? 1.0 : -1.0) * std::log1p(std::abs(data[i]));
    sum += z[i];
  }
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : z) ss += (v - mean) * (v - mean);
  const double var = ss / n;
  // relative guard: a constant sample leaves only mean-roundoff noise in ss
  if (!std::isfinite(var) || var <= 1e-24 * std::max(1.0, mean * mean)) return ninf;

  return -0.5 * n * (std::log(2.0 * std::numbers::pi * var) + 1.0) + (lambda - 1.0) * jacobian;
}

YeoJohnsonTransform fit_yeo_johnson(const std::vector<double>& data) {
  if (data.size() < 3) throw std::invalid_argument("fit_yeo_johnson: need at least 3 samples");
  double sum = 0.0;
  for (double v : data) {
    require_finite(v, "fit_yeo_johnson");
    sum += v;
  }
  const double n = static_cast<double>(data.size());
  const double mean = sum / n;
  double ss = 0.0;
  for (double v : data) ss += (v - mean) * (v - mean);
  if (ss / n <= 1e-24 * std::max(1.0, mean * mean))
    throw std::invalid_argument("fit_yeo_johnson: data has zero variance");

  constexpr double lo = -5.0, hi = 5.0;
  constexpr int grid_points = 101;
  const double step = (hi - lo) / (grid_points - 1);
  auto ll = [&](double lam) { return yeo_johnson_log_likelihood(data, lam); };

  int best = 0;
  double best_ll = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < grid_points; ++i) {
    const double v = ll(lo + i * step);
    if (v > best_ll) {
      best_ll = v;
      best = i;
    }
  }
  if (!std::isfinite(best_ll))
    throw std::invalid_argument("fit_yeo_johnson: likelihood degenerate for all lambda");

  const double bl = lo + std::max(0, best - 1) * step;
  const double bh = lo + std::min(grid_points - 1, best + 1) * step;
  double lambda = detail::golden_section_maximize(ll, bl, bh, 1e-6);
  if (ll(lambda) < best_ll) lambda = lo + best * step;

  YeoJohnsonTransform t;
  t.lambda = lambda;
  double zsum = 0.0;
  std::vector<double> z(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    z[i] = yeo_johnson_forward(data[i], lambda);
    zsum += z[i];
  }
  t.fitted_mean = zsum / n;
  double zss = 0.0;
  for (double v : z) zss += (v - t.fitted_mean) * (v - t.fitted_mean);
  t.fitted_std = std::sqrt(zss / n);
  if (!(t.fitted_std > 0.0))
    throw std::invalid_argument("fit_yeo_johnson: transformed data has zero variance");
  return t;
}

QuantileMap fit_quantile_transform(std::vector<double> data) {
  if (data.size() < 2)
    throw std::invalid_argument("fit_quantile_transform: need at least 2 samples");
  for (double v : data) require_finite(v, "fit_quantile_transform");
  std::sort(data.begin(), data.end());
  return QuantileMap{std::move(data)};
}

double quantile_forward(double x, const QuantileMap& map) {
  require_finite(x, "quantile_forward");
  const auto& ref = map.sorted_reference;
  if (ref.size() < 2) throw std::invalid_argument("quantile_forward: map not fitted");
  const double n = static_cast<double>(ref.size());

  const auto lo_it = std::lower_bound(ref.begin(), ref.end(), x);
  const auto hi_it = std::upper_bound(lo_it, ref.end(), x);
  double p;
  if (lo_it != hi_it) {
    // exact match; ties map to the midpoint of the run's plotting positions
    const double lo = static_cast<double>(lo_it - ref.begin());
    const double hi = static_cast<double>(hi_it - ref.begin());
    p = (lo + hi) / (2.0 * n);
  } else if (lo_it == ref.begin()) {
    p = 0.5 / n;
  } else if (lo_it == ref.end()) {
    p = (n - 0.5) / n;
  } else {
    const auto k = static_cast<std::size_t>(lo_it - ref.begin());
    const double x0 = ref[k - 1], x1 = ref[k];
    p = (static_cast<double>(k) - 0.5) / n + (x - x0) / (x1 - x0) / n;
  }
  p = std::clamp(p, 0.5 / n, (n - 0.5) / n);
  return inverse_normal_cdf(p);
}

double quantile_inverse(double y, const QuantileMap& map) {
  require_finite(y, "quantile_inverse");
  const auto& ref = map.sorted_reference;
  if (ref.size() < 2) throw std::invalid_argument("quantile_inverse: map not fitted");
  const double n = static_cast<double>(ref.size());

  double p = normal_cdf(y);
  p = std::clamp(p, 0.5 / n, (n - 0.5) / n);
  const double t = p * n - 0.5;  // position on the knot grid, in [0, n-1]
  const auto i = static_cast<std::size_t>(t);
  if (i + 1 >= ref.size()) return ref.back();
  const double frac = t - static_cast<double>(i);
  return ref[i] + frac * (ref[i + 1] - ref[i]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0) || !(p < 1.0))
    throw std::domain_error("inverse_normal_cdf: p must lie in (0, 1)");

  // Acklam's rational approximation (relative error < 1.15e-9), then one
  // Halley step against the exact CDF.
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  if (std::abs(x) < 37.0) {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

double skewness(const std::vector<double>& data) {
  if (data.size() < 3) throw std::invalid_argument("skewness: need at least 3 samples");
  double sum = 0.0;
  for (double v : data) {
    require_finite(v, "skewness");
    sum += v;
  }
  const double n = static_cast<double>(data.size());
  const double mean = sum / n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : data) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (m2 <= 1e-24 * std::max(1.0, mean * mean))
    throw std::invalid_argument("skewness: data has zero variance");
  return m3 / std::pow(m2, 1.5);
}

double transform_forward(double x, const ColumnTransform& t) {
  require_finite(x, "transform_forward");
  return std::visit(
      Overload{
          [&](const IdentityTransform&) { return x; },
          [&](const YeoJohnsonTransform& yj) {
            return (yeo_johnson_forward(x, yj.lambda) - yj.fitted_mean) / yj.fitted_std;
          },
          [&](const QuantileMap& q) { return quantile_forward(x, q); },
      },
      t);
}

double transform_inverse(double y, const ColumnTransform& t) {
  require_finite(y, "transform_inverse");
  return std::visit(
      Overload{
          [&](const IdentityTransform&) { return y; },
          [&](const YeoJohnsonTransform& yj) {
            return yeo_johnson_inverse(y * yj.fitted_std + yj.fitted_mean, yj.lambda);
          },
          [&](const QuantileMap& q) { return quantile_inverse(y, q); },
      },
      t);
}

}  // namespace gpsales
