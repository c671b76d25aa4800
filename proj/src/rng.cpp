#include "gpsales/rng.hpp"

#include <numeric>

#include "gpsales/transforms.hpp"

namespace gpsales {

double normal01(std::mt19937_64& eng) { return inverse_normal_cdf(uniform01(eng)); }

double gamma_draw(std::mt19937_64& eng, double shape) {
  if (!(shape > 0.0)) return 0.0;
  if (shape < 1.0) {
    // boost: Gamma(a) = Gamma(a + 1) * U^(1/a)
    const double g = gamma_draw(eng, shape + 1.0);
    return g * std::pow(uniform01(eng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    const double x = normal01(eng);
    const double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = uniform01(eng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

std::vector<int> random_permutation(int n, std::mt19937_64& eng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(eng() % static_cast<std::uint64_t>(i + 1));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  return perm;
}

}  // namespace gpsales
