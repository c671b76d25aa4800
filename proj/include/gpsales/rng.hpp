#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gpsales {

// Deterministic scalar draws on top of mt19937_64. All stochastic code in the
// library goes through these helpers instead of std::*_distribution, whose
// output is implementation-defined; mt19937_64 plus explicit inverse-CDF /
// rejection transforms reproduces bit-for-bit everywhere.

/// Uniform draw on the open interval (0, 1).
inline double uniform01(std::mt19937_64& eng) {
  return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal draw via the inverse CDF.
double normal01(std::mt19937_64& eng);

/// Exponential(1) draw.
inline double exponential1(std::mt19937_64& eng) { return -std::log(uniform01(eng)); }

/// Gamma(shape, 1) draw (Marsaglia-Tsang squeeze for shape >= 1, boosted below).
double gamma_draw(std::mt19937_64& eng, double shape);

/// Fisher-Yates permutation of {0, ..., n-1}.
std::vector<int> random_permutation(int n, std::mt19937_64& eng);

/// Engine seeded from a (seed, stream) pair so independent consumers of the
/// same user seed draw from disjoint sequences.
inline std::mt19937_64 seeded_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace gpsales
