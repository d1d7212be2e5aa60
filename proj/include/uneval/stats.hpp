#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace uneval {

/// A normal density. variance == 0 denotes a point mass at `mean`.
struct Gaussian {
  double mean = 0.0;
  double variance = 0.0;
};

/// Throws std::invalid_argument unless mean and variance are finite and
/// variance >= 0.
void validate(const Gaussian& g);

/// Standard-normal CDF.
///
/// Evaluated through Cody's rational Chebyshev approximation of erfc
/// ("Rational Chebyshev approximation for the error function",
/// W. J. Cody, Math. Comp. 23 (1969), pp. 631-638), the same scheme used
/// by netlib's SPECFUN. Relative error of the erfc kernel is below
/// 2e-16 on each of its three branches, so the absolute error of the
/// CDF stays well under the 1e-7 budget on [-8, 8].
double std_normal_cdf(double x);

/// Standard-normal quantile (inverse of std_normal_cdf), p in (0, 1).
///
/// Acklam's rational approximation (max relative error 1.15e-9)
/// polished with one Halley step against std_normal_cdf, which brings
/// the result to near machine precision.
double std_normal_quantile(double p);

struct Histogram {
  std::vector<double> bin_edges;       // ascending, counts.size() + 1 entries
  std::vector<std::uint64_t> counts;
};

enum class VarianceEstimator {
  ml,        // 1/n normalization (maximum likelihood)
  unbiased,  // 1/(n-1)
};

/// Gaussian fit with the ML (1/n) variance. Throws on empty input
/// ("insufficient data").
Gaussian fit_gaussian_ml(std::span<const double> samples);

/// Same fit with a selectable variance normalization.
Gaussian fit_gaussian(std::span<const double> samples, VarianceEstimator estimator);

/// Equal-width histogram spanning [min, max] of the values; the rightmost
/// bin is closed. An all-equal input has its span widened to
/// [v - 0.5, v + 0.5] so the bin width never degenerates to zero.
Histogram make_histogram(std::span<const double> values, std::size_t bins);

/// Deterministic random stream. The engine is std::mt19937_64 (its output
/// sequence is pinned by the standard), and every variate is derived from
/// raw 64-bit draws by fixed arithmetic, so identical seeds give identical
/// sequences on any platform.
///
/// Substream split rule: child seed = mix64(mix64(seed XOR
/// (index + 1) * 0x9E3779B97F4A7C15)) where mix64 is the SplitMix64
/// finalizer. Parallel consumers take disjoint substream indices.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  RngStream substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  double uniform01();  // strictly inside (0, 1)
  double uniform(double lo, double hi);  // requires finite lo <= hi
  double normal();     // N(0, 1) via inverse-CDF transform, one u64 per draw
  double normal(double mean, double stddev);  // requires finite mean, stddev >= 0

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// k i.i.d. draws from g. A zero-variance g yields k copies of g.mean.
std::vector<double> sample(const Gaussian& g, RngStream& rng, std::size_t k);

}  // namespace uneval
