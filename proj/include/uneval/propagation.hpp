#pragma once

#include <cstdint>
#include <span>

#include "uneval/stats.hpp"
#include "uneval/uncertainty.hpp"

namespace uneval {

enum class Metric { rmse, mse, mae };
enum class MetricMethod { analytic, monte_carlo };

const char* to_string(Metric m);
const char* to_string(MetricMethod m);

/// The distribution an accuracy metric inherits from uncertain ratings,
/// approximated as a Gaussian.
struct MetricDistribution {
  Metric metric = Metric::rmse;
  Gaussian gaussian;
  std::uint64_t n = 0;          // number of ratings the metric aggregates
  MetricMethod method = MetricMethod::analytic;
  std::uint64_t mc_samples = 0; // 0 for analytic results
  /// All sigma and all residuals were zero: the metric is an exact point
  /// mass at 0 and the variance formula's denominator was guarded.
  bool degenerate = false;
  /// Analytic MSE result with n < 30: the Gaussian shape leans on the CLT,
  /// which is thin at that size.
  bool clt_approx = false;
};

/// Point RMSE over residuals delta_nu = mu_nu - pi_nu: sqrt(mean of delta²).
/// Throws on empty input.
double point_rmse(std::span<const double> deltas);

/// The four running sums the closed forms need. O(1) memory regardless of n,
/// so audits over 10⁹ ratings stream through without allocation.
struct PropagationSums {
  std::uint64_t n = 0;
  double sigma2 = 0.0;        // Σ sigma_nu²
  double sigma4 = 0.0;        // Σ sigma_nu⁴
  double sigma2_delta2 = 0.0; // Σ sigma_nu² · delta_nu²
  double delta2 = 0.0;        // Σ delta_nu²

  void add(double sigma_sq, double delta);
  PropagationSums& operator+=(const PropagationSums& other);
};

/// Gaussian approximation of the RMSE over n ratings X_nu ~ N(mu_nu,
/// sigma_nu²) with predictors pi_nu, delta_nu = mu_nu - pi_nu:
///   mean     = sqrt((1/n) Σ (sigma_nu² + delta_nu²))
///   variance = Σ (sigma_nu⁴ + 2 sigma_nu² delta_nu²) / (2n Σ (sigma_nu² + delta_nu²))
/// (first-order error propagation through sqrt; derivation in the
/// implementation). A zero denominator yields a degenerate (0, 0) result
/// with the flag set, never an error.
MetricDistribution rmse_from_sums(const PropagationSums& sums);

/// Exact moments of the MSE = (1/n) Σ (X_nu - pi_nu)²:
///   mean = (1/n) Σ (sigma_nu² + delta_nu²)
///   variance = (1/n²) Σ (2 sigma_nu⁴ + 4 sigma_nu² delta_nu²)
/// Gaussian shape via the CLT; clt_approx is set when n < 30.
MetricDistribution mse_from_sums(const PropagationSums& sums);

/// Accumulate sums over ratings (every predictor must be set; throws naming
/// the first offending (user, item) otherwise).
PropagationSums accumulate(std::span<const UncertainRating> ratings);

MetricDistribution rmse_distribution(std::span<const UncertainRating> ratings);
MetricDistribution mse_distribution(std::span<const UncertainRating> ratings);

/// Monte Carlo distribution of a metric: per sample, draw every X_nu from its
/// (untruncated) density, evaluate the point metric, then fit a Gaussian to
/// the sample of metric values. Supports MAE, which has no analytic path
/// here. Deterministic under the stream's seed and independent of thread
/// count: the sample budget is cut into fixed chunks, chunk k draws from
/// rng.substream(k) into its own output slice, and the fit runs over the
/// concatenation in index order. `threads` = 0 picks the hardware count.
/// Requires samples >= 1000; throws on empty ratings.
MetricDistribution mc_metric_distribution(std::span<const UncertainRating> ratings,
                                          Metric metric, const RngStream& rng,
                                          std::size_t samples, unsigned threads = 0);

}  // namespace uneval
