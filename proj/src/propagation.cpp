#include "uneval/propagation.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <vector>

namespace uneval {

const char* to_string(Metric m) {
  switch (m) {
    case Metric::rmse: return "rmse";
    case Metric::mse: return "mse";
    case Metric::mae: return "mae";
  }
  return "?";
}

const char* to_string(MetricMethod m) {
  return m == MetricMethod::analytic ? "analytic" : "monte-carlo";
}

double point_rmse(std::span<const double> deltas) {
  if (deltas.empty()) throw std::invalid_argument("point_rmse: no residuals");
  double ss = 0.0;
  for (double d : deltas) ss += d * d;
  return std::sqrt(ss / static_cast<double>(deltas.size()));
}

void PropagationSums::add(double sigma_sq, double delta) {
  const double d2 = delta * delta;
  sigma2 += sigma_sq;
  sigma4 += sigma_sq * sigma_sq;
  sigma2_delta2 += sigma_sq * d2;
  delta2 += d2;
  ++n;
}

PropagationSums& PropagationSums::operator+=(const PropagationSums& other) {
  n += other.n;
  sigma2 += other.sigma2;
  sigma4 += other.sigma4;
  sigma2_delta2 += other.sigma2_delta2;
  delta2 += other.delta2;
  return *this;
}

// Why the RMSE moments below have this exact shape. Write
//   MSE = (1/n) Σ Y_nu,   Y_nu = (X_nu - pi_nu)²,   X_nu ~ N(mu_nu, sigma_nu²),
//   delta_nu = mu_nu - pi_nu.
// Each summand is a scaled noncentral chi-square with one degree of freedom:
//   E[Y_nu]   = sigma_nu² + delta_nu²
//   Var[Y_nu] = 2 sigma_nu⁴ + 4 sigma_nu² delta_nu²
// so by independence across nu
//   E[MSE]   = (1/n)  Σ (sigma_nu² + delta_nu²)
//   Var[MSE] = (1/n²) Σ (2 sigma_nu⁴ + 4 sigma_nu² delta_nu²).
// RMSE = sqrt(MSE). First-order error propagation (the delta method) through
// f = sqrt, using f'(m)² = 1/(4m) at m = E[MSE]:
//   Var[RMSE] ≈ Var[MSE] / (4 E[MSE])
//             = [(1/n²) Σ (2 sigma⁴ + 4 sigma² delta²)] / [4 (1/n) Σ (sigma² + delta²)]
//             = Σ (sigma_nu⁴ + 2 sigma_nu² delta_nu²) / (2n · Σ (sigma_nu² + delta_nu²)),
// i.e. the denominator groups as 2n times the *whole* sum Σ(sigma² + delta²).
// E[RMSE] is taken as sqrt(E[MSE]); the sqrt's Jensen bias is second order
// and deliberately ignored — the Monte Carlo path quantifies the residual.
MetricDistribution rmse_from_sums(const PropagationSums& sums) {
  if (sums.n == 0) throw std::invalid_argument("rmse_from_sums: no ratings");
  MetricDistribution out;
  out.metric = Metric::rmse;
  out.n = sums.n;
  out.method = MetricMethod::analytic;
  const double total = sums.sigma2 + sums.delta2;  // Σ (sigma² + delta²)
  if (total == 0.0) {
    out.degenerate = true;  // exact point mass at 0; guard the division
    return out;
  }
  const double nd = static_cast<double>(sums.n);
  out.gaussian.mean = std::sqrt(total / nd);
  out.gaussian.variance = (sums.sigma4 + 2.0 * sums.sigma2_delta2) / (2.0 * nd * total);
  return out;
}

MetricDistribution mse_from_sums(const PropagationSums& sums) {
  if (sums.n == 0) throw std::invalid_argument("mse_from_sums: no ratings");
  MetricDistribution out;
  out.metric = Metric::mse;
  out.n = sums.n;
  out.method = MetricMethod::analytic;
  out.clt_approx = sums.n < 30;
  const double total = sums.sigma2 + sums.delta2;
  if (total == 0.0) {
    out.degenerate = true;
    out.clt_approx = false;  // the point mass is exact, not a CLT shape
    return out;
  }
  const double nd = static_cast<double>(sums.n);
  out.gaussian.mean = total / nd;
  out.gaussian.variance = (2.0 * sums.sigma4 + 4.0 * sums.sigma2_delta2) / (nd * nd);
  return out;
}

PropagationSums accumulate(std::span<const UncertainRating> ratings) {
  PropagationSums sums;
  for (const auto& r : ratings) {
    if (!r.predictor.has_value()) {
      throw std::invalid_argument("rating (" + r.user + ", " + r.item +
                                  ") has no predictor attached");
    }
    validate(r.density);
    sums.add(r.density.variance, r.density.mean - *r.predictor);
  }
  return sums;
}

MetricDistribution rmse_distribution(std::span<const UncertainRating> ratings) {
  return rmse_from_sums(accumulate(ratings));
}

MetricDistribution mse_distribution(std::span<const UncertainRating> ratings) {
  return mse_from_sums(accumulate(ratings));
}

namespace {

constexpr std::size_t kChunk = 4096;

double point_metric(Metric metric, std::span<const double> deltas) {
  double acc = 0.0;
  switch (metric) {
    case Metric::rmse:
    case Metric::mse:
      for (double d : deltas) acc += d * d;
      acc /= static_cast<double>(deltas.size());
      return metric == Metric::rmse ? std::sqrt(acc) : acc;
    case Metric::mae:
      for (double d : deltas) acc += std::fabs(d);
      return acc / static_cast<double>(deltas.size());
  }
  return 0.0;
}

}  // namespace

MetricDistribution mc_metric_distribution(std::span<const UncertainRating> ratings,
                                          Metric metric, const RngStream& rng,
                                          std::size_t samples, unsigned threads) {
  if (ratings.empty()) throw std::invalid_argument("mc_metric_distribution: no ratings");
  if (samples < 1000) {
    throw std::invalid_argument("mc_metric_distribution: need at least 1000 samples");
  }

  const std::size_t m = ratings.size();
  std::vector<double> mu(m), sd(m), pi(m);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& r = ratings[i];
    if (!r.predictor.has_value()) {
      throw std::invalid_argument("rating (" + r.user + ", " + r.item +
                                  ") has no predictor attached");
    }
    validate(r.density);
    mu[i] = r.density.mean;
    sd[i] = std::sqrt(r.density.variance);
    pi[i] = *r.predictor;
  }

  const std::size_t nchunks = (samples + kChunk - 1) / kChunk;
  std::vector<double> outcomes(samples);
  std::atomic<std::size_t> next_chunk{0};

  auto worker = [&]() {
    std::vector<double> deltas(m);
    for (;;) {
      const std::size_t k = next_chunk.fetch_add(1);
      if (k >= nchunks) return;
      RngStream stream = rng.substream(k);
      const std::size_t begin = k * kChunk;
      const std::size_t end = std::min(begin + kChunk, samples);
      for (std::size_t s = begin; s < end; ++s) {
        for (std::size_t i = 0; i < m; ++i) {
          // Draws follow the rating's own density, untruncated: the model is
          // an unbounded Gaussian even on a bounded rating scale.
          deltas[i] = mu[i] + sd[i] * stream.normal() - pi[i];
        }
        outcomes[s] = point_metric(metric, deltas);
      }
    }
  };

  unsigned want = threads != 0 ? threads : std::thread::hardware_concurrency();
  if (want == 0) want = 1;
  want = static_cast<unsigned>(std::min<std::size_t>(want, nchunks));
  if (want <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(want);
    for (unsigned t = 0; t < want; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const Gaussian fit = fit_gaussian_ml(outcomes);
  MetricDistribution out;
  out.metric = metric;
  out.gaussian = fit;
  out.n = m;
  out.method = MetricMethod::monte_carlo;
  out.mc_samples = samples;
  return out;
}

}  // namespace uneval
