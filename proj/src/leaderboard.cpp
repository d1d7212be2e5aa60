#include "uneval/leaderboard.hpp"

#include <cmath>
#include <stdexcept>

#include "uneval/propagation.hpp"

namespace uneval {

namespace {

// Propagation sums for n ratings sharing one sigma, with Σ delta² given —
// the homogeneous closed form the bound approach evaluates at each end.
PropagationSums homogeneous_sums(std::uint64_t n, double sigma, double sum_delta2) {
  PropagationSums s;
  s.n = n;
  const double nd = static_cast<double>(n);
  const double s2 = sigma * sigma;
  s.sigma2 = nd * s2;
  s.sigma4 = nd * s2 * s2;
  s.sigma2_delta2 = s2 * sum_delta2;
  s.delta2 = sum_delta2;
  return s;
}

}  // namespace

LeaderboardEntry attach_variance(const LeaderboardEntry& entry, const AuditConfig& cfg,
                                 const UncertaintyModel& model, RngStream& rng,
                                 std::span<const double> deltas) {
  if (cfg.n < 1) throw std::invalid_argument("attach_variance: n must be >= 1");
  if (!(entry.score > 0.0)) {
    throw std::invalid_argument("attach_variance: entry \"" + entry.name +
                                "\" needs a positive score");
  }
  if (!deltas.empty() && deltas.size() != cfg.n) {
    throw std::invalid_argument("attach_variance: residual file must supply exactly n values");
  }

  LeaderboardEntry out = entry;
  out.variance_interval.reset();

  if (cfg.fixed_score_sigma.has_value()) {
    const double s = *cfg.fixed_score_sigma;
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("attach_variance: fixed score deviation must be >= 0");
    }
    out.score_variance = cfg.reading == SigmaReading::std_dev ? s * s : s;
    return out;
  }

  if (cfg.approach == Approach::C) {
    const SigmaBounds bounds = bound_sigma(model.scale);
    double sum_delta2;
    if (deltas.empty()) {
      sum_delta2 = static_cast<double>(cfg.n) * entry.score * entry.score;
    } else {
      sum_delta2 = 0.0;
      for (double d : deltas) sum_delta2 += d * d;
    }
    const double low =
        rmse_from_sums(homogeneous_sums(cfg.n, bounds.min, sum_delta2)).gaussian.variance;
    const double high =
        rmse_from_sums(homogeneous_sums(cfg.n, bounds.max, sum_delta2)).gaussian.variance;
    out.variance_interval = {low, high};
    out.score_variance = (low + high) / 2.0;
    return out;
  }

  // Approaches A and B: stream n sigma draws through the four sums; memory
  // stays O(1) no matter how large the test record is.
  validate(model);
  PropagationSums sums;
  for (std::uint64_t nu = 0; nu < cfg.n; ++nu) {
    const double sigma = draw_sigma_one(model, rng);
    const double delta = deltas.empty() ? entry.score : deltas[nu];
    sums.add(sigma * sigma, delta);
  }
  out.score_variance = rmse_from_sums(sums).gaussian.variance;
  return out;
}

AuditResult audit(const std::vector<LeaderboardEntry>& entries, const AuditConfig& cfg,
                  const UncertaintyModel& model, bool merge_ties,
                  std::span<const double> deltas) {
  if (entries.size() < 2) throw std::invalid_argument("audit: need at least 2 entries");

  AuditResult result;
  result.entries.reserve(entries.size());
  const RngStream root(cfg.seed);
  for (const auto& entry : entries) {
    // Per-entry substream keyed by rank: results are independent of the
    // order entries are processed in.
    RngStream stream = root.substream(static_cast<std::uint64_t>(entry.rank));
    result.entries.push_back(attach_variance(entry, cfg, model, stream, deltas));
  }

  const bool interval = !result.entries.empty() && result.entries.front().variance_interval;
  if (interval) {
    std::vector<std::pair<std::string, Gaussian>> low, high;
    low.reserve(result.entries.size());
    high.reserve(result.entries.size());
    for (const auto& e : result.entries) {
      low.emplace_back(e.name, Gaussian{e.score, e.variance_interval->first});
      high.emplace_back(e.name, Gaussian{e.score, e.variance_interval->second});
    }
    result.matrix_low = error_matrix(std::move(low), merge_ties);
    result.matrix_high = error_matrix(std::move(high), merge_ties);
  } else {
    std::vector<std::pair<std::string, Gaussian>> systems;
    systems.reserve(result.entries.size());
    for (const auto& e : result.entries) {
      systems.emplace_back(e.name, Gaussian{e.score, *e.score_variance});
    }
    result.matrix = error_matrix(std::move(systems), merge_ties);
  }
  return result;
}

}  // namespace uneval
