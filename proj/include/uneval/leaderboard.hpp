#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "uneval/ranking.hpp"
#include "uneval/uncertainty.hpp"

namespace uneval {

/// One leaderboard row: a published point RMSE plus, after analysis, the
/// score variance an uncertainty model attaches to it. variance_interval is
/// present exactly for the bound approach (C), whose answer is a range.
struct LeaderboardEntry {
  int rank = 0;
  std::string name;
  double score = 0.0;
  std::optional<double> score_variance;
  std::optional<std::pair<double, double>> variance_interval;
};

/// How to attach uncertainty to scores-only entries:
///   A — empirical: a density fitted from observed repeated-trial data;
///   B — assumed: a parametric sigma family (uniform/triangular/beta);
///   C — bounds: evaluate at both ends of the attainable sigma range,
///       producing a variance interval instead of a point.
enum class Approach { A, B, C };

/// Interpretation of a directly supplied score deviation: `std_dev` squares
/// the number into the variance, `variance` uses it as-is. Both exist
/// because published values of this kind are occasionally ambiguous between
/// the two conventions; pick explicitly, never silently.
enum class SigmaReading { std_dev, variance };

struct AuditConfig {
  std::uint64_t n = 0;  // size of the test record behind each score
  Approach approach = Approach::B;
  std::uint64_t seed = 0;
  /// Bypass the model entirely: attach this score deviation to every entry.
  std::optional<double> fixed_score_sigma;
  SigmaReading reading = SigmaReading::std_dev;
};

/// Attach a score variance to one entry. The entry's score is kept as the
/// mean of Z ~ N(score, score_variance); the n unseen residuals behind the
/// score are allocated as delta_nu² = score² for every nu — the unique
/// allocation recoverable from the published aggregate alone (RMSE² is the
/// mean of delta² when sigma = 0) — unless `deltas` supplies per-nu
/// residuals, in which case deltas.size() must equal cfg.n.
///
/// Approaches A/B draw sigma_nu for nu = 1..n from the model, streaming the
/// four propagation sums in O(1) memory (n up to 10⁹ is fine), and set
/// score_variance to the propagated RMSE variance. Approach C evaluates the
/// homogeneous closed form at sigma_min and sigma_max, sets
/// variance_interval = [low, high] and score_variance to the interval
/// midpoint. With cfg.fixed_score_sigma set, no drawing happens at all.
///
/// Requires cfg.n >= 1 and entry.score > 0.
LeaderboardEntry attach_variance(const LeaderboardEntry& entry, const AuditConfig& cfg,
                                 const UncertaintyModel& model, RngStream& rng,
                                 std::span<const double> deltas = {});

struct AuditResult {
  std::vector<LeaderboardEntry> entries;  // with variances attached
  /// Approaches A/B (and the fixed-sigma bypass): the single matrix.
  std::optional<ErrorMatrix> matrix;
  /// Approach C: matrices at the two interval ends.
  std::optional<ErrorMatrix> matrix_low;
  std::optional<ErrorMatrix> matrix_high;
};

/// Re-audit a whole leaderboard: attach variances to every entry (entry
/// rank indexes the per-entry substream of cfg.seed, so results do not
/// depend on processing order) and build the pairwise error matrix from
/// Z_i = N(score_i, score_variance_i). Requires >= 2 entries.
AuditResult audit(const std::vector<LeaderboardEntry>& entries, const AuditConfig& cfg,
                  const UncertaintyModel& model, bool merge_ties = false,
                  std::span<const double> deltas = {});

}  // namespace uneval
