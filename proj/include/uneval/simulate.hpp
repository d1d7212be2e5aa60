#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uneval/ingest.hpp"
#include "uneval/propagation.hpp"
#include "uneval/uncertainty.hpp"

namespace uneval {

enum class MeanModelKind { uniform, normal };

/// Distribution of the latent per-(user, item) rating mean mu_nu, confined
/// to the scale: uniform on [lo, hi] (set to the full scale by default), or
/// normal(mean, stddev) clamped to the scale (clamping keeps exactly one
/// draw per mu, so streams stay aligned; the edge atoms it creates are
/// irrelevant to sigma-estimation tests).
struct MeanModel {
  MeanModelKind kind = MeanModelKind::uniform;
  double lo = 1.0;
  double hi = 5.0;
  double mean = 3.0;
  double stddev = 1.0;
};

/// A synthetic repeated-trial rating study: users x items raters/objects,
/// T trials each; each pair gets a latent mu_nu from mean_model and a latent
/// sigma_nu from sigma_model, and each trial rating is one draw from
/// N(mu_nu, sigma_nu²). With discretize on, the draw is clamped to the scale
/// and rounded half-away-from-zero to the nearest integer star (that
/// rounding biases sigma estimates near the scale edges — the gap between a
/// continuous rating model and star-valued reality; continuous mode exists
/// precisely to test the math without the bias).
struct SimConfig {
  std::uint32_t users = 50;
  std::uint32_t items = 20;
  std::uint32_t trials = 5;
  ScaleBounds scale;
  MeanModel mean_model;
  UncertaintyModel sigma_model;
  bool discretize = false;
  std::uint64_t seed = 0;
};

struct SimResult {
  TrialTable table;
  /// The hidden truth behind the table, so tests never re-derive it.
  std::vector<UncertainRating> ground_truth;
};

/// Deterministic in the full config including the seed. Each (user, item)
/// pair draws from substream(user_index * items + item_index) of the root
/// stream, so generation is schedule-independent and parallelizable.
SimResult simulate(const SimConfig& cfg);

struct TrialSeries {
  std::string system;
  std::vector<double> values;  // parallel to TrialSeriesTable::trials
};

/// Per-system, per-trial point metric values.
struct TrialSeriesTable {
  std::vector<std::uint32_t> trials;  // ascending distinct trial indices
  std::vector<TrialSeries> systems;   // ascending by system name
};

/// For every system and every trial t: the point metric over the residuals
/// (rating_{nu,t} - pi_{s,nu}) of the rows observed in trial t. Every
/// (user, item) in the table must have a prediction for every system —
/// otherwise throws naming the first missing (system, user, item).
TrialSeriesTable trial_metric_series(const TrialTable& trials, const PredictionTable& predictions,
                                     Metric metric);

}  // namespace uneval
