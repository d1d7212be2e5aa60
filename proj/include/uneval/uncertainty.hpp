#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "uneval/stats.hpp"

namespace uneval {

/// Inclusive rating-scale bounds, e.g. {1, 5} for a 5-star scale.
struct ScaleBounds {
  double min = 1.0;
  double max = 5.0;
};

/// Throws std::invalid_argument unless max > min and both are finite.
void validate(const ScaleBounds& scale);

struct SigmaBounds {
  double min = 0.0;
  double max = 0.0;
};

/// The attainable range of a rating's standard deviation on a bounded scale:
/// sigma_min = 0 (a perfectly repeatable rater) and sigma_max =
/// (max - min) / 2, attained by the two-point distribution concentrated on
/// the scale ends. Throws on a degenerate scale.
SigmaBounds bound_sigma(const ScaleBounds& scale);

/// One rating modeled as a density: the user's latent opinion of the item is
/// N(density.mean, density.variance), and `predictor` is a system's point
/// prediction for it (unset until an evaluation attaches one).
struct UncertainRating {
  std::string user;
  std::string item;
  Gaussian density;
  std::optional<double> predictor;
  /// Number of repeated trials the density was estimated from; 0 when the
  /// density was supplied externally rather than estimated.
  std::uint32_t trial_count = 0;
  /// True when the density came from a single trial, so its variance is an
  /// imputed 0 rather than an estimate. Lets downstream analyses exclude
  /// such rows.
  bool single_trial = false;
};

/// One observed rating event: user rated item in repeat-trial `trial`.
struct TrialRow {
  std::string user;
  std::string item;
  std::uint32_t trial = 0;
  double rating = 0.0;
};

/// A repeated-trial rating study. Ratings lie within `scale`; trial indices
/// are distinct per (user, item).
struct TrialTable {
  ScaleBounds scale;
  std::vector<TrialRow> rows;
};

enum class SigmaFamily {
  empirical_ml,  // beta density fitted to an observed sigma population
  uniform,       // sigma ~ U[0, upper]
  triangular,    // sigma ~ Tri(0, mode, sigma_max)
  beta,          // sigma/sigma_max ~ Beta(alpha, beta)
  bound,         // sigma fixed at one end of the attainable range
  constant,      // sigma fixed at an arbitrary value (degenerate density)
};

enum class BoundEnd { min, max };

/// A population model for per-rating standard deviations. All families live
/// on [0, sigma_max(scale)]; construction validates the parameters against
/// that range. Use the factories; the raw fields are read-only in spirit.
struct UncertaintyModel {
  SigmaFamily kind = SigmaFamily::uniform;
  ScaleBounds scale;
  double alpha = 0.0;        // beta / empirical_ml
  double beta = 0.0;         // beta / empirical_ml
  double mode = 0.0;         // triangular
  double upper = 0.0;        // uniform
  double sigma_value = 0.0;  // constant (and resolved bound end)
  BoundEnd end = BoundEnd::max;
  /// Set when the model was fitted from data that admitted no spread (e.g.
  /// every estimated variance was zero): draws collapse to sigma_value.
  bool degenerate = false;

  static UncertaintyModel uniform_model(double upper, const ScaleBounds& scale);
  static UncertaintyModel triangular_model(double mode, const ScaleBounds& scale);
  static UncertaintyModel beta_model(double alpha, double beta, const ScaleBounds& scale);
  static UncertaintyModel bound_model(BoundEnd end, const ScaleBounds& scale);
  static UncertaintyModel constant_model(double sigma, const ScaleBounds& scale);

  double sigma_max() const { return bound_sigma(scale).max; }
  /// Population moments of sigma under the model (exact closed forms).
  double mean_sigma() const;
  double mean_sigma2() const;
  double mean_sigma4() const;
};

/// Throws std::invalid_argument when the model's parameters do not define a
/// valid density on [0, sigma_max].
void validate(const UncertaintyModel& model);

/// Collapse a repeated-trial study into one density per (user, item): mean
/// and ML (1/n) variance of that group's ratings. Groups with a single trial
/// get variance 0 and single_trial = true. Output is sorted by (user, item);
/// trial order within a group does not affect the result. Throws on an empty
/// table.
std::vector<UncertainRating> estimate_from_trials(const TrialTable& trials);

/// Fit a population density over the observed per-rating sigma values and
/// return it as an empirical_ml model (a beta density on [0, sigma_max] —
/// sigma is physically confined to that interval, and moment matching on a
/// bounded support wants a bounded family).
///
/// The observed sigma_hat of a rating estimated from T trials is biased:
/// with T·sigma_hat²/sigma² ~ chi²_{T-1},
///   E[sigma_hat]  = sigma · sqrt(2/T) · Γ(T/2) / Γ((T-1)/2)   (≈ 0.841·sigma at T = 5)
///   E[sigma_hat²] = sigma² · (T-1)/T.
/// Before fitting, each rating's contribution is deconvolved with the inverse
/// factors (per its own trial_count); ratings with trial_count = 0 are taken
/// at face value. Single-trial ratings carry no variance information and are
/// excluded.
///
/// Throws when fewer than 2 usable ratings remain; an all-zero sigma
/// population yields a degenerate constant-0 model with the warning flag set
/// rather than an error.
UncertaintyModel fit_population_sigma(const std::vector<UncertainRating>& ratings,
                                      const ScaleBounds& scale);

/// One draw of sigma from the model. Beta draws use the Marsaglia-Tsang
/// gamma sampler; triangular and uniform use inverse-CDF transforms.
double draw_sigma_one(const UncertaintyModel& model, RngStream& rng);

/// n i.i.d. sigma draws; every value lies in [0, sigma_max(scale)].
std::vector<double> draw_sigma(const UncertaintyModel& model, RngStream& rng, std::size_t n);

}  // namespace uneval
