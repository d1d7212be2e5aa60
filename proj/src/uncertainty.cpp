#include "uneval/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace uneval {

void validate(const ScaleBounds& scale) {
  if (!std::isfinite(scale.min) || !std::isfinite(scale.max)) {
    throw std::invalid_argument("scale bounds must be finite");
  }
  if (!(scale.max > scale.min)) {
    throw std::invalid_argument("degenerate scale: max must exceed min");
  }
}

SigmaBounds bound_sigma(const ScaleBounds& scale) {
  validate(scale);
  // A distribution confined to [min, max] maximizes its standard deviation
  // by putting mass 1/2 on each end, giving sigma = (max - min) / 2; the
  // minimum 0 is a rater who always answers the same.
  return {0.0, (scale.max - scale.min) / 2.0};
}

UncertaintyModel UncertaintyModel::uniform_model(double upper, const ScaleBounds& scale) {
  UncertaintyModel m;
  m.kind = SigmaFamily::uniform;
  m.scale = scale;
  m.upper = upper;
  validate(m);
  return m;
}

UncertaintyModel UncertaintyModel::triangular_model(double mode, const ScaleBounds& scale) {
  UncertaintyModel m;
  m.kind = SigmaFamily::triangular;
  m.scale = scale;
  m.mode = mode;
  validate(m);
  return m;
}

UncertaintyModel UncertaintyModel::beta_model(double alpha, double beta,
                                              const ScaleBounds& scale) {
  UncertaintyModel m;
  m.kind = SigmaFamily::beta;
  m.scale = scale;
  m.alpha = alpha;
  m.beta = beta;
  validate(m);
  return m;
}

UncertaintyModel UncertaintyModel::bound_model(BoundEnd end, const ScaleBounds& scale) {
  UncertaintyModel m;
  m.kind = SigmaFamily::bound;
  m.scale = scale;
  m.end = end;
  m.sigma_value = (end == BoundEnd::min) ? bound_sigma(scale).min : bound_sigma(scale).max;
  validate(m);
  return m;
}

UncertaintyModel UncertaintyModel::constant_model(double sigma, const ScaleBounds& scale) {
  UncertaintyModel m;
  m.kind = SigmaFamily::constant;
  m.scale = scale;
  m.sigma_value = sigma;
  validate(m);
  return m;
}

void validate(const UncertaintyModel& model) {
  validate(model.scale);
  const double smax = bound_sigma(model.scale).max;
  switch (model.kind) {
    case SigmaFamily::uniform:
      if (!std::isfinite(model.upper) || model.upper < 0.0 || model.upper > smax) {
        throw std::invalid_argument("uniform sigma model: upper must lie in [0, sigma_max]");
      }
      break;
    case SigmaFamily::triangular:
      if (!std::isfinite(model.mode) || model.mode < 0.0 || model.mode > smax) {
        throw std::invalid_argument("triangular sigma model: mode must lie in [0, sigma_max]");
      }
      break;
    case SigmaFamily::beta:
    case SigmaFamily::empirical_ml:
      if (model.degenerate) {
        if (!std::isfinite(model.sigma_value) || model.sigma_value < 0.0 ||
            model.sigma_value > smax) {
          throw std::invalid_argument("degenerate sigma model: value outside [0, sigma_max]");
        }
        break;
      }
      if (!std::isfinite(model.alpha) || !std::isfinite(model.beta) || model.alpha <= 0.0 ||
          model.beta <= 0.0) {
        throw std::invalid_argument("beta sigma model: alpha and beta must be positive");
      }
      break;
    case SigmaFamily::bound:
      break;  // end enum cannot be invalid; sigma_value set by the factory
    case SigmaFamily::constant:
      if (!std::isfinite(model.sigma_value) || model.sigma_value < 0.0 ||
          model.sigma_value > smax) {
        throw std::invalid_argument("constant sigma model: value outside [0, sigma_max]");
      }
      break;
  }
}

double UncertaintyModel::mean_sigma() const {
  const double smax = sigma_max();
  if (degenerate) return sigma_value;
  switch (kind) {
    case SigmaFamily::uniform:
      return upper / 2.0;
    case SigmaFamily::triangular:
      return (mode + smax) / 3.0;
    case SigmaFamily::beta:
    case SigmaFamily::empirical_ml:
      return smax * alpha / (alpha + beta);
    case SigmaFamily::bound:
    case SigmaFamily::constant:
      return sigma_value;
  }
  return 0.0;
}

double UncertaintyModel::mean_sigma2() const {
  const double smax = sigma_max();
  if (degenerate) return sigma_value * sigma_value;
  switch (kind) {
    case SigmaFamily::uniform:
      return upper * upper / 3.0;
    case SigmaFamily::triangular:
      // Tri(0, c, M): E[X²] = (c² + M² + cM) / 6
      return (mode * mode + smax * smax + mode * smax) / 6.0;
    case SigmaFamily::beta:
    case SigmaFamily::empirical_ml: {
      const double s = alpha + beta;
      return smax * smax * alpha * (alpha + 1.0) / (s * (s + 1.0));
    }
    case SigmaFamily::bound:
    case SigmaFamily::constant:
      return sigma_value * sigma_value;
  }
  return 0.0;
}

double UncertaintyModel::mean_sigma4() const {
  const double smax = sigma_max();
  if (degenerate) return std::pow(sigma_value, 4);
  switch (kind) {
    case SigmaFamily::uniform:
      return std::pow(upper, 4) / 5.0;
    case SigmaFamily::triangular: {
      // Tri(0, c, M) with density 2x/(Mc) on [0,c] and 2(M-x)/(M(M-c)) on
      // [c,M]:
      //   E[X⁴] = c⁵/(3M) + (2/(M(M-c))) [ M(M⁵-c⁵)/5 - (M⁶-c⁶)/6 ]
      // degenerating to M⁴/3 as c -> M (the right-triangular limit).
      const double c = mode, M = smax;
      if (c == M) return std::pow(M, 4) / 3.0;
      const double first = std::pow(c, 5) / (3.0 * M);
      const double second = 2.0 / (M * (M - c)) *
                            (M * (std::pow(M, 5) - std::pow(c, 5)) / 5.0 -
                             (std::pow(M, 6) - std::pow(c, 6)) / 6.0);
      return first + second;
    }
    case SigmaFamily::beta:
    case SigmaFamily::empirical_ml: {
      const double s = alpha + beta;
      double r = std::pow(smax, 4);
      for (int k = 0; k < 4; ++k) r *= (alpha + k) / (s + k);
      return r;
    }
    case SigmaFamily::bound:
    case SigmaFamily::constant:
      return std::pow(sigma_value, 4);
  }
  return 0.0;
}

std::vector<UncertainRating> estimate_from_trials(const TrialTable& trials) {
  if (trials.rows.empty()) {
    throw std::invalid_argument("estimate_from_trials: empty trial table");
  }
  std::vector<const TrialRow*> rows;
  rows.reserve(trials.rows.size());
  for (const auto& r : trials.rows) rows.push_back(&r);
  std::sort(rows.begin(), rows.end(), [](const TrialRow* a, const TrialRow* b) {
    return std::tie(a->user, a->item) < std::tie(b->user, b->item);
  });

  std::vector<UncertainRating> out;
  std::vector<double> group;
  std::size_t i = 0;
  while (i < rows.size()) {
    std::size_t j = i;
    group.clear();
    while (j < rows.size() && rows[j]->user == rows[i]->user && rows[j]->item == rows[i]->item) {
      group.push_back(rows[j]->rating);
      ++j;
    }
    UncertainRating r;
    r.user = rows[i]->user;
    r.item = rows[i]->item;
    r.density = fit_gaussian_ml(group);
    r.trial_count = static_cast<std::uint32_t>(group.size());
    r.single_trial = group.size() == 1;
    out.push_back(std::move(r));
    i = j;
  }
  return out;
}

namespace {

// Bias factors of the ML sigma estimate from T repeated trials of a normal
// variate: T·sigma_hat²/sigma² ~ chi²_{T-1}, hence
//   E[sigma_hat]  = sigma / k1(T),  k1(T) = sqrt(T/2) Γ((T-1)/2) / Γ(T/2)
//   E[sigma_hat²] = sigma² / k2(T), k2(T) = T / (T-1).
double debias_mean_factor(std::uint32_t t) {
  if (t < 2) return 1.0;
  const double td = static_cast<double>(t);
  return std::sqrt(td / 2.0) * std::exp(std::lgamma((td - 1.0) / 2.0) - std::lgamma(td / 2.0));
}

double debias_second_moment_factor(std::uint32_t t) {
  if (t < 2) return 1.0;
  const double td = static_cast<double>(t);
  return td / (td - 1.0);
}

}  // namespace

UncertaintyModel fit_population_sigma(const std::vector<UncertainRating>& ratings,
                                      const ScaleBounds& scale) {
  const double smax = bound_sigma(scale).max;

  double m1 = 0.0, m2 = 0.0;
  std::size_t used = 0;
  bool any_positive = false;
  for (const auto& r : ratings) {
    if (r.single_trial || r.trial_count == 1) continue;  // no variance information
    validate(r.density);
    const double sigma_hat = std::sqrt(r.density.variance);
    m1 += debias_mean_factor(r.trial_count) * sigma_hat;
    m2 += debias_second_moment_factor(r.trial_count) * r.density.variance;
    any_positive = any_positive || sigma_hat > 0.0;
    ++used;
  }
  if (used < 2) {
    throw std::invalid_argument("fit_population_sigma: insufficient data (need >= 2 ratings "
                                "with estimated variance)");
  }

  UncertaintyModel m;
  m.kind = SigmaFamily::empirical_ml;
  m.scale = scale;

  if (!any_positive) {
    // Every estimated variance is zero: the fitted density collapses.
    m.degenerate = true;
    m.sigma_value = 0.0;
    return m;
  }

  m1 /= static_cast<double>(used);
  m2 /= static_cast<double>(used);
  // Moment estimates can wobble slightly past the physical range at small
  // samples; project them back before the moment match.
  m1 = std::clamp(m1, 0.0, smax);
  m2 = std::clamp(m2, 0.0, smax * smax);

  const double x1 = m1 / smax;           // E[sigma/smax]
  const double x2 = m2 / (smax * smax);  // E[(sigma/smax)²]
  double v = x2 - x1 * x1;
  const double vmax = x1 * (1.0 - x1);
  if (v <= 1e-12 || vmax <= 0.0) {
    // No measurable spread in the population: degenerate constant fit.
    m.degenerate = true;
    m.sigma_value = m1;
    return m;
  }
  // A beta density cannot be more dispersed than the two-point extreme;
  // project into the representable region when sampling noise pushes past it.
  v = std::min(v, 0.99 * vmax);

  const double common = vmax / v - 1.0;
  m.alpha = std::max(x1 * common, 1e-6);
  m.beta = std::max((1.0 - x1) * common, 1e-6);
  validate(m);
  return m;
}

namespace {

// Marsaglia-Tsang "a simple method for generating gamma variables" (ACM TOMS
// 26(3), 2000): squeeze-accepted transformation of a normal draw; shape < 1
// handled by the boost Ga(a) = Ga(a+1) · U^(1/a).
double gamma_draw(RngStream& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.uniform01();
    return gamma_draw(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = rng.normal();
    double t = 1.0 + c * x;
    if (t <= 0.0) continue;
    const double v = t * t * t;
    const double u = rng.uniform01();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
  }
}

double beta_draw(RngStream& rng, double alpha, double beta) {
  const double g1 = gamma_draw(rng, alpha);
  const double g2 = gamma_draw(rng, beta);
  return g1 / (g1 + g2);
}

}  // namespace

double draw_sigma_one(const UncertaintyModel& model, RngStream& rng) {
  if (model.degenerate) return model.sigma_value;
  switch (model.kind) {
    case SigmaFamily::uniform:
      return model.upper * rng.uniform01();
    case SigmaFamily::triangular: {
      // Inverse CDF of Tri(0, c, M).
      const double c = model.mode, M = model.sigma_max();
      const double u = rng.uniform01();
      if (u * M < c) return std::sqrt(u * M * c);
      return M - std::sqrt((1.0 - u) * M * (M - c));
    }
    case SigmaFamily::beta:
    case SigmaFamily::empirical_ml:
      return model.sigma_max() * beta_draw(rng, model.alpha, model.beta);
    case SigmaFamily::bound:
    case SigmaFamily::constant:
      return model.sigma_value;
  }
  return 0.0;
}

std::vector<double> draw_sigma(const UncertaintyModel& model, RngStream& rng, std::size_t n) {
  if (n == 0) throw std::invalid_argument("draw_sigma: n must be >= 1");
  validate(model);
  std::vector<double> out(n);
  for (auto& v : out) v = draw_sigma_one(model, rng);
  return out;
}

}  // namespace uneval
