#include "uneval/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace uneval {

namespace {

void validate(const SimConfig& cfg) {
  if (cfg.users < 1 || cfg.items < 1) {
    throw std::invalid_argument("simulate: need at least one user and one item");
  }
  if (cfg.trials < 1) throw std::invalid_argument("simulate: need at least one trial");
  validate(cfg.scale);
  uneval::validate(cfg.sigma_model);
  if (cfg.mean_model.kind == MeanModelKind::uniform) {
    if (!(cfg.mean_model.lo <= cfg.mean_model.hi) || cfg.mean_model.lo < cfg.scale.min ||
        cfg.mean_model.hi > cfg.scale.max) {
      throw std::invalid_argument("simulate: uniform mean range must sit inside the scale");
    }
  } else {
    if (!(cfg.mean_model.stddev >= 0.0) || !std::isfinite(cfg.mean_model.stddev) ||
        !std::isfinite(cfg.mean_model.mean)) {
      throw std::invalid_argument("simulate: normal mean model needs finite mean and stddev >= 0");
    }
  }
}

std::string padded_label(char prefix, std::uint32_t index, int width) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%c%0*u", prefix, width, index);
  return buf;
}

int digits(std::uint32_t count) {
  int d = 1;
  while (count >= 10) {
    count /= 10;
    ++d;
  }
  return d;
}

double round_half_away(double x) {
  return x >= 0.0 ? std::floor(x + 0.5) : std::ceil(x - 0.5);
}

}  // namespace

SimResult simulate(const SimConfig& cfg) {
  validate(cfg);
  const RngStream root(cfg.seed);
  const int user_width = digits(cfg.users);
  const int item_width = digits(cfg.items);

  SimResult result;
  result.table.scale = cfg.scale;
  result.table.rows.reserve(static_cast<std::size_t>(cfg.users) * cfg.items * cfg.trials);
  result.ground_truth.reserve(static_cast<std::size_t>(cfg.users) * cfg.items);

  for (std::uint32_t u = 0; u < cfg.users; ++u) {
    const std::string user = padded_label('u', u + 1, user_width);
    for (std::uint32_t i = 0; i < cfg.items; ++i) {
      const std::string item = padded_label('i', i + 1, item_width);
      // One substream per (user, item): generation order never matters.
      RngStream stream =
          root.substream(static_cast<std::uint64_t>(u) * cfg.items + i);

      double mu;
      if (cfg.mean_model.kind == MeanModelKind::uniform) {
        mu = stream.uniform(cfg.mean_model.lo, cfg.mean_model.hi);
      } else {
        // Clamped, not rejection-sampled: exactly one draw per mu keeps the
        // stream geometry fixed; the clamp's edge atoms don't matter here.
        mu = std::clamp(stream.normal(cfg.mean_model.mean, cfg.mean_model.stddev),
                        cfg.scale.min, cfg.scale.max);
      }
      const double sigma = draw_sigma_one(cfg.sigma_model, stream);

      for (std::uint32_t t = 1; t <= cfg.trials; ++t) {
        double rating = stream.normal(mu, sigma);
        if (cfg.discretize) {
          rating = std::clamp(rating, cfg.scale.min, cfg.scale.max);
          rating = round_half_away(rating);
          rating = std::clamp(rating, cfg.scale.min, cfg.scale.max);
        }
        result.table.rows.push_back({user, item, t, rating});
      }

      UncertainRating truth;
      truth.user = user;
      truth.item = item;
      truth.density = Gaussian{mu, sigma * sigma};
      truth.trial_count = cfg.trials;
      truth.single_trial = cfg.trials == 1;
      result.ground_truth.push_back(std::move(truth));
    }
  }
  return result;
}

TrialSeriesTable trial_metric_series(const TrialTable& trials, const PredictionTable& predictions,
                                     Metric metric) {
  if (trials.rows.empty()) {
    throw std::invalid_argument("trial_metric_series: empty trial table");
  }

  std::unordered_map<std::string, double> pi;  // "system\0user\0item" -> prediction
  std::set<std::string> systems;
  pi.reserve(predictions.rows.size());
  for (const auto& row : predictions.rows) {
    std::string key = row.system;
    key.push_back('\0');
    key += row.user;
    key.push_back('\0');
    key += row.item;
    pi.emplace(std::move(key), row.prediction);
    systems.insert(row.system);
  }
  if (systems.empty()) {
    throw std::invalid_argument("trial_metric_series: empty prediction table");
  }

  std::map<std::uint32_t, std::vector<const TrialRow*>> by_trial;
  for (const auto& row : trials.rows) by_trial[row.trial].push_back(&row);

  TrialSeriesTable out;
  out.trials.reserve(by_trial.size());
  for (const auto& [t, rows] : by_trial) out.trials.push_back(t);

  std::vector<double> deltas;
  for (const auto& system : systems) {
    TrialSeries series;
    series.system = system;
    series.values.reserve(by_trial.size());
    for (const auto& [t, rows] : by_trial) {
      deltas.clear();
      deltas.reserve(rows.size());
      for (const TrialRow* row : rows) {
        std::string key = system;
        key.push_back('\0');
        key += row->user;
        key.push_back('\0');
        key += row->item;
        const auto it = pi.find(key);
        if (it == pi.end()) {
          throw std::invalid_argument("trial_metric_series: no prediction for (" + system + ", " +
                                      row->user + ", " + row->item + ")");
        }
        deltas.push_back(row->rating - it->second);
      }
      double value = 0.0;
      switch (metric) {
        case Metric::rmse:
          value = point_rmse(deltas);
          break;
        case Metric::mse: {
          double ss = 0.0;
          for (double d : deltas) ss += d * d;
          value = ss / static_cast<double>(deltas.size());
          break;
        }
        case Metric::mae: {
          double sa = 0.0;
          for (double d : deltas) sa += std::fabs(d);
          value = sa / static_cast<double>(deltas.size());
          break;
        }
      }
      series.values.push_back(value);
    }
    out.systems.push_back(std::move(series));
  }
  return out;
}

}  // namespace uneval
