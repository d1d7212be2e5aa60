#include "uneval/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace uneval {

double error_probability(const Gaussian& z1, const Gaussian& z2) {
  validate(z1);
  validate(z2);
  const double var_sum = z1.variance + z2.variance;
  if (var_sum == 0.0) {
    // Point masses: the ranking is certain unless the means tie.
    if (z1.mean < z2.mean) return 0.0;
    if (z1.mean > z2.mean) return 1.0;
    return 0.5;
  }
  return std_normal_cdf((z1.mean - z2.mean) / std::sqrt(var_sum));
}

ErrorMatrix error_matrix(std::vector<std::pair<std::string, Gaussian>> systems,
                         bool merge_ties) {
  if (systems.size() < 2) {
    throw std::invalid_argument("error_matrix: need at least 2 systems");
  }
  std::stable_sort(systems.begin(), systems.end(),
                   [](const auto& a, const auto& b) { return a.second.mean < b.second.mean; });

  if (merge_ties) {
    std::vector<std::pair<std::string, Gaussian>> merged;
    std::size_t i = 0;
    while (i < systems.size()) {
      std::size_t j = i + 1;
      std::string label = systems[i].first;
      while (j < systems.size() && systems[j].second.mean == systems[i].second.mean) {
        label += "/" + systems[j].first;
        ++j;
      }
      // The merged row keeps the first entry's density (ties merge on the
      // mean; variances of tied entries are interchangeable for every
      // pairwise probability against the group).
      merged.emplace_back(std::move(label), systems[i].second);
      i = j;
    }
    systems = std::move(merged);
    if (systems.size() < 2) {
      throw std::invalid_argument("error_matrix: merging ties left fewer than 2 systems");
    }
  }

  const std::size_t k = systems.size();
  ErrorMatrix out;
  out.labels.reserve(k);
  for (const auto& [label, g] : systems) out.labels.push_back(label);
  out.p.assign(k * k, 0.5);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double pij = error_probability(systems[i].second, systems[j].second);
      out.at(i, j) = pij;
      out.at(j, i) = 1.0 - pij;
    }
  }
  return out;
}

OrderDistribution order_probabilities(const std::vector<std::pair<std::string, Gaussian>>& systems,
                                      const RngStream& rng, std::size_t samples) {
  const std::size_t k = systems.size();
  if (k < 2 || k > 10) {
    throw std::invalid_argument("order_probabilities: supports 2..10 systems; for more, use the "
                                "pairwise error matrix");
  }
  if (samples < 10'000) {
    throw std::invalid_argument("order_probabilities: need at least 10000 samples");
  }
  std::vector<double> mean(k), sd(k);
  for (std::size_t i = 0; i < k; ++i) {
    validate(systems[i].second);
    mean[i] = systems[i].second.mean;
    sd[i] = std::sqrt(systems[i].second.variance);
  }

  RngStream stream = rng.substream(0);
  std::vector<double> value(k);
  std::vector<int> perm(k);
  std::map<std::vector<int>, std::uint64_t> counts;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t i = 0; i < k; ++i) value[i] = mean[i] + sd[i] * stream.normal();
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return value[a] < value[b]; });
    ++counts[perm];
  }

  OrderDistribution out;
  out.samples = samples;
  out.orders.reserve(counts.size());
  for (const auto& [order, count] : counts) {
    std::vector<std::string> labels;
    labels.reserve(k);
    for (int idx : order) labels.push_back(systems[static_cast<std::size_t>(idx)].first);
    out.orders.emplace_back(std::move(labels),
                            static_cast<double>(count) / static_cast<double>(samples));
  }
  std::stable_sort(out.orders.begin(), out.orders.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return out;
}

}  // namespace uneval
