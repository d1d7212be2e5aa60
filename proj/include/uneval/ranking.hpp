#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "uneval/stats.hpp"

namespace uneval {

/// Pairwise ranking-error probabilities between systems whose scores are
/// Gaussian. Systems are ordered ascending by mean (lower score = better
/// rank); at(i, j) for i < j is P(Z_i >= Z_j): the probability that the
/// better-ranked system i would actually score worse than j on a
/// re-evaluation. The diagonal is 0.5 by convention and the lower triangle
/// holds the complement, at(j, i) = 1 - at(i, j).
struct ErrorMatrix {
  std::vector<std::string> labels;
  std::vector<double> p;  // row-major size() = labels²

  double at(std::size_t i, std::size_t j) const { return p[i * labels.size() + j]; }
  double& at(std::size_t i, std::size_t j) { return p[i * labels.size() + j]; }
  std::size_t size() const { return labels.size(); }
};

/// Empirical distribution over complete orderings (labels listed best to
/// worst, i.e. ascending by sampled score). Probabilities sum to 1.
struct OrderDistribution {
  std::vector<std::pair<std::vector<std::string>, double>> orders;
  std::uint64_t samples = 0;
};

/// P(Z1 >= Z2) for independent Gaussian scores, assuming the caller ordered
/// the pair so that z1.mean <= z2.mean (the swap probability of the better
/// system; with the precondition waived the complement identity
/// error_probability(a, b) + error_probability(b, a) = 1 still holds):
///   Phi((mu1 - mu2) / sqrt(sigma1² + sigma2²)).
/// Degenerate pair (both variances 0): 0 when mu1 < mu2, 0.5 on a tie, 1
/// when mu1 > mu2.
double error_probability(const Gaussian& z1, const Gaussian& z2);

/// Build the full pairwise matrix: sorts ascending by mean (stable — ties
/// keep input order) and fills every pair via error_probability. With
/// merge_ties, runs of entries with exactly equal means collapse into one
/// row/column labeled "a/b/..." carrying the first entry's Gaussian.
/// Throws unless at least 2 systems remain.
ErrorMatrix error_matrix(std::vector<std::pair<std::string, Gaussian>> systems,
                         bool merge_ties = false);

/// Monte Carlo distribution over complete orderings: per sample, draw every
/// system's score and record the ascending order. Deterministic under the
/// stream's seed. Guards: 2..10 systems (beyond that the support is
/// factorially large — use the pairwise matrix), samples >= 10'000.
/// Output is sorted by descending probability, ties lexicographic.
OrderDistribution order_probabilities(const std::vector<std::pair<std::string, Gaussian>>& systems,
                                      const RngStream& rng, std::size_t samples);

}  // namespace uneval
