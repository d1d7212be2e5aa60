#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "uneval/leaderboard.hpp"
#include "uneval/uncertainty.hpp"

namespace uneval {

/// Parse failure with a location: `line` is 1-based (0 when the format is
/// not line-oriented at the failure point), `byte_offset` is the offset of
/// the offending line's first byte. what() carries the formatted message.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string message, std::size_t line, std::size_t byte_offset = 0);
  std::size_t line() const { return line_; }
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t line_;
  std::size_t byte_offset_;
};

struct PredictionRow {
  std::string system;
  std::string user;
  std::string item;
  double prediction = 0.0;
};

/// Per-system point predictions; (system, user, item) is unique.
struct PredictionTable {
  std::vector<PredictionRow> rows;
};

struct SystemDistribution {
  std::string system;
  Gaussian gaussian;
};

/// One record of the classic rental-history training format (blocks of
/// "<movie_id>:" headers followed by "user,rating,date" lines). `date`
/// points into the parser's line buffer and is only valid during the sink
/// call.
struct NetflixRecord {
  std::uint64_t movie = 0;
  std::uint64_t user = 0;
  int rating = 0;
  std::string_view date;
};

// CSV dialect for all tabular formats: comma separator, mandatory first-line
// header (bit-exact strings below), UTF-8, no quoting — fields must not
// contain commas. CRLF and LF line endings parse identically. Errors carry
// 1-based line numbers.

/// Header "user,item,trial,rating". Ratings must lie within `scale`; trial
/// indices are positive and distinct per (user, item).
TrialTable parse_trials(std::istream& in, const ScaleBounds& scale);

/// Header "system,user,item,prediction". Duplicate (system, user, item)
/// keys are an error naming the first duplicate.
PredictionTable parse_predictions(std::istream& in);

/// Header "rank,name,score". Returns entries sorted by rank. Duplicate
/// ranks are an error. A score that decreases as rank worsens is suspicious
/// but legal: a warning is appended to `warnings` (when given), not thrown.
std::vector<LeaderboardEntry> parse_leaderboard(std::istream& in,
                                                std::vector<std::string>* warnings = nullptr);

/// Header "system,mean,variance". Duplicate systems are an error.
std::vector<SystemDistribution> parse_distributions(std::istream& in);

/// Header "user,item,mean,sigma" (sigma is the standard deviation).
/// Duplicate (user, item) keys are an error. trial_count is left 0:
/// the densities are externally supplied, not estimated here.
std::vector<UncertainRating> parse_rating_densities(std::istream& in);

/// Streaming parse of the rental-history training format: constant memory
/// in the number of records; `sink` is invoked once per rating line.
/// Structure is enforced (a rating line before any movie header, a rating
/// outside 1..5, or a malformed/truncated line is a ParseError naming the
/// byte offset). A header directly followed by another header is a movie
/// with zero ratings — valid.
void parse_netflix_training(std::istream& in,
                            const std::function<void(const NetflixRecord&)>& sink);

// Serializers: exact header + one row per record, numbers at full
// round-trip precision. write(parse(x)) is semantically identical to x.
void write_trials(std::ostream& out, const TrialTable& table);
void write_predictions(std::ostream& out, const PredictionTable& table);
void write_leaderboard(std::ostream& out, const std::vector<LeaderboardEntry>& entries);
void write_distributions(std::ostream& out, const std::vector<SystemDistribution>& systems);
void write_rating_densities(std::ostream& out, const std::vector<UncertainRating>& ratings);

}  // namespace uneval
