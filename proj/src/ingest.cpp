#include "uneval/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace uneval {

ParseError::ParseError(std::string message, std::size_t line, std::size_t byte_offset)
    : std::runtime_error(std::move(message)), line_(line), byte_offset_(byte_offset) {}

namespace {

std::string loc(std::size_t line) { return "line " + std::to_string(line); }

// Reads logical lines, tracking the 1-based line number and the byte offset
// of each line's first byte. A trailing '\r' is stripped so CRLF and LF
// inputs parse identically (offsets still count the raw bytes).
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& out) {
    if (!std::getline(in_, out)) return false;
    offset_ = next_offset_;
    next_offset_ += out.size() + 1;
    ++line_;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    return true;
  }

  std::size_t line() const { return line_; }
  std::size_t offset() const { return offset_; }

 private:
  std::istream& in_;
  std::size_t line_ = 0;
  std::size_t offset_ = 0;
  std::size_t next_offset_ = 0;
};

std::vector<std::string_view> split_fields(const std::string& line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.emplace_back(line.data() + start, line.size() - start);
      return out;
    }
    out.emplace_back(line.data() + start, comma - start);
    start = comma + 1;
  }
}

bool parse_double_field(std::string_view s, double& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

bool parse_uint_field(std::string_view s, std::uint64_t& out) {
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

void expect_header(LineReader& reader, std::string& buf, const char* expected,
                   const char* what) {
  if (!reader.next(buf)) {
    throw ParseError(std::string(what) + ": empty input, expected header \"" + expected + "\"",
                     1);
  }
  if (buf != expected) {
    throw ParseError(std::string(what) + ": expected header \"" + expected + "\", got \"" + buf +
                     "\" (" + loc(reader.line()) + ")",
                     reader.line(), reader.offset());
  }
}

[[noreturn]] void field_error(const char* what, const char* detail, const LineReader& reader) {
  throw ParseError(std::string(what) + ": " + detail + " (" + loc(reader.line()) + ")",
                   reader.line(), reader.offset());
}

std::string compose_key(std::initializer_list<std::string_view> parts) {
  std::string key;
  for (auto p : parts) {
    key.append(p);
    key.push_back('\0');
  }
  return key;
}

std::string fmt_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

}  // namespace

TrialTable parse_trials(std::istream& in, const ScaleBounds& scale) {
  validate(scale);
  LineReader reader(in);
  std::string buf;
  expect_header(reader, buf, "user,item,trial,rating", "trials");

  TrialTable table;
  table.scale = scale;
  std::unordered_set<std::string> seen;
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    const auto f = split_fields(buf);
    if (f.size() != 4) field_error("trials", "expected 4 comma-separated fields", reader);
    if (f[0].empty() || f[1].empty()) field_error("trials", "empty user or item", reader);
    std::uint64_t trial = 0;
    if (!parse_uint_field(f[2], trial) || trial == 0) {
      field_error("trials", "trial must be a positive integer", reader);
    }
    double rating = 0.0;
    if (!parse_double_field(f[3], rating)) field_error("trials", "malformed rating", reader);
    if (rating < scale.min || rating > scale.max) {
      throw ParseError("trials: rating " + fmt_num(rating) + " outside scale [" +
                       fmt_num(scale.min) + ", " + fmt_num(scale.max) + "] (" +
                       loc(reader.line()) + ")",
                       reader.line(), reader.offset());
    }
    if (!seen.insert(compose_key({f[0], f[1], f[2]})).second) {
      field_error("trials", "duplicate (user, item, trial) key", reader);
    }
    table.rows.push_back({std::string(f[0]), std::string(f[1]),
                          static_cast<std::uint32_t>(trial), rating});
  }
  return table;
}

PredictionTable parse_predictions(std::istream& in) {
  LineReader reader(in);
  std::string buf;
  expect_header(reader, buf, "system,user,item,prediction", "predictions");

  PredictionTable table;
  std::unordered_map<std::string, std::size_t> seen;  // key -> first line
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    const auto f = split_fields(buf);
    if (f.size() != 4) field_error("predictions", "expected 4 comma-separated fields", reader);
    if (f[0].empty() || f[1].empty() || f[2].empty()) {
      field_error("predictions", "empty system, user or item", reader);
    }
    double prediction = 0.0;
    if (!parse_double_field(f[3], prediction)) {
      field_error("predictions", "malformed prediction", reader);
    }
    auto [it, inserted] = seen.emplace(compose_key({f[0], f[1], f[2]}), reader.line());
    if (!inserted) {
      throw ParseError("predictions: duplicate key (" + std::string(f[0]) + ", " +
                       std::string(f[1]) + ", " + std::string(f[2]) + ") at " +
                       loc(reader.line()) + ", first seen at " + loc(it->second),
                       reader.line(), reader.offset());
    }
    table.rows.push_back(
        {std::string(f[0]), std::string(f[1]), std::string(f[2]), prediction});
  }
  return table;
}

std::vector<LeaderboardEntry> parse_leaderboard(std::istream& in,
                                                std::vector<std::string>* warnings) {
  LineReader reader(in);
  std::string buf;
  expect_header(reader, buf, "rank,name,score", "leaderboard");

  std::vector<LeaderboardEntry> entries;
  std::unordered_map<std::uint64_t, std::size_t> seen;  // rank -> first line
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    const auto f = split_fields(buf);
    if (f.size() != 3) field_error("leaderboard", "expected 3 comma-separated fields", reader);
    std::uint64_t rank = 0;
    if (!parse_uint_field(f[0], rank) || rank == 0) {
      field_error("leaderboard", "rank must be a positive integer", reader);
    }
    if (f[1].empty()) field_error("leaderboard", "empty name", reader);
    double score = 0.0;
    if (!parse_double_field(f[2], score)) field_error("leaderboard", "malformed score", reader);
    auto [it, inserted] = seen.emplace(rank, reader.line());
    if (!inserted) {
      throw ParseError("leaderboard: duplicate rank " + std::to_string(rank) + " at " +
                       loc(reader.line()) + ", first seen at " + loc(it->second),
                       reader.line(), reader.offset());
    }
    LeaderboardEntry e;
    e.rank = static_cast<int>(rank);
    e.name = std::string(f[1]);
    e.score = score;
    entries.push_back(std::move(e));
  }
  std::sort(entries.begin(), entries.end(),
            [](const LeaderboardEntry& a, const LeaderboardEntry& b) { return a.rank < b.rank; });
  if (warnings != nullptr) {
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (entries[i - 1].score > entries[i].score) {
        warnings->push_back("leaderboard not monotone: rank " +
                            std::to_string(entries[i - 1].rank) + " (score " +
                            fmt_num(entries[i - 1].score) + ") has a worse score than rank " +
                            std::to_string(entries[i].rank) + " (score " +
                            fmt_num(entries[i].score) + ")");
      }
    }
  }
  return entries;
}

std::vector<SystemDistribution> parse_distributions(std::istream& in) {
  LineReader reader(in);
  std::string buf;
  expect_header(reader, buf, "system,mean,variance", "distributions");

  std::vector<SystemDistribution> out;
  std::unordered_map<std::string, std::size_t> seen;
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    const auto f = split_fields(buf);
    if (f.size() != 3) field_error("distributions", "expected 3 comma-separated fields", reader);
    if (f[0].empty()) field_error("distributions", "empty system", reader);
    double mean = 0.0, variance = 0.0;
    if (!parse_double_field(f[1], mean)) field_error("distributions", "malformed mean", reader);
    if (!parse_double_field(f[2], variance) || variance < 0.0) {
      field_error("distributions", "variance must be a finite number >= 0", reader);
    }
    auto [it, inserted] = seen.emplace(std::string(f[0]), reader.line());
    if (!inserted) {
      throw ParseError("distributions: duplicate system \"" + std::string(f[0]) + "\" at " +
                       loc(reader.line()) + ", first seen at " + loc(it->second),
                       reader.line(), reader.offset());
    }
    out.push_back({std::string(f[0]), Gaussian{mean, variance}});
  }
  return out;
}

std::vector<UncertainRating> parse_rating_densities(std::istream& in) {
  LineReader reader(in);
  std::string buf;
  expect_header(reader, buf, "user,item,mean,sigma", "rating densities");

  std::vector<UncertainRating> out;
  std::unordered_map<std::string, std::size_t> seen;
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    const auto f = split_fields(buf);
    if (f.size() != 4) {
      field_error("rating densities", "expected 4 comma-separated fields", reader);
    }
    if (f[0].empty() || f[1].empty()) field_error("rating densities", "empty user or item", reader);
    double mean = 0.0, sigma = 0.0;
    if (!parse_double_field(f[2], mean)) field_error("rating densities", "malformed mean", reader);
    if (!parse_double_field(f[3], sigma) || sigma < 0.0) {
      field_error("rating densities", "sigma must be a finite number >= 0", reader);
    }
    auto [it, inserted] = seen.emplace(compose_key({f[0], f[1]}), reader.line());
    if (!inserted) {
      throw ParseError("rating densities: duplicate key (" + std::string(f[0]) + ", " +
                       std::string(f[1]) + ") at " + loc(reader.line()) + ", first seen at " +
                       loc(it->second),
                       reader.line(), reader.offset());
    }
    UncertainRating r;
    r.user = std::string(f[0]);
    r.item = std::string(f[1]);
    r.density = Gaussian{mean, sigma * sigma};
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
}

bool valid_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2))) {
    return false;
  }
  const int month = (s[5] - '0') * 10 + (s[6] - '0');
  const int day = (s[8] - '0') * 10 + (s[9] - '0');
  return month >= 1 && month <= 12 && day >= 1 && day <= 31;
}

[[noreturn]] void netflix_error(const char* detail, const LineReader& reader) {
  throw ParseError("training file: " + std::string(detail) + " at byte offset " +
                   std::to_string(reader.offset()) + " (" + loc(reader.line()) + ")",
                   reader.line(), reader.offset());
}

}  // namespace

void parse_netflix_training(std::istream& in,
                            const std::function<void(const NetflixRecord&)>& sink) {
  LineReader reader(in);
  std::string buf;
  bool have_movie = false;
  std::uint64_t movie = 0;
  while (reader.next(buf)) {
    if (buf.empty()) continue;
    if (buf.back() == ':') {
      const std::string_view id(buf.data(), buf.size() - 1);
      std::uint64_t value = 0;
      if (!all_digits(id) || !parse_uint_field(id, value) || value == 0) {
        netflix_error("malformed movie header", reader);
      }
      movie = value;
      have_movie = true;
      continue;
    }
    if (!have_movie) netflix_error("rating line before any movie header", reader);
    const auto f = split_fields(buf);
    if (f.size() != 3) netflix_error("expected user,rating,date", reader);
    std::uint64_t user = 0;
    if (!parse_uint_field(f[0], user) || user == 0) netflix_error("malformed user id", reader);
    std::uint64_t rating = 0;
    if (!parse_uint_field(f[1], rating) || rating < 1 || rating > 5) {
      netflix_error("rating must be an integer in 1..5", reader);
    }
    if (!valid_date(f[2])) netflix_error("malformed date (want YYYY-MM-DD)", reader);
    sink(NetflixRecord{movie, user, static_cast<int>(rating), f[2]});
  }
}

void write_trials(std::ostream& out, const TrialTable& table) {
  out << "user,item,trial,rating\n";
  for (const auto& r : table.rows) {
    out << r.user << ',' << r.item << ',' << r.trial << ',' << fmt_num(r.rating) << '\n';
  }
}

void write_predictions(std::ostream& out, const PredictionTable& table) {
  out << "system,user,item,prediction\n";
  for (const auto& r : table.rows) {
    out << r.system << ',' << r.user << ',' << r.item << ',' << fmt_num(r.prediction) << '\n';
  }
}

void write_leaderboard(std::ostream& out, const std::vector<LeaderboardEntry>& entries) {
  out << "rank,name,score\n";
  for (const auto& e : entries) {
    out << e.rank << ',' << e.name << ',' << fmt_num(e.score) << '\n';
  }
}

void write_distributions(std::ostream& out, const std::vector<SystemDistribution>& systems) {
  out << "system,mean,variance\n";
  for (const auto& s : systems) {
    out << s.system << ',' << fmt_num(s.gaussian.mean) << ',' << fmt_num(s.gaussian.variance)
        << '\n';
  }
}

void write_rating_densities(std::ostream& out, const std::vector<UncertainRating>& ratings) {
  out << "user,item,mean,sigma\n";
  for (const auto& r : ratings) {
    out << r.user << ',' << r.item << ',' << fmt_num(r.density.mean) << ','
        << fmt_num(std::sqrt(r.density.variance)) << '\n';
  }
}

}  // namespace uneval
