#include "uneval/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uneval/ingest.hpp"
#include "uneval/leaderboard.hpp"
#include "uneval/propagation.hpp"
#include "uneval/ranking.hpp"
#include "uneval/report.hpp"
#include "uneval/simulate.hpp"
#include "uneval/version.hpp"

namespace uneval {
namespace {

using nlohmann::ordered_json;

/// User-facing misuse distinct from data-file ParseError; both exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOpts {
  std::string format = "json";
  std::string out_path;
  bool strict = false;
  std::uint64_t seed_value = 0;
  CLI::Option* seed_opt = nullptr;
  std::vector<std::string> info_warnings;
  std::vector<std::string> degeneracy_warnings;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--format", c.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->add_option("--out", c.out_path, "Write the report to this file instead of stdout");
  c.seed_opt = cmd->add_option("--seed", c.seed_value,
                               "Root RNG seed (fallback: UNCERTAIN_EVAL_SEED)");
  cmd->add_flag("--strict", c.strict,
                "Exit with code 3 when a numerical degeneracy warning fires");
}

std::optional<std::uint64_t> resolve_seed(const CommonOpts& c) {
  if (c.seed_opt != nullptr && c.seed_opt->count() > 0) return c.seed_value;
  if (const char* env = std::getenv("UNCERTAIN_EVAL_SEED")) {
    const std::string_view sv(env);
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), v);
    if (ec != std::errc{} || ptr != sv.data() + sv.size()) {
      throw UsageError("UNCERTAIN_EVAL_SEED is not an unsigned integer: " + std::string(env));
    }
    return v;
  }
  return std::nullopt;
}

std::uint64_t require_seed(const CommonOpts& c) {
  const auto seed = resolve_seed(c);
  if (!seed.has_value()) {
    throw UsageError("this command draws random numbers; pass --seed or set UNCERTAIN_EVAL_SEED");
  }
  return *seed;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file: " + path);
  return in;
}

int emit_report(const Report& report, const CommonOpts& c) {
  const std::string text = c.format == "csv" ? render_csv(report) : render_json(report);
  if (c.out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(c.out_path, std::ios::binary);
    if (!out) throw UsageError("cannot write output file: " + c.out_path);
    out << text;
  }
  for (const auto& w : c.info_warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : c.degeneracy_warnings) std::cerr << "warning: " << w << '\n';
  if (c.strict && !c.degeneracy_warnings.empty()) {
    std::cerr << "error: numerical degeneracy escalated by --strict\n";
    return 3;
  }
  return 0;
}

Metric parse_metric(const std::string& name) {
  if (name == "rmse") return Metric::rmse;
  if (name == "mse") return Metric::mse;
  if (name == "mae") return Metric::mae;
  throw UsageError("unknown metric: " + name);
}

ordered_json dist_json(const MetricDistribution& d) {
  ordered_json j;
  j["method"] = to_string(d.method);
  j["n"] = d.n;
  j["mean"] = d.gaussian.mean;
  j["variance"] = d.gaussian.variance;
  j["mc_samples"] = d.mc_samples;
  j["degenerate"] = d.degenerate;
  j["clt_approx"] = d.clt_approx;
  return j;
}

ordered_json matrix_json(const ErrorMatrix& m) {
  ordered_json j;
  j["labels"] = m.labels;
  ordered_json rows = ordered_json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    ordered_json row = ordered_json::array();
    for (std::size_t k = 0; k < m.size(); ++k) row.push_back(m.at(i, k));
    rows.push_back(std::move(row));
  }
  j["p"] = std::move(rows);
  return j;
}

// ---- sigma-model flags shared by `audit` (approach B) and `simulate` ----

struct ModelOpts {
  std::string family = "uniform";
  double upper = 0.0;
  double mode = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma_value = 0.0;
  std::string end = "max";
  CLI::Option* upper_opt = nullptr;
  CLI::Option* mode_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* beta_opt = nullptr;
  CLI::Option* sigma_value_opt = nullptr;
};

void add_model_opts(CLI::App* cmd, ModelOpts& m) {
  cmd->add_option("--family", m.family, "Sigma population family")
      ->check(CLI::IsMember({"uniform", "triangular", "beta", "bound", "constant"}))
      ->capture_default_str();
  m.upper_opt =
      cmd->add_option("--u-max", m.upper, "Uniform family upper end (default: sigma_max)");
  m.mode_opt =
      cmd->add_option("--mode", m.mode, "Triangular family mode (default: sigma_max / 2)");
  m.alpha_opt = cmd->add_option("--alpha", m.alpha, "Beta family alpha");
  m.beta_opt = cmd->add_option("--beta", m.beta, "Beta family beta");
  m.sigma_value_opt =
      cmd->add_option("--sigma-value", m.sigma_value, "Constant family sigma value");
  cmd->add_option("--end", m.end, "Bound family end")
      ->check(CLI::IsMember({"min", "max"}))
      ->capture_default_str();
}

UncertaintyModel build_model(const ModelOpts& m, const ScaleBounds& scale) {
  const double smax = bound_sigma(scale).max;
  if (m.family == "uniform") {
    return UncertaintyModel::uniform_model(m.upper_opt->count() > 0 ? m.upper : smax, scale);
  }
  if (m.family == "triangular") {
    return UncertaintyModel::triangular_model(m.mode_opt->count() > 0 ? m.mode : smax / 2.0,
                                              scale);
  }
  if (m.family == "beta") {
    if (m.alpha_opt->count() == 0 || m.beta_opt->count() == 0) {
      throw UsageError("the beta family needs --alpha and --beta");
    }
    return UncertaintyModel::beta_model(m.alpha, m.beta, scale);
  }
  if (m.family == "bound") {
    return UncertaintyModel::bound_model(m.end == "min" ? BoundEnd::min : BoundEnd::max, scale);
  }
  if (m.family == "constant") {
    if (m.sigma_value_opt->count() == 0) {
      throw UsageError("the constant family needs --sigma-value");
    }
    return UncertaintyModel::constant_model(m.sigma_value, scale);
  }
  throw UsageError("unknown sigma family: " + m.family);
}

ordered_json model_options_json(const ModelOpts& m) {
  ordered_json j;
  j["family"] = m.family;
  if (m.upper_opt->count() > 0) j["u-max"] = m.upper;
  if (m.mode_opt->count() > 0) j["mode"] = m.mode;
  if (m.alpha_opt->count() > 0) j["alpha"] = m.alpha;
  if (m.beta_opt->count() > 0) j["beta"] = m.beta;
  if (m.sigma_value_opt->count() > 0) j["sigma-value"] = m.sigma_value;
  j["end"] = m.end;
  return j;
}

// ---- shared evaluation pipeline (eval, rank) ----

std::string pair_key(const std::string& user, const std::string& item) {
  std::string key = user;
  key.push_back('\0');
  key += item;
  return key;
}

std::vector<UncertainRating> load_ratings(const std::string& path, const std::string& format,
                                          const ScaleBounds& scale) {
  auto in = open_input(path);
  if (format == "trials") return estimate_from_trials(parse_trials(in, scale));
  return parse_rating_densities(in);
}

struct SystemEval {
  std::string system;
  std::optional<MetricDistribution> analytic;
  std::optional<MetricDistribution> mc;
};

std::vector<SystemEval> evaluate_systems(const std::vector<UncertainRating>& ratings,
                                         const PredictionTable& predictions, Metric metric,
                                         std::uint64_t mc_samples, std::uint64_t seed,
                                         std::vector<std::string>& degeneracy_warnings) {
  if (ratings.empty()) throw UsageError("rating input has no rows");
  std::map<std::string, std::unordered_map<std::string, double>> by_system;
  for (const auto& row : predictions.rows) {
    by_system[row.system][pair_key(row.user, row.item)] = row.prediction;
  }
  if (by_system.empty()) throw UsageError("prediction input has no rows");

  const RngStream root(seed);
  std::vector<SystemEval> out;
  std::uint64_t index = 0;
  for (const auto& [system, preds] : by_system) {
    std::vector<UncertainRating> rs = ratings;
    for (auto& r : rs) {
      const auto it = preds.find(pair_key(r.user, r.item));
      if (it == preds.end()) {
        throw UsageError("no prediction for (" + system + ", " + r.user + ", " + r.item + ")");
      }
      r.predictor = it->second;
    }
    SystemEval e;
    e.system = system;
    if (metric != Metric::mae) {
      e.analytic = metric == Metric::rmse ? rmse_distribution(rs) : mse_distribution(rs);
      if (e.analytic->degenerate) {
        degeneracy_warnings.push_back("system " + system +
                                      ": all sigma and residuals are zero; the metric "
                                      "distribution is a point mass at 0");
      }
    }
    if (mc_samples > 0) {
      e.mc = mc_metric_distribution(rs, metric, root.substream(index), mc_samples);
    }
    ++index;
    out.push_back(std::move(e));
  }
  return out;
}

// ---- eval ----

struct EvalOpts {
  CommonOpts common;
  std::string ratings_path;
  std::string predictions_path;
  std::string ratings_format = "trials";
  std::string metric = "rmse";
  std::uint64_t mc = 0;
  double scale_min = 1.0;
  double scale_max = 5.0;
};

int run_eval(EvalOpts& o) {
  const ScaleBounds scale{o.scale_min, o.scale_max};
  const Metric metric = parse_metric(o.metric);
  if (metric == Metric::mae && o.mc == 0) {
    throw UsageError("mae has no analytic distribution; pass --mc <samples>");
  }
  std::optional<std::uint64_t> seed;
  if (o.mc > 0) seed = require_seed(o.common);

  const auto ratings = load_ratings(o.ratings_path, o.ratings_format, scale);
  auto predictions_in = open_input(o.predictions_path);
  const auto predictions = parse_predictions(predictions_in);
  const auto systems = evaluate_systems(ratings, predictions, metric, o.mc, seed.value_or(0),
                                        o.common.degeneracy_warnings);

  ordered_json payload;
  payload["metric"] = o.metric;
  ordered_json sys_json = ordered_json::array();
  for (const auto& e : systems) {
    ordered_json j;
    j["system"] = e.system;
    j["analytic"] = e.analytic ? dist_json(*e.analytic) : ordered_json(nullptr);
    j["monte_carlo"] = e.mc ? dist_json(*e.mc) : ordered_json(nullptr);
    sys_json.push_back(std::move(j));
  }
  payload["systems"] = std::move(sys_json);

  ordered_json options;
  options["metric"] = o.metric;
  options["ratings-format"] = o.ratings_format;
  options["mc"] = o.mc;
  options["scale"] = {o.scale_min, o.scale_max};
  Report report{"metric-distribution", std::move(payload),
                make_metadata("eval",
                              {{"ratings", o.ratings_path}, {"predictions", o.predictions_path}},
                              options, seed)};
  return emit_report(report, o.common);
}

// ---- rank ----

struct RankOpts {
  CommonOpts common;
  std::string distributions_path;
  std::string ratings_path;
  std::string predictions_path;
  std::string ratings_format = "trials";
  std::string metric = "rmse";
  std::uint64_t mc = 0;
  std::uint64_t orders = 0;
  bool merge_ties = false;
  double scale_min = 1.0;
  double scale_max = 5.0;
};

int run_rank(RankOpts& o) {
  std::vector<std::pair<std::string, Gaussian>> systems;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::optional<std::uint64_t> seed;

  const bool needs_draws = o.orders > 0 || (!o.distributions_path.empty() ? false : o.mc > 0) ||
                           (o.distributions_path.empty() && o.metric == "mae");
  if (needs_draws) seed = require_seed(o.common);

  if (!o.distributions_path.empty()) {
    if (!o.ratings_path.empty() || !o.predictions_path.empty()) {
      throw UsageError("pass either --distributions or --ratings/--predictions, not both");
    }
    auto in = open_input(o.distributions_path);
    for (const auto& d : parse_distributions(in)) systems.emplace_back(d.system, d.gaussian);
    inputs.emplace_back("distributions", o.distributions_path);
  } else {
    if (o.ratings_path.empty() || o.predictions_path.empty()) {
      throw UsageError("pass --distributions, or --ratings and --predictions");
    }
    const ScaleBounds scale{o.scale_min, o.scale_max};
    const Metric metric = parse_metric(o.metric);
    if (metric == Metric::mae && o.mc == 0) {
      throw UsageError("mae has no analytic distribution; pass --mc <samples>");
    }
    const auto ratings = load_ratings(o.ratings_path, o.ratings_format, scale);
    auto predictions_in = open_input(o.predictions_path);
    const auto predictions = parse_predictions(predictions_in);
    const auto evals = evaluate_systems(ratings, predictions, metric, o.mc, seed.value_or(0),
                                        o.common.degeneracy_warnings);
    for (const auto& e : evals) {
      const MetricDistribution& d = e.analytic ? *e.analytic : *e.mc;
      systems.emplace_back(e.system, d.gaussian);
    }
    inputs.emplace_back("ratings", o.ratings_path);
    inputs.emplace_back("predictions", o.predictions_path);
  }

  const ErrorMatrix matrix = error_matrix(systems, o.merge_ties);

  ordered_json payload;
  payload["matrix"] = matrix_json(matrix);
  if (o.orders > 0) {
    const RngStream root(*seed);
    const OrderDistribution dist = order_probabilities(systems, root.substream(1'000'000), o.orders);
    ordered_json orders = ordered_json::array();
    for (const auto& [order, p] : dist.orders) {
      ordered_json row;
      row["order"] = order;
      row["p"] = p;
      orders.push_back(std::move(row));
    }
    ordered_json od;
    od["samples"] = dist.samples;
    od["orders"] = std::move(orders);
    payload["order_distribution"] = std::move(od);
  }

  ordered_json options;
  options["metric"] = o.metric;
  options["mc"] = o.mc;
  options["orders"] = o.orders;
  options["merge-ties"] = o.merge_ties;
  Report report{"error-matrix", std::move(payload),
                make_metadata("rank", inputs, options, seed)};
  return emit_report(report, o.common);
}

// ---- audit ----

struct AuditOpts {
  CommonOpts common;
  std::string leaderboard_path;
  std::uint64_t n = 0;
  std::string approach;
  ModelOpts model;
  std::string trials_path;
  double sigma = 0.0;
  CLI::Option* sigma_opt = nullptr;
  std::string sigma_reading = "std";
  std::string delta_path;
  bool merge_ties = false;
  double scale_min = 1.0;
  double scale_max = 5.0;
};

std::vector<double> load_deltas(const std::string& path) {
  auto in = open_input(path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size() || !std::isfinite(v)) {
      throw ParseError("residual file: malformed number (line " + std::to_string(line_no) + ")",
                       line_no);
    }
    out.push_back(v);
  }
  return out;
}

int run_audit(AuditOpts& o) {
  const ScaleBounds scale{o.scale_min, o.scale_max};
  auto leaderboard_in = open_input(o.leaderboard_path);
  const auto entries = parse_leaderboard(leaderboard_in, &o.common.info_warnings);

  std::vector<double> deltas;
  if (!o.delta_path.empty()) deltas = load_deltas(o.delta_path);

  AuditConfig cfg;
  cfg.n = o.n;
  UncertaintyModel model = UncertaintyModel::constant_model(0.0, scale);
  std::optional<std::uint64_t> seed;
  std::string approach_label;
  std::vector<std::pair<std::string, std::string>> inputs{{"leaderboard", o.leaderboard_path}};
  if (!o.delta_path.empty()) inputs.emplace_back("deltas", o.delta_path);

  if (o.sigma_opt->count() > 0) {
    cfg.fixed_score_sigma = o.sigma;
    cfg.reading = o.sigma_reading == "std" ? SigmaReading::std_dev : SigmaReading::variance;
    approach_label = "fixed-sigma";
  } else if (o.approach == "A") {
    if (o.trials_path.empty()) {
      throw UsageError("approach A fits the sigma population from data; pass --trials");
    }
    auto trials_in = open_input(o.trials_path);
    const auto ratings = estimate_from_trials(parse_trials(trials_in, scale));
    model = fit_population_sigma(ratings, scale);
    if (model.degenerate) {
      o.common.degeneracy_warnings.push_back(
          "fitted sigma population has no spread; every draw returns " +
          fmt_double(model.sigma_value));
    }
    cfg.approach = Approach::A;
    seed = require_seed(o.common);
    cfg.seed = *seed;
    approach_label = "A";
    inputs.emplace_back("trials", o.trials_path);
  } else if (o.approach == "B") {
    model = build_model(o.model, scale);
    cfg.approach = Approach::B;
    seed = require_seed(o.common);
    cfg.seed = *seed;
    approach_label = "B";
  } else if (o.approach == "C") {
    model = UncertaintyModel::bound_model(BoundEnd::max, scale);
    cfg.approach = Approach::C;
    approach_label = "C";
  } else {
    throw UsageError("pass --approach A|B|C or a direct --sigma");
  }

  const AuditResult result = audit(entries, cfg, model, o.merge_ties, deltas);

  ordered_json payload;
  payload["n"] = o.n;
  payload["approach"] = approach_label;
  if (approach_label == "fixed-sigma") payload["sigma-reading"] = o.sigma_reading;
  ordered_json entries_json = ordered_json::array();
  for (const auto& e : result.entries) {
    ordered_json j;
    j["rank"] = e.rank;
    j["name"] = e.name;
    j["score"] = e.score;
    j["score_variance"] = *e.score_variance;
    if (e.variance_interval) {
      j["variance_low"] = e.variance_interval->first;
      j["variance_high"] = e.variance_interval->second;
    }
    entries_json.push_back(std::move(j));
  }
  payload["entries"] = std::move(entries_json);
  if (result.matrix) payload["matrix"] = matrix_json(*result.matrix);
  if (result.matrix_low) payload["matrix_low"] = matrix_json(*result.matrix_low);
  if (result.matrix_high) payload["matrix_high"] = matrix_json(*result.matrix_high);

  ordered_json options;
  options["n"] = o.n;
  options["approach"] = approach_label;
  if (o.sigma_opt->count() > 0) {
    options["sigma"] = o.sigma;
    options["sigma-reading"] = o.sigma_reading;
  }
  if (o.approach == "B") options["model"] = model_options_json(o.model);
  options["merge-ties"] = o.merge_ties;
  options["scale"] = {o.scale_min, o.scale_max};
  Report report{"error-matrix", std::move(payload), make_metadata("audit", inputs, options, seed)};
  return emit_report(report, o.common);
}

// ---- simulate ----

struct SimulateOpts {
  CommonOpts common;
  std::uint32_t users = 50;
  std::uint32_t items = 20;
  std::uint32_t trials = 5;
  double scale_min = 1.0;
  double scale_max = 5.0;
  std::string mean_dist = "uniform";
  double mean_lo = 0.0;
  double mean_hi = 0.0;
  CLI::Option* mean_lo_opt = nullptr;
  CLI::Option* mean_hi_opt = nullptr;
  double mean = 3.0;
  double mean_sd = 1.0;
  ModelOpts model;
  bool discretize = false;
  std::string out_dir;
};

int run_simulate(SimulateOpts& o) {
  SimConfig cfg;
  cfg.users = o.users;
  cfg.items = o.items;
  cfg.trials = o.trials;
  cfg.scale = ScaleBounds{o.scale_min, o.scale_max};
  cfg.discretize = o.discretize;
  cfg.seed = require_seed(o.common);
  if (o.mean_dist == "uniform") {
    cfg.mean_model.kind = MeanModelKind::uniform;
    cfg.mean_model.lo = o.mean_lo_opt->count() > 0 ? o.mean_lo : cfg.scale.min;
    cfg.mean_model.hi = o.mean_hi_opt->count() > 0 ? o.mean_hi : cfg.scale.max;
  } else {
    cfg.mean_model.kind = MeanModelKind::normal;
    cfg.mean_model.mean = o.mean;
    cfg.mean_model.stddev = o.mean_sd;
  }
  cfg.sigma_model = build_model(o.model, cfg.scale);

  const SimResult result = simulate(cfg);

  namespace fs = std::filesystem;
  fs::create_directories(o.out_dir);
  const std::string trials_path = (fs::path(o.out_dir) / "trials.csv").string();
  const std::string truth_path = (fs::path(o.out_dir) / "ground_truth.csv").string();
  {
    std::ofstream out(trials_path, std::ios::binary);
    if (!out) throw UsageError("cannot write output file: " + trials_path);
    write_trials(out, result.table);
  }
  {
    std::ofstream out(truth_path, std::ios::binary);
    if (!out) throw UsageError("cannot write output file: " + truth_path);
    write_rating_densities(out, result.ground_truth);
  }

  ordered_json payload;
  payload["users"] = o.users;
  payload["items"] = o.items;
  payload["trials"] = o.trials;
  payload["rows"] = result.table.rows.size();
  payload["trials_file"] = trials_path;
  payload["truth_file"] = truth_path;

  ordered_json options;
  options["scale"] = {o.scale_min, o.scale_max};
  options["mean-dist"] = o.mean_dist;
  options["discretize"] = o.discretize;
  options["model"] = model_options_json(o.model);
  Report report{"simulation", std::move(payload),
                make_metadata("simulate", {}, options, cfg.seed)};
  return emit_report(report, o.common);
}

// ---- trials ----

struct TrialsOpts {
  CommonOpts common;
  std::string trials_path;
  std::string predictions_path;
  std::string metric = "rmse";
  std::size_t bins = 10;
  double scale_min = 1.0;
  double scale_max = 5.0;
};

int run_trials(TrialsOpts& o) {
  const ScaleBounds scale{o.scale_min, o.scale_max};
  const Metric metric = parse_metric(o.metric);
  auto trials_in = open_input(o.trials_path);
  const auto table = parse_trials(trials_in, scale);
  auto predictions_in = open_input(o.predictions_path);
  const auto predictions = parse_predictions(predictions_in);

  const TrialSeriesTable series = trial_metric_series(table, predictions, metric);

  ordered_json payload;
  payload["metric"] = o.metric;
  payload["bins"] = o.bins;
  payload["trials"] = series.trials;
  ordered_json systems = ordered_json::array();
  for (const auto& s : series.systems) {
    const Histogram h = make_histogram(s.values, o.bins);
    ordered_json j;
    j["system"] = s.system;
    j["values"] = s.values;
    ordered_json hist;
    hist["edges"] = h.bin_edges;
    hist["counts"] = h.counts;
    j["histogram"] = std::move(hist);
    systems.push_back(std::move(j));
  }
  payload["systems"] = std::move(systems);

  ordered_json options;
  options["metric"] = o.metric;
  options["bins"] = o.bins;
  options["scale"] = {o.scale_min, o.scale_max};
  Report report{"histogram", std::move(payload),
                make_metadata("trials",
                              {{"trials", o.trials_path}, {"predictions", o.predictions_path}},
                              options, std::nullopt)};
  return emit_report(report, o.common);
}

// ---- sweep ----

struct SweepOpts {
  CommonOpts common;
  std::string n_grid;
  std::string sigma_grid;
  double delta = 0.0;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, comma - start));
    start = comma + 1;
  }
  return out;
}

std::vector<std::uint64_t> parse_n_grid(const std::string& s) {
  std::vector<std::uint64_t> out;
  for (const auto& item : split_list(s)) {
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || v == 0) {
      throw UsageError("--n-grid: not a positive integer: \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--n-grid: empty grid");
  return out;
}

std::vector<double> parse_sigma_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc{} || ptr != item.data() + item.size() || !std::isfinite(v) || v < 0.0) {
      throw UsageError("--sigma-grid: not a number >= 0: \"" + item + "\"");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError("--sigma-grid: empty grid");
  return out;
}

int run_sweep(SweepOpts& o) {
  const auto ns = parse_n_grid(o.n_grid);
  const auto sigmas = parse_sigma_grid(o.sigma_grid);
  if (!std::isfinite(o.delta)) throw UsageError("--delta must be finite");

  ordered_json rows = ordered_json::array();
  bool degenerate_seen = false;
  for (const std::uint64_t n : ns) {
    for (const double sigma : sigmas) {
      // Homogeneous closed form: n ratings all sharing (sigma, delta).
      PropagationSums sums;
      sums.n = n;
      const double nd = static_cast<double>(n);
      const double s2 = sigma * sigma;
      const double d2 = o.delta * o.delta;
      sums.sigma2 = nd * s2;
      sums.sigma4 = nd * s2 * s2;
      sums.sigma2_delta2 = nd * s2 * d2;
      sums.delta2 = nd * d2;
      const MetricDistribution dist = rmse_from_sums(sums);
      degenerate_seen = degenerate_seen || dist.degenerate;
      ordered_json row;
      row["n"] = n;
      row["sigma"] = sigma;
      row["variance"] = dist.gaussian.variance;
      rows.push_back(std::move(row));
    }
  }
  if (degenerate_seen) {
    o.common.degeneracy_warnings.push_back(
        "grid contains sigma = 0 with delta = 0: the metric distribution degenerates to a "
        "point mass at 0");
  }

  ordered_json payload;
  payload["delta"] = o.delta;
  payload["rows"] = std::move(rows);
  ordered_json options;
  options["n-grid"] = o.n_grid;
  options["sigma-grid"] = o.sigma_grid;
  options["delta"] = o.delta;
  Report report{"sweep", std::move(payload), make_metadata("sweep", {}, options, std::nullopt)};
  return emit_report(report, o.common);
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Rating-uncertainty evaluation: metric distributions, ranking-error "
               "probabilities, and leaderboard audits"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  int code = 0;

  auto eval_opts = std::make_shared<EvalOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "eval", "Propagate rating uncertainty into a metric distribution per system");
    cmd->add_option("--ratings", eval_opts->ratings_path, "Ratings input file")->required();
    cmd->add_option("--ratings-format", eval_opts->ratings_format,
                    "trials (user,item,trial,rating) or densities (user,item,mean,sigma)")
        ->check(CLI::IsMember({"trials", "densities"}))
        ->capture_default_str();
    cmd->add_option("--predictions", eval_opts->predictions_path,
                    "Predictions file (system,user,item,prediction)")
        ->required();
    cmd->add_option("--metric", eval_opts->metric, "rmse, mse, or mae (mae needs --mc)")
        ->check(CLI::IsMember({"rmse", "mse", "mae"}))
        ->capture_default_str();
    cmd->add_option("--mc", eval_opts->mc, "Add a Monte Carlo estimate with this many samples");
    cmd->add_option("--scale-min", eval_opts->scale_min, "Rating scale lower bound")
        ->capture_default_str();
    cmd->add_option("--scale-max", eval_opts->scale_max, "Rating scale upper bound")
        ->capture_default_str();
    add_common(cmd, eval_opts->common);
    cmd->callback([&code, eval_opts] { code = run_eval(*eval_opts); });
  }

  auto rank_opts = std::make_shared<RankOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "rank", "Pairwise ranking-error matrix between systems (and order probabilities)");
    cmd->add_option("--distributions", rank_opts->distributions_path,
                    "Score distributions file (system,mean,variance)");
    cmd->add_option("--ratings", rank_opts->ratings_path, "Ratings input file");
    cmd->add_option("--ratings-format", rank_opts->ratings_format,
                    "trials or densities (with --ratings)")
        ->check(CLI::IsMember({"trials", "densities"}))
        ->capture_default_str();
    cmd->add_option("--predictions", rank_opts->predictions_path, "Predictions file");
    cmd->add_option("--metric", rank_opts->metric, "Metric when evaluating from ratings")
        ->check(CLI::IsMember({"rmse", "mse", "mae"}))
        ->capture_default_str();
    cmd->add_option("--mc", rank_opts->mc, "Monte Carlo samples (required for mae)");
    cmd->add_option("--orders", rank_opts->orders,
                    "Also estimate complete-order probabilities with this many samples");
    cmd->add_flag("--merge-ties", rank_opts->merge_ties,
                  "Merge systems with exactly equal means into one row");
    cmd->add_option("--scale-min", rank_opts->scale_min, "Rating scale lower bound")
        ->capture_default_str();
    cmd->add_option("--scale-max", rank_opts->scale_max, "Rating scale upper bound")
        ->capture_default_str();
    add_common(cmd, rank_opts->common);
    cmd->callback([&code, rank_opts] { code = run_rank(*rank_opts); });
  }

  auto audit_opts = std::make_shared<AuditOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "audit", "Attach score variances to a scores-only leaderboard and rank reliability");
    cmd->add_option("--leaderboard", audit_opts->leaderboard_path,
                    "Leaderboard file (rank,name,score)")
        ->required();
    cmd->add_option("--n", audit_opts->n, "Number of test ratings behind each score")
        ->required()
        ->check(CLI::PositiveNumber);
    cmd->add_option("--approach", audit_opts->approach,
                    "A (fit from --trials), B (--family ...), or C (bound interval)")
        ->check(CLI::IsMember({"A", "B", "C"}));
    cmd->add_option("--trials", audit_opts->trials_path,
                    "Repeated-trial ratings used by approach A");
    add_model_opts(cmd, audit_opts->model);
    audit_opts->sigma_opt = cmd->add_option(
        "--sigma", audit_opts->sigma, "Directly attach this score deviation to every entry");
    cmd->add_option("--sigma-reading", audit_opts->sigma_reading,
                    "Read --sigma as a std deviation or as a variance")
        ->check(CLI::IsMember({"std", "variance"}))
        ->capture_default_str();
    cmd->add_option("--delta-file", audit_opts->delta_path,
                    "Per-rating residuals, one number per line (exactly n values)");
    cmd->add_flag("--merge-ties", audit_opts->merge_ties,
                  "Merge entries with exactly equal scores into one row");
    cmd->add_option("--scale-min", audit_opts->scale_min, "Rating scale lower bound")
        ->capture_default_str();
    cmd->add_option("--scale-max", audit_opts->scale_max, "Rating scale upper bound")
        ->capture_default_str();
    add_common(cmd, audit_opts->common);
    cmd->callback([&code, audit_opts] { code = run_audit(*audit_opts); });
  }

  auto sim_opts = std::make_shared<SimulateOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "simulate", "Generate a synthetic repeated-trial study with known ground truth");
    cmd->add_option("--users", sim_opts->users, "Number of users")->capture_default_str();
    cmd->add_option("--items", sim_opts->items, "Number of items")->capture_default_str();
    cmd->add_option("--trials", sim_opts->trials, "Trials per (user, item)")
        ->capture_default_str();
    cmd->add_option("--scale-min", sim_opts->scale_min, "Rating scale lower bound")
        ->capture_default_str();
    cmd->add_option("--scale-max", sim_opts->scale_max, "Rating scale upper bound")
        ->capture_default_str();
    cmd->add_option("--mean-dist", sim_opts->mean_dist, "Latent mean distribution")
        ->check(CLI::IsMember({"uniform", "normal"}))
        ->capture_default_str();
    sim_opts->mean_lo_opt =
        cmd->add_option("--mean-lo", sim_opts->mean_lo, "Uniform mean lower end (default: scale)");
    sim_opts->mean_hi_opt =
        cmd->add_option("--mean-hi", sim_opts->mean_hi, "Uniform mean upper end (default: scale)");
    cmd->add_option("--mean", sim_opts->mean, "Normal mean-model center")->capture_default_str();
    cmd->add_option("--mean-sd", sim_opts->mean_sd, "Normal mean-model spread")
        ->capture_default_str();
    add_model_opts(cmd, sim_opts->model);
    cmd->add_flag("--discretize", sim_opts->discretize,
                  "Clamp and round trial ratings to integer scale points");
    cmd->add_option("--out-dir", sim_opts->out_dir,
                    "Output directory for trials.csv and ground_truth.csv")
        ->required();
    add_common(cmd, sim_opts->common);
    cmd->callback([&code, sim_opts] { code = run_simulate(*sim_opts); });
  }

  auto trials_opts = std::make_shared<TrialsOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "trials", "Per-trial metric values and histograms per system");
    cmd->add_option("--trials", trials_opts->trials_path, "Repeated-trial ratings file")
        ->required();
    cmd->add_option("--predictions", trials_opts->predictions_path, "Predictions file")
        ->required();
    cmd->add_option("--metric", trials_opts->metric, "rmse, mse, or mae")
        ->check(CLI::IsMember({"rmse", "mse", "mae"}))
        ->capture_default_str();
    cmd->add_option("--bins", trials_opts->bins, "Histogram bin count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--scale-min", trials_opts->scale_min, "Rating scale lower bound")
        ->capture_default_str();
    cmd->add_option("--scale-max", trials_opts->scale_max, "Rating scale upper bound")
        ->capture_default_str();
    add_common(cmd, trials_opts->common);
    cmd->callback([&code, trials_opts] { code = run_trials(*trials_opts); });
  }

  auto sweep_opts = std::make_shared<SweepOpts>();
  {
    CLI::App* cmd = app.add_subcommand(
        "sweep", "RMSE variance surface over (n, sigma) at a fixed residual");
    cmd->add_option("--n-grid", sweep_opts->n_grid, "Comma-separated list of n values")
        ->required();
    cmd->add_option("--sigma-grid", sweep_opts->sigma_grid,
                    "Comma-separated list of per-rating sigma values")
        ->required();
    cmd->add_option("--delta", sweep_opts->delta, "Constant per-rating residual")
        ->capture_default_str();
    add_common(cmd, sweep_opts->common);
    cmd->callback([&code, sweep_opts] { code = run_sweep(*sweep_opts); });
  }

  try {
    app.parse(argc, argv);
    return code;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace uneval
