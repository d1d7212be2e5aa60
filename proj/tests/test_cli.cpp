// In-process tests of the command-line surface: exit codes, seed resolution,
// report envelopes, format rendering, and end-to-end subcommand behavior.
// Reports are written to temp files via --out and parsed back.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "uneval/cli.hpp"
#include "uneval/ingest.hpp"
#include "uneval/propagation.hpp"
#include "uneval/ranking.hpp"
#include "uneval/uncertainty.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace uneval;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("uneval-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(std::vector<std::string> args) {
  args.insert(args.begin(), "uncertain-eval");
  return run_cli(args);
}

json run_to_json(std::vector<std::string> args, const TempDir& dir,
                 const std::string& name = "report.json") {
  const std::string out = dir.file(name);
  args.push_back("--out");
  args.push_back(out);
  const int code = cli(std::move(args));
  REQUIRE(code == 0);
  return json::parse(slurp(out));
}

void clear_seed_env() { ::unsetenv("UNCERTAIN_EVAL_SEED"); }

// Two rating pairs with hand-picked densities, and two systems: "alpha"
// predicts the means exactly, "beta" misses both by half a star.
const char* kDensities =
    "user,item,mean,sigma\n"
    "u1,i1,3.5,0.5\n"
    "u2,i1,4,0.3\n";
const char* kPredictions =
    "system,user,item,prediction\n"
    "alpha,u1,i1,3.5\n"
    "alpha,u2,i1,4\n"
    "beta,u1,i1,3\n"
    "beta,u2,i1,4.5\n";

std::vector<UncertainRating> densities_fixture(double alpha_delta) {
  UncertainRating a;
  a.user = "u1";
  a.item = "i1";
  a.density = Gaussian{3.5, 0.25};
  a.predictor = 3.5 - alpha_delta;
  UncertainRating b;
  b.user = "u2";
  b.item = "i1";
  b.density = Gaussian{4.0, 0.09};
  b.predictor = 4.0 + alpha_delta;
  return {a, b};
}

}  // namespace

// ---------------------------------------------------------------------------
// Exit codes and argument validation
// ---------------------------------------------------------------------------

TEST_CASE("cli: --version and --help exit 0") {
  CHECK(cli({"--version"}) == 0);
  CHECK(cli({"--help"}) == 0);
  CHECK(cli({"sweep", "--help"}) == 0);
}

TEST_CASE("cli: unknown or missing subcommands exit 2") {
  CHECK(cli({}) == 2);
  CHECK(cli({"frobnicate"}) == 2);
  CHECK(cli({"sweep"}) == 2);  // missing required --n-grid/--sigma-grid
}

TEST_CASE("cli: bad option values exit 2") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
             "--predictions", dir.file("p.csv"), "--metric", "median"}) == 2);
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "nonsense",
             "--predictions", dir.file("p.csv")}) == 2);
  CHECK(cli({"sweep", "--n-grid", "0", "--sigma-grid", "1"}) == 2);
  CHECK(cli({"sweep", "--n-grid", "abc", "--sigma-grid", "1"}) == 2);
  CHECK(cli({"sweep", "--n-grid", "10", "--sigma-grid", "-1"}) == 2);
  CHECK(cli({"sweep", "--n-grid", "10", "--sigma-grid", "1", "--delta", "inf"}) == 2);
}

TEST_CASE("cli: missing input files exit 2") {
  TempDir dir;
  CHECK(cli({"eval", "--ratings", dir.file("nope.csv"), "--predictions",
             dir.file("also-nope.csv")}) == 2);
}

TEST_CASE("cli: mae without --mc exits 2") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
             "--predictions", dir.file("p.csv"), "--metric", "mae"}) == 2);
}

TEST_CASE("cli: unwritable --out exits 2") {
  TempDir dir;
  CHECK(cli({"sweep", "--n-grid", "10", "--sigma-grid", "1", "--out",
             dir.file("missing-dir") + "/report.json"}) == 2);
}

// ---------------------------------------------------------------------------
// Seed resolution
// ---------------------------------------------------------------------------

TEST_CASE("cli: commands that draw require a seed") {
  clear_seed_env();
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
             "--predictions", dir.file("p.csv"), "--mc", "2000"}) == 2);
  CHECK(cli({"simulate", "--users", "2", "--items", "2", "--out-dir", dir.file("sim")}) == 2);
}

TEST_CASE("cli: UNCERTAIN_EVAL_SEED is the fallback seed and lands in metadata") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  ::setenv("UNCERTAIN_EVAL_SEED", "77", 1);
  const json doc = run_to_json({"eval", "--ratings", dir.file("d.csv"), "--ratings-format",
                                "densities", "--predictions", dir.file("p.csv"), "--mc", "2000"},
                               dir);
  clear_seed_env();
  CHECK(doc["metadata"]["seed"].get<std::uint64_t>() == 77);

  ::setenv("UNCERTAIN_EVAL_SEED", "12abc", 1);
  const int code = cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
                        "--predictions", dir.file("p.csv"), "--mc", "2000"});
  clear_seed_env();
  CHECK(code == 2);
}

TEST_CASE("cli: an explicit --seed beats the environment") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  ::setenv("UNCERTAIN_EVAL_SEED", "77", 1);
  const json doc = run_to_json({"eval", "--ratings", dir.file("d.csv"), "--ratings-format",
                                "densities", "--predictions", dir.file("p.csv"), "--mc", "2000",
                                "--seed", "5"},
                               dir);
  clear_seed_env();
  CHECK(doc["metadata"]["seed"].get<std::uint64_t>() == 5);
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

TEST_CASE("cli: sweep emits the closed-form variance surface") {
  TempDir dir;
  const json doc = run_to_json(
      {"sweep", "--n-grid", "10,100", "--sigma-grid", "0.5,1", "--delta", "0"}, dir);
  CHECK(doc["kind"] == "sweep");
  CHECK(doc["metadata"]["seed"].is_null());
  const json& rows = doc["payload"]["rows"];
  REQUIRE(rows.size() == 4);
  CHECK(rows[0]["n"] == 10);
  CHECK(rows[0]["sigma"] == 0.5);
  CHECK(rows[0]["variance"].get<double>() == 0.25 / 20.0);
  CHECK(rows[1]["variance"].get<double>() == 1.0 / 20.0);
  CHECK(rows[2]["variance"].get<double>() == 0.25 / 200.0);
  CHECK(rows[3]["variance"].get<double>() == 1.0 / 200.0);

  const std::string csv_path = dir.file("sweep.csv");
  REQUIRE(cli({"sweep", "--n-grid", "10,100", "--sigma-grid", "0.5,1", "--delta", "0",
               "--format", "csv", "--out", csv_path}) == 0);
  const std::string csv = slurp(csv_path);
  CHECK(csv.find("n,sigma,variance\n") == 0);
  CHECK(csv.find("10,0.5,0.0125\n") != std::string::npos);
  CHECK(csv.find("10,1,0.05\n") != std::string::npos);
  CHECK(csv.find("100,0.5,0.00125\n") != std::string::npos);
  CHECK(csv.find("100,1,0.005\n") != std::string::npos);
}

TEST_CASE("cli: sweep degeneracy warns at exit 0, --strict escalates to 3") {
  TempDir dir;
  const std::string out = dir.file("sweep.json");
  CHECK(cli({"sweep", "--n-grid", "5", "--sigma-grid", "0", "--delta", "0", "--out", out}) == 0);
  CHECK(cli({"sweep", "--n-grid", "5", "--sigma-grid", "0", "--delta", "0", "--out", out,
             "--strict"}) == 3);
  // The report is still written before the strict escalation.
  const json doc = json::parse(slurp(out));
  CHECK(doc["payload"]["rows"][0]["variance"].get<double>() == 0.0);
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

TEST_CASE("cli: eval matches the library closed form per system") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  const json doc = run_to_json({"eval", "--ratings", dir.file("d.csv"), "--ratings-format",
                                "densities", "--predictions", dir.file("p.csv")},
                               dir);
  CHECK(doc["kind"] == "metric-distribution");
  CHECK(doc["payload"]["metric"] == "rmse");
  const json& systems = doc["payload"]["systems"];
  REQUIRE(systems.size() == 2);
  CHECK(systems[0]["system"] == "alpha");  // sorted by name
  CHECK(systems[1]["system"] == "beta");
  CHECK(systems[0]["monte_carlo"].is_null());

  const MetricDistribution alpha = rmse_distribution(densities_fixture(0.0));
  const MetricDistribution beta = rmse_distribution(densities_fixture(0.5));
  CHECK(systems[0]["analytic"]["mean"].get<double>() == alpha.gaussian.mean);
  CHECK(systems[0]["analytic"]["variance"].get<double>() == alpha.gaussian.variance);
  CHECK(systems[0]["analytic"]["n"] == 2);
  CHECK(systems[1]["analytic"]["mean"].get<double>() == beta.gaussian.mean);
  CHECK(systems[1]["analytic"]["variance"].get<double>() == beta.gaussian.variance);

  // Metadata carries input digests.
  const json& inputs = doc["metadata"]["inputs"];
  REQUIRE(inputs.size() == 2);
  CHECK(inputs[0]["name"] == "ratings");
  CHECK(inputs[0]["fnv1a64"].get<std::string>().rfind("0x", 0) == 0);
}

TEST_CASE("cli: eval consumes repeated-trial ratings via --ratings-format trials") {
  TempDir dir;
  const std::string trials_text =
      "user,item,trial,rating\n"
      "u1,i1,1,4\nu1,i1,2,3\nu1,i1,3,4\nu1,i1,4,5\nu1,i1,5,4\n"
      "u2,i1,1,3\nu2,i1,2,4\nu2,i1,3,3\nu2,i1,4,5\nu2,i1,5,3\n";
  write_file(dir.file("t.csv"), trials_text);
  write_file(dir.file("p.csv"),
             "system,user,item,prediction\nexact,u1,i1,4\nexact,u2,i1,3.6\n");
  const json doc = run_to_json({"eval", "--ratings", dir.file("t.csv"), "--predictions",
                                dir.file("p.csv")},
                               dir);

  // Reproduce the exact pipeline in-process for a bitwise-comparable answer.
  std::istringstream in(trials_text);
  auto ratings = estimate_from_trials(parse_trials(in, {1.0, 5.0}));
  ratings[0].predictor = 4.0;
  ratings[1].predictor = 3.6;
  const MetricDistribution expected = rmse_distribution(ratings);

  const json& dist = doc["payload"]["systems"][0]["analytic"];
  CHECK(dist["mean"].get<double>() == expected.gaussian.mean);
  CHECK(dist["variance"].get<double>() == expected.gaussian.variance);
}

TEST_CASE("cli: eval Monte Carlo payloads are byte-identical across runs") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  const std::vector<std::string> args = {"eval",           "--ratings",     dir.file("d.csv"),
                                         "--ratings-format", "densities",   "--predictions",
                                         dir.file("p.csv"), "--mc",         "2000",
                                         "--seed",          "123"};
  const json a = run_to_json(args, dir, "a.json");
  const json b = run_to_json(args, dir, "b.json");
  CHECK(a["payload"].dump() == b["payload"].dump());
  CHECK(a["metadata"]["seed"] == 123);
  const json& mc = a["payload"]["systems"][0]["monte_carlo"];
  CHECK(mc["method"] == "monte-carlo");
  CHECK(mc["mc_samples"] == 2000);
  // The MC estimate lands near the analytic mean.
  const MetricDistribution alpha = rmse_distribution(densities_fixture(0.0));
  CHECK(mc["mean"].get<double>() ==
        doctest::Approx(alpha.gaussian.mean).epsilon(0.05));
}

TEST_CASE("cli: eval degenerate input warns, --strict turns it into exit 3") {
  TempDir dir;
  write_file(dir.file("d.csv"), "user,item,mean,sigma\nu1,i1,3,0\nu2,i1,4,0\n");
  write_file(dir.file("p.csv"), "system,user,item,prediction\ns,u1,i1,3\ns,u2,i1,4\n");
  const std::string out = dir.file("r.json");
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
             "--predictions", dir.file("p.csv"), "--out", out}) == 0);
  const json doc = json::parse(slurp(out));
  CHECK(doc["payload"]["systems"][0]["analytic"]["degenerate"] == true);
  CHECK(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
             "--predictions", dir.file("p.csv"), "--out", out, "--strict"}) == 3);
}

TEST_CASE("cli: eval csv rendering uses the flat distribution table") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  const std::string out = dir.file("r.csv");
  REQUIRE(cli({"eval", "--ratings", dir.file("d.csv"), "--ratings-format", "densities",
               "--predictions", dir.file("p.csv"), "--format", "csv", "--out", out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("system,metric,method,n,mean,variance,mc_samples,degenerate,clt_approx\n") == 0);
  CHECK(csv.find("alpha,rmse,analytic,2,") != std::string::npos);
  CHECK(csv.find("beta,rmse,analytic,2,") != std::string::npos);
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

TEST_CASE("cli: rank from a distributions file reproduces the library matrix") {
  TempDir dir;
  write_file(dir.file("dist.csv"),
             "system,mean,variance\na,0.85,1e-07\nb,0.852,1.5e-07\nc,0.86,2e-07\n");
  const json doc =
      run_to_json({"rank", "--distributions", dir.file("dist.csv")}, dir);
  CHECK(doc["kind"] == "error-matrix");
  CHECK(doc["metadata"]["seed"].is_null());

  const std::vector<std::pair<std::string, Gaussian>> systems = {
      {"a", Gaussian{0.85, 1e-07}},
      {"b", Gaussian{0.852, 1.5e-07}},
      {"c", Gaussian{0.86, 2e-07}},
  };
  const ErrorMatrix expected = error_matrix(systems, false);
  const json& m = doc["payload"]["matrix"];
  REQUIRE(m["labels"].size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(m["labels"][i].get<std::string>() == expected.labels[i]);
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(m["p"][i][j].get<double>() == expected.at(i, j));
    }
  }
}

TEST_CASE("cli: rank --orders samples full orderings") {
  TempDir dir;
  write_file(dir.file("dist.csv"),
             "system,mean,variance\na,0.85,1e-07\nb,0.852,1.5e-07\nc,0.86,2e-07\n");
  const json doc = run_to_json(
      {"rank", "--distributions", dir.file("dist.csv"), "--orders", "20000", "--seed", "9"}, dir);
  const json& od = doc["payload"]["order_distribution"];
  CHECK(od["samples"] == 20000);
  const json& orders = od["orders"];
  REQUIRE(orders.size() >= 1);
  double total = 0.0;
  double prev = 1.0;
  for (const auto& row : orders) {
    const double p = row["p"].get<double>();
    CHECK(p <= prev);  // sorted, most probable first
    prev = p;
    total += p;
    CHECK(row["order"].size() == 3);
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  // The most probable order at these gaps is the score order a > b > c.
  CHECK(orders[0]["order"][0] == "a");
  CHECK(orders[0]["order"][1] == "b");
  CHECK(orders[0]["order"][2] == "c");
}

TEST_CASE("cli: rank --orders without a seed exits 2") {
  clear_seed_env();
  TempDir dir;
  write_file(dir.file("dist.csv"), "system,mean,variance\na,0.85,1e-07\nb,0.852,1.5e-07\n");
  CHECK(cli({"rank", "--distributions", dir.file("dist.csv"), "--orders", "10000"}) == 2);
}

TEST_CASE("cli: rank rejects mixing --distributions with --ratings") {
  TempDir dir;
  write_file(dir.file("dist.csv"), "system,mean,variance\na,0.85,1e-07\nb,0.852,1.5e-07\n");
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  CHECK(cli({"rank", "--distributions", dir.file("dist.csv"), "--ratings", dir.file("d.csv"),
             "--predictions", dir.file("p.csv")}) == 2);
  CHECK(cli({"rank"}) == 2);  // neither source
  CHECK(cli({"rank", "--ratings", dir.file("d.csv")}) == 2);  // predictions missing
}

TEST_CASE("cli: rank from ratings matches eval-then-rank composition") {
  TempDir dir;
  write_file(dir.file("d.csv"), kDensities);
  write_file(dir.file("p.csv"), kPredictions);
  const json doc = run_to_json({"rank", "--ratings", dir.file("d.csv"), "--ratings-format",
                                "densities", "--predictions", dir.file("p.csv")},
                               dir);
  const MetricDistribution alpha = rmse_distribution(densities_fixture(0.0));
  const MetricDistribution beta = rmse_distribution(densities_fixture(0.5));
  const ErrorMatrix expected =
      error_matrix({{"alpha", alpha.gaussian}, {"beta", beta.gaussian}}, false);
  const json& m = doc["payload"]["matrix"];
  CHECK(m["labels"][0] == "alpha");
  CHECK(m["labels"][1] == "beta");
  CHECK(m["p"][0][1].get<double>() == expected.at(0, 1));
  CHECK(m["p"][1][0].get<double>() == expected.at(1, 0));
}

// ---------------------------------------------------------------------------
// audit
// ---------------------------------------------------------------------------

namespace {

const char* kLeaderboard =
    "rank,name,score\n"
    "1,First,0.85\n"
    "2,Second,0.86\n"
    "3,Third,0.9\n";

}  // namespace

TEST_CASE("cli: audit with a fixed score sigma, both readings agree") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  const json std_doc = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000",
                                    "--sigma", "0.0006", "--sigma-reading", "std"},
                                   dir, "std.json");
  const json var_doc = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000",
                                    "--sigma", "0.00000036", "--sigma-reading", "variance"},
                                   dir, "var.json");
  CHECK(std_doc["payload"]["approach"] == "fixed-sigma");
  CHECK(std_doc["payload"]["sigma-reading"] == "std");
  const json& entries = std_doc["payload"]["entries"];
  REQUIRE(entries.size() == 3);
  CHECK(entries[0]["rank"] == 1);
  CHECK(entries[0]["name"] == "First");
  CHECK(entries[0]["score"] == 0.85);
  for (const auto& e : entries) {
    CHECK(e["score_variance"].get<double>() == doctest::Approx(3.6e-07).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std_doc["payload"]["matrix"]["p"][i][j].get<double>() ==
            doctest::Approx(var_doc["payload"]["matrix"]["p"][i][j].get<double>())
                .epsilon(1e-12));
    }
  }
}

TEST_CASE("cli: audit approach C reports the variance interval") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  const json doc = run_to_json(
      {"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000", "--approach", "C"}, dir);
  CHECK(doc["payload"]["approach"] == "C");
  CHECK(doc["metadata"]["seed"].is_null());
  const json& entries = doc["payload"]["entries"];
  REQUIRE(entries.size() == 3);
  for (const auto& e : entries) {
    CHECK(e["variance_low"].get<double>() == 0.0);
    CHECK(e["variance_high"].get<double>() > 0.0);
    const double mid = (e["variance_low"].get<double>() + e["variance_high"].get<double>()) / 2.0;
    CHECK(e["score_variance"].get<double>() == doctest::Approx(mid).epsilon(1e-12));
  }
  CHECK(doc["payload"].contains("matrix_low"));
  CHECK(doc["payload"].contains("matrix_high"));
  CHECK_FALSE(doc["payload"].contains("matrix"));

  const std::string out = dir.file("c.csv");
  REQUIRE(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000", "--approach", "C",
               "--format", "csv", "--out", out}) == 0);
  const std::string csv = slurp(out);
  CHECK(csv.find("matrix,label_i,label_j,p\n") == 0);
  CHECK(csv.find("low,First,Second,") != std::string::npos);
  CHECK(csv.find("high,First,Second,") != std::string::npos);
  CHECK(csv.find("main,") == std::string::npos);
}

TEST_CASE("cli: audit approach B honors the sigma family flags") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  const json doc = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "100000",
                                "--approach", "B", "--family", "uniform", "--u-max", "1.8",
                                "--seed", "42"},
                               dir);
  CHECK(doc["payload"]["approach"] == "B");
  CHECK(doc["metadata"]["seed"] == 42);
  CHECK(doc["metadata"]["options"]["model"]["family"] == "uniform");
  for (const auto& e : doc["payload"]["entries"]) {
    CHECK(e["score_variance"].get<double>() > 0.0);
    CHECK_FALSE(e.contains("variance_low"));
  }
  // Deterministic under the same seed.
  const json again = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "100000",
                                  "--approach", "B", "--family", "uniform", "--u-max", "1.8",
                                  "--seed", "42"},
                                 dir, "again.json");
  CHECK(doc["payload"].dump() == again["payload"].dump());
}

TEST_CASE("cli: audit approach A fits the sigma population from trial data") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  // Synthesize a discretized repeated-trial study first.
  REQUIRE(cli({"simulate", "--users", "10", "--items", "6", "--trials", "5", "--seed", "11",
               "--family", "uniform", "--u-max", "0.9", "--discretize", "--out-dir",
               dir.file("sim"), "--out", dir.file("sim.json")}) == 0);
  const json doc = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000",
                                "--approach", "A", "--trials", dir.file("sim") + "/trials.csv",
                                "--seed", "3"},
                               dir);
  CHECK(doc["payload"]["approach"] == "A");
  for (const auto& e : doc["payload"]["entries"]) {
    CHECK(e["score_variance"].get<double>() > 0.0);
  }
  // The trials file travels in the metadata inputs with a digest.
  bool saw_trials = false;
  for (const auto& input : doc["metadata"]["inputs"]) {
    if (input["name"] == "trials") {
      saw_trials = true;
      CHECK(input["fnv1a64"].get<std::string>().rfind("0x", 0) == 0);
    }
  }
  CHECK(saw_trials);
}

TEST_CASE("cli: audit approach A without --trials exits 2") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  CHECK(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000", "--approach", "A",
             "--seed", "3"}) == 2);
}

TEST_CASE("cli: audit needs an approach or a sigma") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  CHECK(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000"}) == 2);
}

TEST_CASE("cli: audit --delta-file overrides the residual allocation") {
  TempDir dir;
  write_file(dir.file("lb.csv"), kLeaderboard);
  write_file(dir.file("deltas.txt"), "0.1\n0.2\n0.3\n");
  const json with = run_to_json({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "3",
                                 "--approach", "C", "--delta-file", dir.file("deltas.txt")},
                                dir, "with.json");
  const json without = run_to_json(
      {"audit", "--leaderboard", dir.file("lb.csv"), "--n", "3", "--approach", "C"}, dir,
      "without.json");
  CHECK(with["payload"]["entries"][0]["variance_high"].get<double>() !=
        without["payload"]["entries"][0]["variance_high"].get<double>());

  // Residual count must match n.
  write_file(dir.file("short.txt"), "0.1\n0.2\n");
  CHECK(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "3", "--approach", "C",
             "--delta-file", dir.file("short.txt")}) == 2);
  // Malformed residuals are a parse error.
  write_file(dir.file("bad.txt"), "0.1\nzebra\n0.3\n");
  CHECK(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "3", "--approach", "C",
             "--delta-file", dir.file("bad.txt")}) == 2);
}

TEST_CASE("cli: non-monotone leaderboard warns without failing, even under --strict") {
  TempDir dir;
  write_file(dir.file("lb.csv"),
             "rank,name,score\n1,First,0.86\n2,Second,0.85\n3,Third,0.9\n");
  // Info warnings are not degeneracy warnings; --strict must not escalate.
  CHECK(cli({"audit", "--leaderboard", dir.file("lb.csv"), "--n", "1000", "--sigma", "0.0006",
             "--strict", "--out", dir.file("r.json")}) == 0);
}

// ---------------------------------------------------------------------------
// simulate + trials
// ---------------------------------------------------------------------------

TEST_CASE("cli: simulate writes parseable study files") {
  TempDir dir;
  const json doc = run_to_json({"simulate", "--users", "4", "--items", "3", "--trials", "2",
                                "--seed", "9", "--discretize", "--out-dir", dir.file("sim")},
                               dir);
  CHECK(doc["kind"] == "simulation");
  CHECK(doc["payload"]["rows"] == 4 * 3 * 2);
  CHECK(doc["payload"]["users"] == 4);

  std::ifstream trials_in(dir.file("sim") + "/trials.csv");
  REQUIRE(trials_in.good());
  const TrialTable table = parse_trials(trials_in, {1.0, 5.0});
  CHECK(table.rows.size() == 4u * 3u * 2u);

  std::ifstream truth_in(dir.file("sim") + "/ground_truth.csv");
  REQUIRE(truth_in.good());
  const auto truth = parse_rating_densities(truth_in);
  CHECK(truth.size() == 4u * 3u);
}

TEST_CASE("cli: simulate requires --out-dir") {
  CHECK(cli({"simulate", "--users", "2", "--items", "2", "--seed", "1"}) == 2);
}

TEST_CASE("cli: continuous simulate output needs a widened scale downstream") {
  TempDir dir;
  // High rating noise in continuous mode: draws land outside [1, 5], and a
  // downstream parse at the nominal scale must reject them.
  REQUIRE(cli({"simulate", "--users", "10", "--items", "6", "--trials", "5", "--seed", "11",
               "--family", "constant", "--sigma-value", "1.5", "--out-dir", dir.file("sim"),
               "--out", dir.file("sim.json")}) == 0);
  write_file(dir.file("p.csv"), "system,user,item,prediction\ns,u01,i1,3\n");
  CHECK(cli({"trials", "--trials", dir.file("sim") + "/trials.csv", "--predictions",
             dir.file("p.csv")}) == 2);
  // A widened scale reads the same file fine (prediction coverage aside).
  std::ifstream in(dir.file("sim") + "/trials.csv");
  REQUIRE(in.good());
  CHECK_NOTHROW(parse_trials(in, {-20.0, 20.0}));
}

TEST_CASE("cli: trials reports per-trial values and histograms") {
  TempDir dir;
  REQUIRE(cli({"simulate", "--users", "5", "--items", "4", "--trials", "6", "--seed", "21",
               "--family", "uniform", "--u-max", "0.8", "--discretize", "--out-dir",
               dir.file("sim"), "--out", dir.file("sim.json")}) == 0);

  // One constant predictor covering every (user, item).
  std::ifstream truth_in(dir.file("sim") + "/ground_truth.csv");
  REQUIRE(truth_in.good());
  const auto truth = parse_rating_densities(truth_in);
  std::ostringstream preds;
  preds << "system,user,item,prediction\n";
  for (const auto& r : truth) preds << "const3," << r.user << ',' << r.item << ",3\n";
  write_file(dir.file("p.csv"), preds.str());

  const json doc = run_to_json({"trials", "--trials", dir.file("sim") + "/trials.csv",
                                "--predictions", dir.file("p.csv"), "--bins", "4"},
                               dir);
  CHECK(doc["kind"] == "histogram");
  CHECK(doc["payload"]["trials"].size() == 6);
  const json& sys = doc["payload"]["systems"][0];
  CHECK(sys["system"] == "const3");
  REQUIRE(sys["values"].size() == 6);
  const json& hist = sys["histogram"];
  REQUIRE(hist["edges"].size() == 5);
  int count_sum = 0;
  for (const auto& c : hist["counts"]) count_sum += c.get<int>();
  CHECK(count_sum == 6);

  const std::string out = dir.file("t.csv");
  REQUIRE(cli({"trials", "--trials", dir.file("sim") + "/trials.csv", "--predictions",
               dir.file("p.csv"), "--bins", "4", "--format", "csv", "--out", out}) == 0);
  CHECK(slurp(out).find("system,bin_low,bin_high,count\n") == 0);
}
