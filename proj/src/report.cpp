#include "uneval/report.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <stdexcept>

#include "uneval/version.hpp"

namespace uneval {

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < size; ++i) {
    hash ^= bytes[i];
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[65536];
  for (;;) {
    in.read(buf, sizeof buf);
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  char out[20];
  std::snprintf(out, sizeof out, "0x%016llx", static_cast<unsigned long long>(hash));
  return out;
}

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json make_metadata(
    const std::string& command, const std::vector<std::pair<std::string, std::string>>& inputs,
    const nlohmann::ordered_json& options, const std::optional<std::uint64_t>& seed) {
  nlohmann::ordered_json meta;
  meta["command"] = command;
  meta["version"] = kVersion;
  if (seed.has_value()) {
    meta["seed"] = *seed;
  } else {
    meta["seed"] = nullptr;
  }
  nlohmann::ordered_json files = nlohmann::ordered_json::array();
  for (const auto& [name, path] : inputs) {
    nlohmann::ordered_json f;
    f["name"] = name;
    f["path"] = path;
    f["fnv1a64"] = fnv1a64_file(path);
    files.push_back(std::move(f));
  }
  meta["inputs"] = std::move(files);
  meta["options"] = options;
  meta["timestamp"] = iso8601_utc_now();
  return meta;
}

std::string render_json(const Report& report) {
  nlohmann::ordered_json doc;
  doc["kind"] = report.kind;
  doc["payload"] = report.payload;
  doc["metadata"] = report.metadata;
  return doc.dump(2) + "\n";
}

std::string render_payload_json(const Report& report) { return report.payload.dump(2) + "\n"; }

namespace {

using nlohmann::ordered_json;

std::string csv_cell(const ordered_json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return fmt_double(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

void matrix_rows(std::string& out, const std::string& tag, const ordered_json& m) {
  const auto& labels = m.at("labels");
  const auto& p = m.at("p");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      out += tag;
      out += ',';
      out += labels[i].get<std::string>();
      out += ',';
      out += labels[j].get<std::string>();
      out += ',';
      out += fmt_double(p[i][j].get<double>());
      out += '\n';
    }
  }
}

std::string csv_metric_distribution(const ordered_json& payload) {
  std::string out = "system,metric,method,n,mean,variance,mc_samples,degenerate,clt_approx\n";
  for (const auto& sys : payload.at("systems")) {
    for (const char* key : {"analytic", "monte_carlo"}) {
      if (!sys.contains(key) || sys.at(key).is_null()) continue;
      const auto& d = sys.at(key);
      out += csv_cell(sys.at("system"));
      out += ',';
      out += csv_cell(payload.at("metric"));
      out += ',';
      out += csv_cell(d.at("method"));
      out += ',';
      out += csv_cell(d.at("n"));
      out += ',';
      out += csv_cell(d.at("mean"));
      out += ',';
      out += csv_cell(d.at("variance"));
      out += ',';
      out += csv_cell(d.at("mc_samples"));
      out += ',';
      out += csv_cell(d.at("degenerate"));
      out += ',';
      out += csv_cell(d.at("clt_approx"));
      out += '\n';
    }
  }
  return out;
}

std::string csv_error_matrix(const ordered_json& payload) {
  std::string out = "matrix,label_i,label_j,p\n";
  if (payload.contains("matrix")) matrix_rows(out, "main", payload.at("matrix"));
  if (payload.contains("matrix_low")) matrix_rows(out, "low", payload.at("matrix_low"));
  if (payload.contains("matrix_high")) matrix_rows(out, "high", payload.at("matrix_high"));
  return out;
}

std::string csv_sweep(const ordered_json& payload) {
  std::string out = "n,sigma,variance\n";
  for (const auto& row : payload.at("rows")) {
    out += csv_cell(row.at("n"));
    out += ',';
    out += csv_cell(row.at("sigma"));
    out += ',';
    out += csv_cell(row.at("variance"));
    out += '\n';
  }
  return out;
}

std::string csv_histogram(const ordered_json& payload) {
  std::string out = "system,bin_low,bin_high,count\n";
  for (const auto& sys : payload.at("systems")) {
    const auto& h = sys.at("histogram");
    const auto& edges = h.at("edges");
    const auto& counts = h.at("counts");
    for (std::size_t b = 0; b < counts.size(); ++b) {
      out += csv_cell(sys.at("system"));
      out += ',';
      out += csv_cell(edges[b]);
      out += ',';
      out += csv_cell(edges[b + 1]);
      out += ',';
      out += csv_cell(counts[b]);
      out += '\n';
    }
  }
  return out;
}

std::string csv_order_distribution(const ordered_json& payload) {
  std::string out = "order,probability\n";
  for (const auto& row : payload.at("orders")) {
    std::string joined;
    for (const auto& label : row.at("order")) {
      if (!joined.empty()) joined += '>';
      joined += label.get<std::string>();
    }
    out += joined;
    out += ',';
    out += csv_cell(row.at("p"));
    out += '\n';
  }
  return out;
}

std::string csv_simulation(const ordered_json& payload) {
  std::string out = "key,value\n";
  for (const auto& [key, value] : payload.items()) {
    out += key;
    out += ',';
    out += csv_cell(value);
    out += '\n';
  }
  return out;
}

}  // namespace

std::string render_csv(const Report& report) {
  if (report.kind == "metric-distribution") return csv_metric_distribution(report.payload);
  if (report.kind == "error-matrix") return csv_error_matrix(report.payload);
  if (report.kind == "sweep") return csv_sweep(report.payload);
  if (report.kind == "histogram") return csv_histogram(report.payload);
  if (report.kind == "order-distribution") return csv_order_distribution(report.payload);
  if (report.kind == "simulation") return csv_simulation(report.payload);
  throw std::invalid_argument("no CSV rendering for report kind: " + report.kind);
}

}  // namespace uneval
