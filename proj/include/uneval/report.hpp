#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace uneval {

/// A machine-readable result document. `payload` carries the numbers and is
/// byte-identical across identical invocations; anything run-dependent
/// (timestamp) lives in `metadata` only. All numbers serialize at full
/// round-trip precision (>= 12 significant digits).
struct Report {
  std::string kind;  // metric-distribution | error-matrix | order-distribution | sweep | histogram
  nlohmann::ordered_json payload;
  nlohmann::ordered_json metadata;
};

/// Full JSON document {"kind", "payload", "metadata"}, pretty-printed,
/// trailing newline.
std::string render_json(const Report& report);

/// The payload subtree alone — the byte-identity unit for determinism
/// checks.
std::string render_payload_json(const Report& report);

/// Payload as a single flat CSV table (long format for matrices:
/// matrix,label_i,label_j,p). Metadata is not embedded — use JSON when the
/// seed and input digests must travel with the numbers.
std::string render_csv(const Report& report);

/// FNV-1a 64-bit digest of a file's bytes, as "0x" + 16 hex digits.
/// Throws std::runtime_error when the file cannot be read.
std::string fnv1a64_file(const std::string& path);
std::uint64_t fnv1a64(const void* data, std::size_t size);

/// Shortest-faithful decimal for CSV cells: %.15g (15 significant digits).
std::string fmt_double(double v);

/// Current UTC time, ISO 8601 (e.g. "2024-05-01T12:00:00Z").
std::string iso8601_utc_now();

/// Standard metadata block: command name, library version, seed ("null"
/// when the command drew no random numbers), input files with digests,
/// echoed options, timestamp.
nlohmann::ordered_json make_metadata(
    const std::string& command, const std::vector<std::pair<std::string, std::string>>& inputs,
    const nlohmann::ordered_json& options, const std::optional<std::uint64_t>& seed);

}  // namespace uneval
