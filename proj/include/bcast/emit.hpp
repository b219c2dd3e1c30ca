#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bcast/experiments.hpp"

namespace bcast::emit {

inline constexpr std::string_view kCsvHeader =
    "scheme,gate,n_mean,p,p_attempt,hidden_fraction,n_ph,v_slots,p1,p2,p3,throughput";

struct Metadata {
  std::string version{experiments::kVersion};
  std::optional<std::uint64_t> seed;
  std::string rng_algorithm;
  std::string timestamp;  // left empty in reproducible outputs
};

/// Shortest decimal that parses back to the same double.
std::string format_double(double value);

/// RFC 4180 field quoting: only when the field needs it.
std::string csv_field(std::string_view text);

std::string to_csv(const experiments::Table& table);
std::string to_csv(const experiments::ValidationTable& table);
std::string to_csv(const std::vector<experiments::SimulationRow>& rows);

std::string to_json(const experiments::Table& table, const Metadata& meta);
std::string to_json(const experiments::ValidationTable& table, const Metadata& meta);
std::string to_json(const std::vector<experiments::SimulationRow>& rows, const Metadata& meta);

/// Th against p on a log axis, one polyline per (scheme, gate, fraction).
/// Rows with p = 0 cannot be placed on the axis and are skipped.
std::string to_svg(const experiments::Table& table);

/// Parses output of to_csv(Table). Throws UsageError on malformed input.
experiments::Table parse_csv(std::string_view text);

/// Writes to `path`, or stdout when the path is empty. Throws IoError.
void write_output(const std::string& content, const std::string& path);

/// Current UTC time, ISO 8601.
std::string utc_timestamp();

}  // namespace bcast::emit
