#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "acdroute/aggregate.hpp"
#include "acdroute/rejection.hpp"

namespace acdroute {

enum class TableFormat { Html, Csv, Json };
TableFormat parse_table_format(std::string_view name);
std::string_view extension(TableFormat format);

/// One vendor line of the traffic/quality monitoring table.
struct IntervalReportRow {
  Timestamp date_time;
  VendorId vendor;
  int billing_priority = 0;
  std::uint64_t bucket_zero = 0;
  std::uint64_t bucket_0_5 = 0;
  std::uint64_t bucket_5_30 = 0;
  std::uint64_t bucket_over_30 = 0;
  std::uint64_t calls = 0;
  double total_minutes = 0.0;
  std::optional<double> acd_min;
  std::optional<int> target_balance_pct;
  std::uint64_t received = 0;
  std::uint64_t rejected = 0;
};

/// Two rows per interval, newest interval first. Target balances of one
/// interval add up to 100.
std::vector<IntervalReportRow> report_rows(std::span<const IntervalRecord> history,
                                           const VendorPair& vendors);

inline constexpr std::string_view kIntervalCsvHeader =
    "date_time,vendor,billing_priority,zero,0_5,5_30,over_30,calls,total_minutes,acd_min,"
    "target_balance_pct,received,rejected";

/// Deterministic rendering; an empty history yields the header only.
std::string render_interval_table(std::span<const IntervalRecord> history,
                                  const VendorPair& vendors, TableFormat format);

enum class CalcFormat { Text, Html };

/// Six-row breakdown of one rejection computation, percentages to one decimal.
std::string render_calc_breakdown(const RejectionResult& result, const QualityInput& input,
                                  CalcFormat format = CalcFormat::Text);

/// Line-per-variable trace of the computation (rank to 12 and load to 10
/// significant digits, reject to 2 decimals).
std::string render_calc_trace(const RejectionResult& result, const QualityInput& input,
                              const VendorPair& vendors);

/// Full-precision interval history, readable back with history_from_json.
nlohmann::json history_to_json(std::span<const IntervalRecord> history, const VendorPair& vendors);

struct History {
  VendorPair vendors;
  std::vector<IntervalRecord> intervals;
};

History history_from_json(const nlohmann::json& doc);

}  // namespace acdroute
