#include "acdroute/report.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "acdroute/store.hpp"

namespace acdroute {

namespace {

using nlohmann::json;

double round_to(double v, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(v * scale + 0.5) / scale;
}

std::string general(double v, int precision) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, precision);
  return std::string(buf, ptr);
}

/// 8.67 -> "8.67", 0.60 -> "0.6", 5.00 -> "5".
std::string trimmed2(double v) {
  std::string s = format_fixed(v, 2);
  while (s.back() == '0') s.pop_back();
  if (s.back() == '.') s.pop_back();
  return s;
}

std::string pct1(double fraction) { return format_fixed(fraction * 100.0, 1) + "%"; }

std::string html_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Cells {
  std::string date_time, vendor, priority, zero, b05, b530, b30, calls, minutes, acd, target,
      received, rejected;
};

Cells cells(const IntervalReportRow& r) {
  return {format_timestamp_minutes(r.date_time),
          std::to_string(r.vendor.value),
          std::to_string(r.billing_priority),
          std::to_string(r.bucket_zero),
          std::to_string(r.bucket_0_5),
          std::to_string(r.bucket_5_30),
          std::to_string(r.bucket_over_30),
          std::to_string(r.calls),
          format_fixed(r.total_minutes, 1),
          r.acd_min ? format_fixed(*r.acd_min, 2) : std::string{},
          r.target_balance_pct ? std::to_string(*r.target_balance_pct) : std::string{},
          std::to_string(r.received),
          std::to_string(r.rejected)};
}

std::string render_csv(const std::vector<IntervalReportRow>& rows) {
  std::string out{kIntervalCsvHeader};
  out += '\n';
  for (const auto& r : rows) {
    const Cells c = cells(r);
    for (const auto* f : {&c.date_time, &c.vendor, &c.priority, &c.zero, &c.b05, &c.b530, &c.b30,
                          &c.calls, &c.minutes, &c.acd, &c.target, &c.received}) {
      out += *f;
      out += ',';
    }
    out += c.rejected;
    out += '\n';
  }
  return out;
}

std::string render_json(const std::vector<IntervalReportRow>& rows) {
  json doc = json::array();
  for (const auto& r : rows) {
    json j;
    j["date_time"] = format_timestamp_minutes(r.date_time);
    j["vendor"] = r.vendor.value;
    j["billing_priority"] = r.billing_priority;
    j["zero"] = r.bucket_zero;
    j["0_5"] = r.bucket_0_5;
    j["5_30"] = r.bucket_5_30;
    j["over_30"] = r.bucket_over_30;
    j["calls"] = r.calls;
    j["total_minutes"] = round_to(r.total_minutes, 1);
    j["acd_min"] = r.acd_min ? json(round_to(*r.acd_min, 2)) : json(nullptr);
    j["target_balance_pct"] = r.target_balance_pct ? json(*r.target_balance_pct) : json(nullptr);
    j["received"] = r.received;
    j["rejected"] = r.rejected;
    doc.push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string render_html(const std::vector<IntervalReportRow>& rows) {
  std::ostringstream out;
  out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
      << "<title>Traffic load balance with quality routing</title>\n"
      << "<style>table{border-collapse:collapse}td,th{border:1px solid #888;padding:2px 6px;"
         "text-align:right}</style>\n</head>\n<body>\n"
      << "<h1>Traffic load balance with quality routing</h1>\n<table>\n"
      << "<tr><th>Date and Time</th><th>Vendor</th><th>Billing priority</th><th>=0</th>"
         "<th>0&lt;&le;5</th><th>5&lt;&le;30</th><th>&gt;30</th><th>Calls</th>"
         "<th>Total Minutes</th><th>ACD (min)</th><th>Target balance</th>"
         "<th>Received during the current interval</th><th>Rejected to balance</th></tr>\n";
  for (const auto& r : rows) {
    const Cells c = cells(r);
    out << "<tr>";
    for (const auto* f : {&c.date_time, &c.vendor, &c.priority, &c.zero, &c.b05, &c.b530, &c.b30,
                          &c.calls, &c.minutes, &c.acd}) {
      out << "<td>" << html_escape(*f) << "</td>";
    }
    out << "<td>" << (c.target.empty() ? std::string{} : c.target + " %") << "</td>";
    out << "<td>" << c.received << "</td><td>" << c.rejected << "</td></tr>\n";
  }
  out << "</table>\n</body>\n</html>\n";
  return out.str();
}

json stats_to_json(const VendorIntervalStats& s) {
  return {{"vendor", s.vendor.value},
          {"zero", s.bucket_zero},
          {"0_5", s.bucket_0_5},
          {"5_30", s.bucket_5_30},
          {"over_30", s.bucket_over_30},
          {"calls", s.calls},
          {"total_minutes", s.total_minutes},
          {"acd_min", s.acd_min ? json(*s.acd_min) : json(nullptr)}};
}

VendorIntervalStats stats_from_json(const json& j) {
  VendorIntervalStats s;
  s.vendor = VendorId{j.at("vendor").get<std::uint32_t>()};
  s.bucket_zero = j.at("zero").get<std::uint64_t>();
  s.bucket_0_5 = j.at("0_5").get<std::uint64_t>();
  s.bucket_5_30 = j.at("5_30").get<std::uint64_t>();
  s.bucket_over_30 = j.at("over_30").get<std::uint64_t>();
  s.calls = j.at("calls").get<std::uint64_t>();
  s.total_minutes = j.at("total_minutes").get<double>();
  if (!j.at("acd_min").is_null()) s.acd_min = j.at("acd_min").get<double>();
  return s;
}

template <typename T>
json optional_pair(const std::optional<std::array<T, 2>>& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

TableFormat parse_table_format(std::string_view name) {
  if (name == "html") return TableFormat::Html;
  if (name == "csv") return TableFormat::Csv;
  if (name == "json") return TableFormat::Json;
  throw ValidationError("unknown table format '" + std::string(name) + "'");
}

std::string_view extension(TableFormat format) {
  switch (format) {
    case TableFormat::Html: return "html";
    case TableFormat::Csv: return "csv";
    case TableFormat::Json: return "json";
  }
  return "txt";
}

std::vector<IntervalReportRow> report_rows(std::span<const IntervalRecord> history,
                                           const VendorPair& vendors) {
  std::vector<IntervalReportRow> rows;
  rows.reserve(history.size() * 2);
  for (auto it = history.rbegin(); it != history.rend(); ++it) {
    const IntervalRecord& rec = *it;
    std::optional<int> balance0;
    if (rec.result.load) {
      balance0 = static_cast<int>(std::floor((*rec.result.load)[0] * 100.0 + 0.5));
    }
    for (std::size_t i = 0; i < 2; ++i) {
      const auto& s = rec.stats[i];
      IntervalReportRow row;
      row.date_time = rec.closed_at;
      row.vendor = vendors[i];
      row.billing_priority = rec.prefs[i].value();
      row.bucket_zero = s.bucket_zero;
      row.bucket_0_5 = s.bucket_0_5;
      row.bucket_5_30 = s.bucket_5_30;
      row.bucket_over_30 = s.bucket_over_30;
      row.calls = s.calls;
      row.total_minutes = s.total_minutes;
      row.acd_min = s.acd_min;
      if (balance0) row.target_balance_pct = i == 0 ? *balance0 : 100 - *balance0;
      row.received = rec.counters.received[i];
      row.rejected = rec.counters.rejected[i];
      rows.push_back(row);
    }
  }
  return rows;
}

std::string render_interval_table(std::span<const IntervalRecord> history,
                                  const VendorPair& vendors, TableFormat format) {
  const auto rows = report_rows(history, vendors);
  switch (format) {
    case TableFormat::Html: return render_html(rows);
    case TableFormat::Csv: return render_csv(rows);
    case TableFormat::Json: return render_json(rows);
  }
  return {};
}

std::string render_calc_breakdown(const RejectionResult& result, const QualityInput& input,
                                  CalcFormat format) {
  struct Line {
    std::string label, a, b;
  };
  auto acd_cell = [&](std::size_t i) {
    return input.acd_min[i] ? trimmed2(*input.acd_min[i]) + " minutes" : std::string("NULL");
  };
  auto frac_cell = [](const std::optional<std::array<double, 2>>& v, std::size_t i) {
    return v ? pct1((*v)[i]) : std::string("-");
  };
  const std::vector<Line> lines{
      {"Minimal load for measuring (0%-50%)", pct1(input.load_min), pct1(input.load_min)},
      {"Priority of the clone routes in billing (1-9)",
       "Preference " + std::to_string(input.pref[0].value()),
       "Preference " + std::to_string(input.pref[1].value())},
      {"ACD (in minutes)", acd_cell(0), acd_cell(1)},
      {"Rank (0-1)", frac_cell(result.rank, 0), frac_cell(result.rank, 1)},
      {"Desired load on clone routes (%)", frac_cell(result.load, 0), frac_cell(result.load, 1)},
      {"Rejection rate (%)", format_fixed(result.reject_pct[0], 1) + "%",
       format_fixed(result.reject_pct[1], 1) + "%"},
  };

  if (format == CalcFormat::Html) {
    std::ostringstream out;
    out << "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n"
        << "<title>Rejection calculator</title>\n</head>\n<body>\n<table>\n"
        << "<tr><th></th><th>Route A</th><th>Route B</th></tr>\n";
    for (const auto& l : lines) {
      out << "<tr><td>" << html_escape(l.label) << "</td><td>" << html_escape(l.a) << "</td><td>"
          << html_escape(l.b) << "</td></tr>\n";
    }
    out << "</table>\n</body>\n</html>\n";
    return out.str();
  }

  std::size_t w0 = 0, w1 = std::string_view("Route A").size();
  for (const auto& l : lines) {
    w0 = std::max(w0, l.label.size());
    w1 = std::max(w1, l.a.size());
  }
  auto pad = [](std::string s, std::size_t w) {
    s.resize(std::max(s.size(), w), ' ');
    return s;
  };
  std::string out = pad("", w0) + "  " + pad("Route A", w1) + "  Route B\n";
  for (const auto& l : lines) out += pad(l.label, w0) + "  " + pad(l.a, w1) + "  " + l.b + "\n";
  return out;
}

std::string render_calc_trace(const RejectionResult& result, const QualityInput& input,
                              const VendorPair& vendors) {
  std::ostringstream out;
  const auto tag = [&](std::string_view name, std::size_t i) {
    return std::string(name) + "[" + std::to_string(vendors[i].value) + "] = ";
  };
  out << "Load_min = " << general(input.load_min, 12) << '\n';
  for (std::size_t i = 0; i < 2; ++i) out << tag("Pref", i) << input.pref[i].value() << '\n';
  for (std::size_t i = 0; i < 2; ++i) {
    out << tag("ACD", i) << (input.acd_min[i] ? general(*input.acd_min[i], 12) : "NULL") << '\n';
  }
  if (result.rank && result.load) {
    for (std::size_t i = 0; i < 2; ++i) out << tag("Rank", i) << general((*result.rank)[i], 12) << '\n';
    for (std::size_t i = 0; i < 2; ++i) out << tag("load", i) << general((*result.load)[i], 10) << '\n';
  }
  for (std::size_t i = 0; i < 2; ++i) {
    out << tag("Reject", i) << format_fixed(result.stored_reject_pct(i), 2) << "%\n";
  }
  return out.str();
}

nlohmann::json history_to_json(std::span<const IntervalRecord> history, const VendorPair& vendors) {
  json intervals = json::array();
  for (const auto& rec : history) {
    json j;
    j["opened_at"] = format_timestamp(rec.opened_at);
    j["closed_at"] = format_timestamp(rec.closed_at);
    j["prefs"] = {rec.prefs[0].value(), rec.prefs[1].value()};
    j["stats"] = {stats_to_json(rec.stats[0]), stats_to_json(rec.stats[1])};
    j["max_idx"] = rec.result.max_idx ? json(*rec.result.max_idx) : json(nullptr);
    j["rank"] = optional_pair(rec.result.rank);
    j["load"] = optional_pair(rec.result.load);
    j["reject_pct"] = rec.result.reject_pct;
    j["received"] = rec.counters.received;
    j["rejected"] = rec.counters.rejected;
    intervals.push_back(std::move(j));
  }
  return {{"vendors", {vendors[0].value, vendors[1].value}}, {"intervals", std::move(intervals)}};
}

History history_from_json(const nlohmann::json& doc) {
  History h;
  try {
    const auto& v = doc.at("vendors");
    h.vendors = {VendorId{v.at(0).get<std::uint32_t>()}, VendorId{v.at(1).get<std::uint32_t>()}};
    for (const auto& j : doc.at("intervals")) {
      IntervalRecord rec;
      rec.opened_at = parse_timestamp(j.at("opened_at").get<std::string>());
      rec.closed_at = parse_timestamp(j.at("closed_at").get<std::string>());
      rec.prefs = {Preference{j.at("prefs").at(0).get<int>()},
                   Preference{j.at("prefs").at(1).get<int>()}};
      rec.stats = {stats_from_json(j.at("stats").at(0)), stats_from_json(j.at("stats").at(1))};
      if (!j.at("max_idx").is_null()) rec.result.max_idx = j.at("max_idx").get<std::size_t>();
      if (!j.at("rank").is_null()) rec.result.rank = j.at("rank").get<std::array<double, 2>>();
      if (!j.at("load").is_null()) rec.result.load = j.at("load").get<std::array<double, 2>>();
      rec.result.reject_pct = j.at("reject_pct").get<std::array<double, 2>>();
      rec.counters.received = j.at("received").get<std::array<std::uint64_t, 2>>();
      rec.counters.rejected = j.at("rejected").get<std::array<std::uint64_t, 2>>();
      h.intervals.push_back(std::move(rec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed interval history: ") + e.what());
  }
  return h;
}

}  // namespace acdroute
