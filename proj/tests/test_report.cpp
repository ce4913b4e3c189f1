#include "doctest.h"

#include <random>
#include <sstream>

#include "acdroute/report.hpp"
#include "acdroute/store.hpp"

using namespace acdroute;
using nlohmann::json;

namespace {

const VendorPair kVendors{VendorId{55}, VendorId{62}};
const PreferencePair kPrefs{Preference{9}, Preference{8}};

VendorIntervalStats stats(VendorId v, std::array<std::uint64_t, 4> buckets, double minutes,
                          std::optional<double> acd) {
  VendorIntervalStats s;
  s.vendor = v;
  s.bucket_zero = buckets[0];
  s.bucket_0_5 = buckets[1];
  s.bucket_5_30 = buckets[2];
  s.bucket_over_30 = buckets[3];
  s.calls = buckets[0] + buckets[1] + buckets[2] + buckets[3];
  s.total_minutes = minutes;
  s.acd_min = acd;
  return s;
}

IntervalRecord record(const char* closed, VendorIntervalStats a, VendorIntervalStats b,
                      IntervalCounters counters = {}) {
  IntervalRecord r;
  r.closed_at = parse_timestamp(closed);
  r.opened_at = r.closed_at - Seconds{1800};
  r.prefs = kPrefs;
  r.stats = {a, b};
  r.result = compute_rejection(QualityInput{{a.acd_min, b.acd_min}, kPrefs, 0.1});
  r.counters = counters;
  return r;
}

// Verification window: 10:30 then 11:00.
std::vector<IntervalRecord> verification_history() {
  return {
      record("2009-11-09 10:30:00", stats(VendorId{55}, {6, 0, 1, 2}, 108.2, 36.06),
             stats(VendorId{62}, {1, 0, 0, 5}, 90.5, 18.09), IntervalCounters{{13, 0}, {4, 0}}),
      record("2009-11-09 11:00:00", stats(VendorId{55}, {4, 6, 2, 1}, 1.6, 0.17),
             stats(VendorId{62}, {1, 3, 0, 1}, 3.2, 0.79)),
  };
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("interval table shows target balances newest first") {
  const auto history = verification_history();
  const auto rows = report_rows(history, kVendors);
  REQUIRE(rows.size() == 4);
  CHECK(format_timestamp_minutes(rows[0].date_time) == "2009-11-09 11:00");
  CHECK(*rows[0].target_balance_pct == 19);
  CHECK(*rows[1].target_balance_pct == 81);
  CHECK(*rows[2].target_balance_pct == 70);
  CHECK(*rows[3].target_balance_pct == 30);
  CHECK(rows[2].received == 13);
  CHECK(rows[2].rejected == 4);
  CHECK(rows[0].billing_priority == 9);

  const auto csv = render_interval_table(history, kVendors, TableFormat::Csv);
  const auto lines = split(csv, '\n');
  CHECK(lines[0] == kIntervalCsvHeader);
  CHECK(lines[1] == "2009-11-09 11:00,55,9,4,6,2,1,13,1.6,0.17,19,0,0");
  CHECK(lines[3] == "2009-11-09 10:30,55,9,6,0,1,2,9,108.2,36.06,70,13,4");

  const auto html = render_interval_table(history, kVendors, TableFormat::Html);
  CHECK(html.find("<td>19 %</td>") != std::string::npos);
  CHECK(html.find("<td>81 %</td>") != std::string::npos);
  CHECK(html.find("</html>") != std::string::npos);
}

TEST_CASE("target balances of one interval always add to 100") {
  // Loads 0.125 / 0.875 would round to 13 + 88.
  IntervalRecord r;
  r.prefs = kPrefs;
  r.result.load = std::array{0.125, 0.875};
  const std::vector<IntervalRecord> h{r};
  const auto rows = report_rows(h, kVendors);
  CHECK(*rows[0].target_balance_pct + *rows[1].target_balance_pct == 100);
}

TEST_CASE("missing targets render as empty cells") {
  const std::vector<IntervalRecord> h{record("2009-10-21 17:10:20",
                                             stats(VendorId{55}, {0, 0, 0, 3}, 3.87, 1.29),
                                             stats(VendorId{62}, {0, 0, 0, 0}, 0, std::nullopt))};
  const auto csv = render_interval_table(h, kVendors, TableFormat::Csv);
  CHECK(split(csv, '\n')[2] == "2009-10-21 17:10,62,8,0,0,0,0,0,0.0,,,0,0");
  const auto doc = json::parse(render_interval_table(h, kVendors, TableFormat::Json));
  CHECK(doc[1]["acd_min"].is_null());
  CHECK(doc[1]["target_balance_pct"].is_null());
}

TEST_CASE("empty history renders the header only") {
  const std::vector<IntervalRecord> none;
  CHECK(render_interval_table(none, kVendors, TableFormat::Csv) == std::string(kIntervalCsvHeader) + "\n");
  CHECK(json::parse(render_interval_table(none, kVendors, TableFormat::Json)).empty());
  const auto html = render_interval_table(none, kVendors, TableFormat::Html);
  CHECK(html.find("Target balance") != std::string::npos);
  CHECK(html.find("<td>") == std::string::npos);
}

TEST_CASE("csv and json renderings agree field by field") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint64_t> count(0, 40);
  std::uniform_real_distribution<double> minutes(0, 300), acd(0.01, 40);
  std::vector<IntervalRecord> history;
  Timestamp t = parse_timestamp("2009-11-30 20:20:00");
  for (int i = 0; i < 40; ++i, t += Seconds{1800}) {
    const bool missing = i % 7 == 3;
    auto r = record("2009-11-30 00:00:00",
                    stats(VendorId{55}, {count(rng), count(rng), count(rng), count(rng)}, minutes(rng), acd(rng)),
                    stats(VendorId{62}, {count(rng), count(rng), count(rng), count(rng)}, minutes(rng),
                          missing ? std::nullopt : std::optional{acd(rng)}),
                    IntervalCounters{{count(rng), count(rng)}, {count(rng), count(rng)}});
    r.closed_at = t;
    history.push_back(r);
  }
  const auto csv_lines = split(render_interval_table(history, kVendors, TableFormat::Csv), '\n');
  const auto doc = json::parse(render_interval_table(history, kVendors, TableFormat::Json));
  const auto keys = split(csv_lines[0], ',');
  REQUIRE(doc.size() + 1 == csv_lines.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto fields = split(csv_lines[i + 1], ',');
    REQUIRE(fields.size() == keys.size());
    for (std::size_t k = 0; k < keys.size(); ++k) {
      const auto& v = doc[i].at(keys[k]);
      CAPTURE(keys[k]);
      if (v.is_null()) {
        CHECK(fields[k].empty());
      } else if (v.is_string()) {
        CHECK(fields[k] == v.get<std::string>());
      } else {
        CHECK(std::stod(fields[k]) == v.get<double>());
      }
    }
  }
}

TEST_CASE("rendering is pure") {
  const auto h = verification_history();
  for (auto f : {TableFormat::Html, TableFormat::Csv, TableFormat::Json}) {
    CHECK(render_interval_table(h, kVendors, f) == render_interval_table(h, kVendors, f));
  }
}

TEST_CASE("unknown table format") {
  CHECK(parse_table_format("csv") == TableFormat::Csv);
  CHECK_THROWS_AS(parse_table_format("xml"), ValidationError);
}

TEST_CASE("calculator breakdown for ACD 8.67 vs 0.6") {
  const QualityInput in{{8.67, 0.6}, kPrefs, 0.1};
  const auto text = render_calc_breakdown(compute_rejection(in), in);
  auto row = [&](const std::string& label) {
    const auto pos = text.find(label);
    REQUIRE(pos != std::string::npos);
    return text.substr(pos, text.find('\n', pos) - pos);
  };
  CHECK(row("Minimal load").find("10.0%") != std::string::npos);
  CHECK(row("Priority").find("Preference 9") != std::string::npos);
  CHECK(row("ACD (in minutes)").find("8.67 minutes") != std::string::npos);
  CHECK(row("ACD (in minutes)").find("0.6 minutes") != std::string::npos);
  CHECK(row("Rank (0-1)").find("100.0%") != std::string::npos);
  CHECK(row("Rank (0-1)").find("6.9%") != std::string::npos);
  CHECK(row("Desired load").find("87.2%") != std::string::npos);
  CHECK(row("Desired load").find("12.8%") != std::string::npos);
  CHECK(row("Rejection rate").find("12.8%") != std::string::npos);
  CHECK(row("Rejection rate").find("0.0%") != std::string::npos);

  const auto html = render_calc_breakdown(compute_rejection(in), in, CalcFormat::Html);
  CHECK(html.find("<td>87.2%</td>") != std::string::npos);
}

TEST_CASE("calculator breakdown for equal ACDs") {
  const QualityInput in{{5.0, 5.0}, kPrefs, 0.1};
  const auto text = render_calc_breakdown(compute_rejection(in), in);
  const auto pos = text.find("Desired load");
  const auto line = text.substr(pos, text.find('\n', pos) - pos);
  CHECK(line.find("50.0%") != line.rfind("50.0%"));
}

TEST_CASE("calculator trace") {
  const QualityInput in{{8.67, 0.6}, kPrefs, 0.1};
  const auto trace = render_calc_trace(compute_rejection(in), in, kVendors);
  CHECK(trace ==
        "Load_min = 0.1\n"
        "Pref[55] = 9\n"
        "Pref[62] = 8\n"
        "ACD[55] = 8.67\n"
        "ACD[62] = 0.6\n"
        "Rank[55] = 1\n"
        "Rank[62] = 0.0692041522491\n"
        "load[55] = 0.8723183391\n"
        "load[62] = 0.1276816609\n"
        "Reject[55] = 12.77%\n"
        "Reject[62] = 0.00%\n");
}

TEST_CASE("displayed breakdown values equal the computation after rounding") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> acd(0.0, 30.0), lm(0.0, 0.49);
  std::uniform_int_distribution<int> pref(1, 9);
  for (int i = 0; i < 500; ++i) {
    const int pa = pref(rng), pb = pref(rng);
    if (pa == pb) continue;
    const QualityInput in{{acd(rng), acd(rng)}, {Preference{pa}, Preference{pb}}, lm(rng)};
    const auto r = compute_rejection(in);
    const auto text = render_calc_breakdown(r, in);
    auto cells = [&](const std::string& label) {
      const auto pos = text.find(label);
      std::istringstream line(text.substr(pos + label.size(), text.find('\n', pos) - pos - label.size()));
      double a = 0, b = 0;
      char pct = 0;
      line >> a >> pct >> b;
      return std::array{a, b};
    };
    const auto load = cells("Desired load on clone routes (%)");
    const auto rej = cells("Rejection rate (%)");
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(std::abs(load[k] - (*r.load)[k] * 100) <= 0.05 + 1e-9);
      CHECK(std::abs(rej[k] - r.reject_pct[k]) <= 0.05 + 1e-9);
    }
  }
}

TEST_CASE("history JSON keeps full precision") {
  auto h = verification_history();
  h.push_back(record("2009-11-09 11:30:00", stats(VendorId{55}, {2, 0, 0, 0}, 0, std::nullopt),
                     stats(VendorId{62}, {0, 0, 0, 4}, 12.345678901234, 3.0864197253085)));
  const auto back = history_from_json(json::parse(history_to_json(h, kVendors).dump()));
  CHECK(back.vendors == kVendors);
  REQUIRE(back.intervals.size() == h.size());
  for (std::size_t i = 0; i < h.size(); ++i) {
    CHECK(back.intervals[i].closed_at == h[i].closed_at);
    CHECK(back.intervals[i].stats[1].total_minutes == h[i].stats[1].total_minutes);
    CHECK(back.intervals[i].stats[1].acd_min == h[i].stats[1].acd_min);
    CHECK(back.intervals[i].result.load == h[i].result.load);
    CHECK(back.intervals[i].result.reject_pct == h[i].result.reject_pct);
    CHECK(back.intervals[i].counters == h[i].counters);
  }
  CHECK_THROWS_AS(history_from_json(json::parse(R"({"vendors":[1]})")), ValidationError);
}
