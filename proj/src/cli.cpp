#include "acdroute/cli.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "acdroute/aggregate.hpp"
#include "acdroute/report.hpp"
#include "acdroute/sim.hpp"
#include "acdroute/store.hpp"

namespace acdroute::cli {

namespace fs = std::filesystem;

namespace {

/// Bad command-line values; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_pair(const std::string& text, std::string_view flag) {
  const auto comma = text.find(',');
  if (comma == std::string::npos || text.find(',', comma + 1) != std::string::npos) {
    throw UsageError(std::string(flag) + " expects two comma-separated values, got '" + text + "'");
  }
  return {text.substr(0, comma), text.substr(comma + 1)};
}

template <typename T>
T parse_value(const std::string& text, std::string_view flag) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw UsageError("bad value '" + text + "' for " + std::string(flag));
  }
  return v;
}

std::array<std::optional<double>, 2> parse_acd_pair(const std::string& text) {
  std::array<std::optional<double>, 2> out;
  const auto parts = split_pair(text, "--acd");
  for (std::size_t i = 0; i < 2; ++i) {
    if (parts[i] == "NULL" || parts[i] == "null") continue;
    out[i] = parse_value<double>(parts[i], "--acd");
  }
  return out;
}

PreferencePair parse_pref_pair(const std::string& text) {
  const auto parts = split_pair(text, "--pref");
  try {
    return {Preference{parse_value<int>(parts[0], "--pref")},
            Preference{parse_value<int>(parts[1], "--pref")}};
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
}

VendorPair parse_vendor_pair(const std::string& text) {
  const auto parts = split_pair(text, "--vendors");
  return {VendorId{parse_value<std::uint32_t>(parts[0], "--vendors")},
          VendorId{parse_value<std::uint32_t>(parts[1], "--vendors")}};
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  f.close();
  if (!f) throw StorageError("cannot write " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw StorageError("cannot create " + dir.string() + ": " + ec.message());
}

void write_tables(const fs::path& dir, std::span<const IntervalRecord> history,
                  const VendorPair& vendors, const std::vector<TableFormat>& formats) {
  for (const auto f : formats) {
    write_file(dir / ("interval_table." + std::string(extension(f))),
               render_interval_table(history, vendors, f));
  }
}

const std::vector<TableFormat> kAllFormats{TableFormat::Html, TableFormat::Csv, TableFormat::Json};

std::string describe(const IntervalRecord& rec, const VendorPair& vendors) {
  std::string s = "closed " + format_timestamp(rec.closed_at);
  for (std::size_t i = 0; i < 2; ++i) {
    s += "  " + std::to_string(vendors[i].value) + ": calls=" + std::to_string(rec.stats[i].calls) +
         " acd=" + (rec.stats[i].acd_min ? format_fixed(*rec.stats[i].acd_min, 2) : "NULL") +
         " reject=" + format_fixed(rec.result.stored_reject_pct(i), 2);
  }
  return s;
}

// compute

struct ComputeArgs {
  std::string acd;
  std::string pref = "9,8";
  double load_min = kDefaultLoadMin;
  std::string vendors = "55,62";
  std::string out_dir;
};

int cmd_compute(const ComputeArgs& a, std::ostream& out) {
  QualityInput input;
  input.acd_min = parse_acd_pair(a.acd);
  input.pref = parse_pref_pair(a.pref);
  input.load_min = a.load_min;
  const VendorPair vendors = parse_vendor_pair(a.vendors);
  RejectionResult result;
  try {
    result = compute_rejection(input);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }
  const std::string trace = render_calc_trace(result, input, vendors);
  const std::string table = render_calc_breakdown(result, input, CalcFormat::Text);
  out << trace << '\n' << table;
  if (!a.out_dir.empty()) {
    ensure_dir(a.out_dir);
    write_file(fs::path(a.out_dir) / "calc.txt", trace + "\n" + table);
    write_file(fs::path(a.out_dir) / "calc.html",
               render_calc_breakdown(result, input, CalcFormat::Html));
  }
  return kExitOk;
}

// aggregate

struct AggregateArgs {
  std::string cdr_file;
  std::string out_dir;
  std::string vendors;
  std::string pref = "9,8";
  double load_min = kDefaultLoadMin;
  int tick_min = 10;
  int min_age_min = 20;
  std::size_t min_calls = 20;
  std::string prefix = "37410";
};

IntervalCounters count_attempts(std::span<const CallRecord> records, const VendorPair& vendors) {
  IntervalCounters c;
  for (const auto& r : records) {
    const auto i = find_index(vendors, r.vendor);
    if (!i) continue;
    ++(r.rejected_by_router ? c.rejected : c.received)[*i];
  }
  return c;
}

int cmd_aggregate(const AggregateArgs& a, std::ostream& out, std::ostream& err) {
  std::ifstream in(a.cdr_file);
  if (!in) {
    err << "error: cannot open " << a.cdr_file << '\n';
    return kExitFailure;
  }
  CdrCsv csv = read_cdr_csv(in);
  for (const auto& e : csv.errors) err << a.cdr_file << ':' << e.line << ": " << e.message << '\n';

  // Total order so that row order in the input never matters.
  auto& records = csv.records;
  std::sort(records.begin(), records.end(), [](const CallRecord& x, const CallRecord& y) {
    if (x.disconnect_time != y.disconnect_time) return x.disconnect_time < y.disconnect_time;
    return format_cdr_line(x) < format_cdr_line(y);
  });

  VendorPair vendors{VendorId{55}, VendorId{62}};
  if (!a.vendors.empty()) {
    vendors = parse_vendor_pair(a.vendors);
  } else if (!records.empty()) {
    std::vector<std::uint32_t> ids;
    for (const auto& r : records) ids.push_back(r.vendor.value);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (ids.size() != 2) {
      throw UsageError("CDR file has " + std::to_string(ids.size()) +
                       " vendors; pass --vendors to select the routing group");
    }
    vendors = {VendorId{ids[0]}, VendorId{ids[1]}};
  }

  GroupConfig group{vendors, parse_pref_pair(a.pref), a.load_min, a.prefix};
  IntervalPolicy policy{Seconds{a.tick_min * 60}, Seconds{a.min_age_min * 60}, a.min_calls};
  try {
    validate(group);
    validate(policy);
  } catch (const ValidationError& e) {
    throw UsageError(e.what());
  }

  MemoryStore store;
  for (const auto& r : records) store.append_cdr(r);

  std::vector<IntervalRecord> history;
  if (!records.empty()) {
    const auto tick = policy.tick_period;
    const Timestamp first = records.front().disconnect_time;
    const Timestamp last = records.back().disconnect_time;
    const Timestamp opened = Timestamp{(first.time_since_epoch() / tick) * tick};
    Aggregator agg(group, policy, store, opened);
    // Keep ticking past the last CDR until the open interval is old enough to close.
    const Timestamp horizon = last + policy.min_age + tick;
    Timestamp now = opened + tick;
    for (; now <= horizon; now += tick) {
      const Timestamp period_start = agg.state().opened_at;
      auto rec = agg.on_tick(now, [&] {
        return count_attempts(store.query_cdrs(std::nullopt, {period_start, now}), vendors);
      });
      if (rec) out << describe(*rec, vendors) << '\n';
    }
    agg.finish(count_attempts(store.query_cdrs(std::nullopt, {agg.state().opened_at, now}), vendors));
    history = agg.history();
  }
  out << history.size() << " closed interval(s)\n";

  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  std::ostringstream acd;
  const auto rows = store.acd_rows();
  write_acd_csv(acd, rows);
  write_file(dir / "acd_vendors.csv", acd.str());
  write_file(dir / "history.json", history_to_json(history, vendors).dump(2) + "\n");
  write_tables(dir, history, vendors, kAllFormats);
  return csv.errors.empty() ? kExitOk : kExitFailure;
}

// simulate

struct SimulateArgs {
  std::string scenario;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  bool disable_admission = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err) {
  ScenarioConfig config;
  try {
    config = load_scenario(a.scenario);
  } catch (const ValidationError& e) {
    err << "error: " << a.scenario << ": " << e.what() << '\n';
    return kExitFailure;
  }
  if (a.seed) config.seed = *a.seed;
  if (a.disable_admission) config.admission_enabled = false;

  const ScenarioResult result = run_scenario(config);
  const GroupConfig group = config.group();

  ensure_dir(a.out_dir);
  const fs::path dir(a.out_dir);
  write_file(dir / "scenario.conf", format_scenario(config));
  {
    std::ostringstream s;
    write_cdr_csv(s, result.cdrs);
    write_file(dir / "cdrs.csv", s.str());
  }
  {
    std::ostringstream s;
    write_acd_csv(s, result.acd_rows);
    write_file(dir / "acd_vendors.csv", s.str());
  }
  {
    std::ostringstream s;
    s << "call_id,time,vendor,outcome,code,targets_epoch\n";
    for (const auto& d : result.decision_log) {
      s << d.call_id << ',' << format_timestamp(d.time) << ',' << d.vendor.value << ','
        << (d.decision.rejected() ? "reject" : "accept") << ',' << d.decision.failure_code << ','
        << d.targets_epoch << '\n';
    }
    write_file(dir / "decisions.csv", s.str());
  }

  std::array<double, 2> answered_minutes{0.0, 0.0};
  for (const auto& r : result.cdrs) {
    if (const auto i = find_index(group.vendors, r.vendor)) {
      answered_minutes[*i] += static_cast<double>(r.duration_s) / 60.0;
    }
  }
  nlohmann::json summary = history_to_json(result.interval_history, group.vendors);
  summary["seed"] = config.seed;
  summary["admission"] = config.admission_enabled;
  summary["calls"] = result.calls;
  summary["abandoned"] = result.abandoned;
  summary["cdrs"] = result.cdrs.size();
  summary["decisions"] = result.decision_log.size();
  summary["answered_minutes"] = answered_minutes;
  summary["traffic_share"] = result.traffic_share;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  write_tables(dir, result.interval_history, group.vendors, kAllFormats);

  out << "calls=" << result.calls << " abandoned=" << result.abandoned
      << " intervals=" << result.interval_history.size() << '\n';
  if (!result.interval_history.empty()) {
    out << "last " << describe(result.interval_history.back(), group.vendors) << '\n';
  }
  return kExitOk;
}

// report

struct ReportArgs {
  std::string history;
  std::string out_dir;
  std::string format = "all";
};

int cmd_report(const ReportArgs& a, std::ostream& out, std::ostream& err) {
  std::vector<TableFormat> formats;
  if (a.format == "all") {
    formats = kAllFormats;
  } else {
    try {
      formats.push_back(parse_table_format(a.format));
    } catch (const ValidationError& e) {
      throw UsageError(e.what());
    }
  }
  std::ifstream in(a.history);
  if (!in) {
    err << "error: cannot open " << a.history << '\n';
    return kExitFailure;
  }
  History h;
  try {
    h = history_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << a.history << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const ValidationError& e) {
    err << "error: " << a.history << ": " << e.what() << '\n';
    return kExitFailure;
  }
  ensure_dir(a.out_dir);
  write_tables(a.out_dir, h.intervals, h.vendors, formats);
  out << "rendered " << h.intervals.size() << " interval(s)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quality-driven call routing: rejection calculator, CDR aggregation, simulation"};
  app.name(args.empty() ? "acdroute" : args[0]);
  app.require_subcommand(1);
  std::uint64_t seed = 1;

  ComputeArgs compute;
  auto* c = app.add_subcommand("compute", "Rejection percentages for an ACD pair");
  c->add_option("--acd", compute.acd, "ACD in minutes per vendor, e.g. 8.67,0.6 (NULL for none)")
      ->required();
  c->add_option("--pref", compute.pref, "Billing preferences 1-9")->capture_default_str();
  c->add_option("--load-min", compute.load_min, "Minimal load of the weaker route, [0, 0.5)")
      ->capture_default_str();
  c->add_option("--vendors", compute.vendors, "Vendor ids for the trace")->capture_default_str();
  c->add_option("--out", compute.out_dir, "Also write calc.txt and calc.html here");
  c->add_option("--seed", seed, "Accepted for uniformity; unused");

  AggregateArgs aggregate;
  auto* g = app.add_subcommand("aggregate", "Replay interval ticks over a CDR file");
  g->add_option("--cdr", aggregate.cdr_file, "CDR CSV file")->required();
  g->add_option("--out", aggregate.out_dir, "Output directory")->required();
  g->add_option("--vendors", aggregate.vendors, "Routing group, e.g. 55,62 (default: from file)");
  g->add_option("--pref", aggregate.pref, "Billing preferences")->capture_default_str();
  g->add_option("--load-min", aggregate.load_min, "Minimal load")->capture_default_str();
  g->add_option("--tick-min", aggregate.tick_min, "Tick period, minutes")->capture_default_str();
  g->add_option("--min-age-min", aggregate.min_age_min, "Minimum interval length, minutes")
      ->capture_default_str();
  g->add_option("--min-calls", aggregate.min_calls, "Minimum ended calls per interval")
      ->capture_default_str();
  g->add_option("--prefix", aggregate.prefix, "Destination prefix")->capture_default_str();
  g->add_option("--seed", seed, "Accepted for uniformity; unused");

  SimulateArgs simulate;
  auto* s = app.add_subcommand("simulate", "Run a traffic scenario through the routing loop");
  s->add_option("--scenario", simulate.scenario, "Scenario file")->required();
  s->add_option("--out", simulate.out_dir, "Output directory")->required();
  s->add_option("--seed", simulate.seed, "Override the scenario seed");
  s->add_flag("--disable-admission", simulate.disable_admission,
              "Never reject (negative control)");

  ReportArgs report;
  auto* r = app.add_subcommand("report", "Render the interval table from a history file");
  r->add_option("--history", report.history, "history.json or summary.json")->required();
  r->add_option("--out", report.out_dir, "Output directory")->required();
  r->add_option("--format", report.format, "html, csv, json or all")->capture_default_str();
  r->add_option("--seed", seed, "Accepted for uniformity; unused");

  std::vector<std::string> reversed(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c->parsed()) return cmd_compute(compute, out);
    if (g->parsed()) return cmd_aggregate(aggregate, out, err);
    if (s->parsed()) return cmd_simulate(simulate, out, err);
    if (r->parsed()) return cmd_report(report, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace acdroute::cli
