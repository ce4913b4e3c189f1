#include "acdroute/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <queue>
#include <sstream>

namespace acdroute {

// DurationModel

namespace {

std::vector<std::string> split_ws(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> out;
  std::string token;
  while (in >> token) out.push_back(token);
  return out;
}

double to_double(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

template <typename Int>
Int to_int(std::string_view text, std::string_view what) {
  Int v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
    throw ValidationError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return v;
}

std::string shortest(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DurationModel DurationModel::parse(std::string_view text) {
  const auto t = split_ws(text);
  if (t.empty()) throw ValidationError("empty duration model");
  DurationModel m;
  if (t[0] == "exponential" && t.size() == 2) {
    m = exponential(to_double(t[1], "exponential mean"));
  } else if (t[0] == "uniform" && t.size() == 3) {
    m = uniform(to_double(t[1], "uniform low"), to_double(t[2], "uniform high"));
  } else if (t[0] == "constant" && t.size() == 2) {
    m = constant(to_double(t[1], "constant"));
  } else {
    throw ValidationError("bad duration model '" + std::string(text) + "'");
  }
  m.validate();
  return m;
}

std::string DurationModel::to_string() const {
  switch (family) {
    case Family::Exponential: return "exponential " + shortest(a);
    case Family::Uniform: return "uniform " + shortest(a) + " " + shortest(b);
    case Family::Constant: return "constant " + shortest(a);
  }
  return {};
}

double DurationModel::mean_s() const {
  return family == Family::Uniform ? (a + b) / 2.0 : a;
}

double DurationModel::sample(Rng& rng) const {
  switch (family) {
    case Family::Exponential: return acdroute::exponential(rng, a);
    case Family::Uniform: return a + (b - a) * uniform01(rng);
    case Family::Constant: return a;
  }
  return a;
}

void DurationModel::validate() const {
  const bool ok = family == Family::Uniform ? (std::isfinite(a) && std::isfinite(b) && a >= 0 && b >= a)
                                            : (std::isfinite(a) && a >= 0);
  if (!ok) throw ValidationError("invalid duration model: " + to_string());
}

void VendorModel::validate() const {
  if (!(answer_prob >= 0.0 && answer_prob <= 1.0)) {
    throw ValidationError("answer_prob must be in [0, 1]");
  }
  duration.validate();
  if (!triggers_failover(classify_response(failure_code))) {
    throw ValidationError("vendor failure code must be 4xx, 5xx or 6xx");
  }
}

std::string_view to_string(VendorKind kind) {
  return kind == VendorKind::Honest ? "honest" : "fas";
}

LegOutcome vendor_leg(const VendorModel& model, Rng& rng) {
  if (uniform01(rng) < model.answer_prob) {
    const double s = model.duration.sample(rng);
    const auto secs = std::max<std::int64_t>(1, std::llround(s));
    return {ResponseClass::Success2xx, 200, secs};
  }
  return {classify_response(model.failure_code), model.failure_code, 0};
}

RouteStep billing_route(const PreferencePair& prefs, std::span<const Attempt> history) {
  const std::size_t preferred = prefs[0] > prefs[1] ? 0 : 1;
  if (history.empty()) return {RouteStep::Kind::Try, preferred};
  const Attempt& last = history.back();
  if (last.response == ResponseClass::Success2xx) return {RouteStep::Kind::Connected, last.vendor_idx};
  if (last.response == ResponseClass::Provisional1xx) {
    throw ValidationError("attempt history must hold final responses only");
  }
  // A redirect is final but is not a failure signal, so billing does not fail over.
  if (!triggers_failover(last.response)) return {RouteStep::Kind::Abandoned, last.vendor_idx};
  if (history.size() >= 2) return {RouteStep::Kind::Abandoned, 0};
  return {RouteStep::Kind::Try, 1 - last.vendor_idx};
}

// ScenarioConfig

void ScenarioConfig::validate() const {
  if (!(arrival_rate_per_min > 0.0 && std::isfinite(arrival_rate_per_min))) {
    throw ValidationError("arrival_rate_per_min must be positive");
  }
  if (duration <= Seconds{0}) throw ValidationError("duration must be positive");
  for (const auto& v : vendors) v.model.validate();
  acdroute::validate(group());
  acdroute::validate(policy);
  if (rejection_ttl <= Seconds{0}) throw ValidationError("rejection_ttl must be positive");
  if (!triggers_failover(classify_response(reject_code))) {
    throw ValidationError("reject_code must be 4xx, 5xx or 6xx");
  }
}

GroupConfig ScenarioConfig::group() const {
  return GroupConfig{{vendors[0].id, vendors[1].id},
                     {vendors[0].pref, vendors[1].pref},
                     load_min,
                     prefix};
}

ScenarioConfig honest_vs_fas_scenario() {
  ScenarioConfig c;
  c.seed = 1;
  c.arrival_rate_per_min = 8.0;
  c.duration = Seconds{24 * 3600};
  c.vendors[0] = {VendorId{55}, Preference{9},
                  VendorModel{VendorKind::FalseAnswerSupervision, 0.9,
                              DurationModel::exponential(36.0), 503}};
  c.vendors[1] = {VendorId{62}, Preference{8},
                  VendorModel{VendorKind::Honest, 0.95, DurationModel::exponential(520.2), 480}};
  return c;
}

ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig c = ScenarioConfig{};
  std::map<std::string, std::string> seen;
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    auto fail = [&](const std::string& msg) {
      throw ValidationError("scenario line " + std::to_string(lineno) + ": " + msg);
    };
    if (eq == std::string_view::npos) fail("expected key = value");
    const std::string key{trim(line.substr(0, eq))};
    const std::string value{trim(line.substr(eq + 1))};
    if (!seen.emplace(key, value).second) fail("duplicate key '" + key + "'");
    try {
      if (key == "seed") {
        c.seed = to_int<std::uint64_t>(value, key);
      } else if (key == "arrival_rate_per_min") {
        c.arrival_rate_per_min = to_double(value, key);
      } else if (key == "duration_min") {
        c.duration = Seconds{to_int<std::int64_t>(value, key) * 60};
      } else if (key == "start") {
        c.start = parse_timestamp(value);
      } else if (key == "load_min") {
        c.load_min = to_double(value, key);
      } else if (key == "tick_min") {
        c.policy.tick_period = Seconds{to_int<std::int64_t>(value, key) * 60};
      } else if (key == "min_interval_min") {
        c.policy.min_age = Seconds{to_int<std::int64_t>(value, key) * 60};
      } else if (key == "min_interval_calls") {
        c.policy.min_calls = to_int<std::size_t>(value, key);
      } else if (key == "prefix") {
        c.prefix = value;
      } else if (key == "rejection_ttl_s") {
        c.rejection_ttl = Seconds{to_int<std::int64_t>(value, key)};
      } else if (key == "reject_code") {
        c.reject_code = to_int<int>(value, key);
      } else if (key == "admission") {
        if (value != "on" && value != "off") fail("admission must be on or off");
        c.admission_enabled = value == "on";
      } else if (key.starts_with("vendor.") && key.size() > 9 && (key[7] == '0' || key[7] == '1') &&
                 key[8] == '.') {
        auto& v = c.vendors[static_cast<std::size_t>(key[7] - '0')];
        const std::string field = key.substr(9);
        if (field == "id") {
          v.id = VendorId{to_int<std::uint32_t>(value, key)};
        } else if (field == "pref") {
          v.pref = Preference{to_int<int>(value, key)};
        } else if (field == "kind") {
          if (value == "honest") {
            v.model.kind = VendorKind::Honest;
          } else if (value == "fas") {
            v.model.kind = VendorKind::FalseAnswerSupervision;
          } else {
            fail("kind must be honest or fas");
          }
        } else if (field == "answer_prob") {
          v.model.answer_prob = to_double(value, key);
        } else if (field == "duration") {
          v.model.duration = DurationModel::parse(value);
        } else if (field == "failure_code") {
          v.model.failure_code = to_int<int>(value, key);
        } else {
          fail("unknown key '" + key + "'");
        }
      } else {
        fail("unknown key '" + key + "'");
      }
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      if (msg.starts_with("scenario line")) throw;
      fail(msg);
    }
  }
  c.validate();
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  return parse_scenario(in);
}

std::string format_scenario(const ScenarioConfig& c) {
  std::ostringstream out;
  out << "seed = " << c.seed << '\n'
      << "arrival_rate_per_min = " << shortest(c.arrival_rate_per_min) << '\n'
      << "duration_min = " << c.duration.count() / 60 << '\n'
      << "start = " << format_timestamp(c.start) << '\n'
      << "load_min = " << shortest(c.load_min) << '\n'
      << "tick_min = " << c.policy.tick_period.count() / 60 << '\n'
      << "min_interval_min = " << c.policy.min_age.count() / 60 << '\n'
      << "min_interval_calls = " << c.policy.min_calls << '\n'
      << "prefix = " << c.prefix << '\n'
      << "rejection_ttl_s = " << c.rejection_ttl.count() << '\n'
      << "reject_code = " << c.reject_code << '\n'
      << "admission = " << (c.admission_enabled ? "on" : "off") << '\n';
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& v = c.vendors[i];
    const std::string p = "vendor." + std::to_string(i) + ".";
    out << p << "id = " << v.id.value << '\n'
        << p << "pref = " << v.pref.value() << '\n'
        << p << "kind = " << to_string(v.model.kind) << '\n'
        << p << "answer_prob = " << shortest(v.model.answer_prob) << '\n'
        << p << "duration = " << v.model.duration.to_string() << '\n'
        << p << "failure_code = " << v.model.failure_code << '\n';
  }
  return out.str();
}

std::uint64_t admission_seed(const ScenarioConfig& config) { return mix_seed(config.seed, 3); }

// Event loop

namespace {

struct Event {
  enum class Kind { Arrival, CallEnded, Tick };

  Timestamp time;
  std::uint64_t seq;
  Kind kind;
  std::size_t payload;  // index into pending CDRs for CallEnded

  bool operator>(const Event& other) const {
    return time != other.time ? time > other.time : seq > other.seq;
  }
};

class Simulation {
 public:
  explicit Simulation(const ScenarioConfig& config)
      : config_(config),
        group_(config.group()),
        end_(config.start + config.duration),
        arrival_rng_(mix_seed(config.seed, 0)),
        leg_rng_{Rng(mix_seed(config.seed, 1)), Rng(mix_seed(config.seed, 2))},
        admission_(AdmissionConfig{group_.vendors, admission_seed(config), config.rejection_ttl,
                                   config.reject_code}),
        aggregator_(group_, config.policy, store_, config.start) {}

  ScenarioResult run() {
    next_arrival_s_ = 0.0;
    schedule_next_arrival();
    for (Timestamp t = config_.start + config_.policy.tick_period; t <= end_;
         t += config_.policy.tick_period) {
      push(t, Event::Kind::Tick, 0);
    }
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      queue_.pop();
      switch (ev.kind) {
        case Event::Kind::Arrival:
          handle_arrival(ev.time);
          schedule_next_arrival();
          break;
        case Event::Kind::CallEnded:
          store_.append_cdr(pending_[ev.payload]);
          result_.cdrs.push_back(pending_[ev.payload]);
          break;
        case Event::Kind::Tick:
          handle_tick(ev.time);
          break;
      }
    }
    aggregator_.finish(admission_.counters());
    result_.interval_history = aggregator_.history();
    result_.acd_rows = store_.acd_rows();
    for (const auto& rec : result_.interval_history) {
      const double a = rec.stats[0].total_minutes;
      const double b = rec.stats[1].total_minutes;
      const double total = a + b;
      result_.traffic_share.push_back(total > 0 ? std::array{a / total, b / total}
                                                : std::array{0.0, 0.0});
    }
    return std::move(result_);
  }

 private:
  void push(Timestamp t, Event::Kind kind, std::size_t payload) {
    queue_.push(Event{t, seq_++, kind, payload});
  }

  void schedule_next_arrival() {
    next_arrival_s_ += exponential(arrival_rng_, 60.0 / config_.arrival_rate_per_min);
    const Timestamp t = config_.start + Seconds{static_cast<std::int64_t>(next_arrival_s_)};
    if (t < end_) push(t, Event::Kind::Arrival, 0);
  }

  void emit_cdr(CallRecord record) {
    const Timestamp when = record.disconnect_time;
    pending_.push_back(std::move(record));
    push(when, Event::Kind::CallEnded, pending_.size() - 1);
  }

  void handle_arrival(Timestamp now) {
    char id[32];
    std::snprintf(id, sizeof id, "c%07llu", static_cast<unsigned long long>(++result_.calls));
    const std::string call_id = id;
    std::vector<Attempt> history;
    while (true) {
      const RouteStep step = billing_route(group_.prefs, history);
      if (step.kind == RouteStep::Kind::Connected) return;
      if (step.kind == RouteStep::Kind::Abandoned) {
        ++result_.abandoned;
        return;
      }
      const std::size_t v = step.vendor_idx;
      const VendorId vendor = group_.vendors[v];
      if (config_.admission_enabled) {
        const Decision d = admission_.admit(call_id, vendor, now);
        result_.decision_log.push_back({call_id, now, vendor, d, epoch_});
        if (d.rejected()) {
          emit_cdr({call_id, vendor, now, now, 0, DisconnectCause::other(d.failure_code), true});
          history.push_back({v, classify_response(d.failure_code)});
          continue;
        }
      }
      const LegOutcome leg = vendor_leg(config_.vendors[v].model, leg_rng_[v]);
      if (leg.response == ResponseClass::Success2xx) {
        emit_cdr({call_id, vendor, now, now + Seconds{leg.duration_s}, leg.duration_s,
                  DisconnectCause::normal(), false});
      } else {
        emit_cdr({call_id, vendor, now, now, 0, DisconnectCause::no_answer(), false});
      }
      history.push_back({v, leg.response});
    }
  }

  void handle_tick(Timestamp now) {
    auto record = aggregator_.on_tick(now, [this] { return admission_.drain_counters(); });
    if (record && config_.admission_enabled) {
      admission_.refresh_targets(record->result);
      ++epoch_;
    }
  }

  const ScenarioConfig& config_;
  GroupConfig group_;
  Timestamp end_;
  Rng arrival_rng_;
  std::array<Rng, 2> leg_rng_;
  MemoryStore store_;
  AdmissionState admission_;
  Aggregator aggregator_;
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  double next_arrival_s_ = 0.0;
  std::vector<CallRecord> pending_;
  std::size_t epoch_ = 0;
  ScenarioResult result_;
};

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config) {
  config.validate();
  return Simulation(config).run();
}

}  // namespace acdroute
