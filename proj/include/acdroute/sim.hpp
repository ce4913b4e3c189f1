#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acdroute/admission.hpp"
#include "acdroute/aggregate.hpp"
#include "acdroute/domain.hpp"
#include "acdroute/random.hpp"
#include "acdroute/store.hpp"

namespace acdroute {

/// Distribution of a call leg length, parameters in seconds.
struct DurationModel {
  enum class Family { Exponential, Uniform, Constant };

  Family family = Family::Exponential;
  double a = 60.0;  // mean (exponential), low bound (uniform), value (constant)
  double b = 0.0;   // high bound (uniform)

  static DurationModel exponential(double mean_s) { return {Family::Exponential, mean_s, 0.0}; }
  static DurationModel uniform(double lo_s, double hi_s) { return {Family::Uniform, lo_s, hi_s}; }
  static DurationModel constant(double s) { return {Family::Constant, s, 0.0}; }

  /// `exponential <mean>`, `uniform <lo> <hi>` or `constant <value>`.
  static DurationModel parse(std::string_view text);
  [[nodiscard]] std::string to_string() const;
  [[nodiscard]] double mean_s() const;
  [[nodiscard]] double sample(Rng& rng) const;
  void validate() const;

  friend bool operator==(const DurationModel&, const DurationModel&) = default;
};

enum class VendorKind { Honest, FalseAnswerSupervision };

/// Behaviour of a terminating vendor.
///
/// An honest vendor answers with `answer_prob` and talks for `duration`;
/// otherwise it signals `failure_code`. A false-answer vendor answers with
/// `answer_prob` (1 by default) and holds the deceived caller for `duration`
/// (seconds); the caller then hangs up. Answered legs last at least one second.
struct VendorModel {
  VendorKind kind = VendorKind::Honest;
  double answer_prob = 1.0;
  DurationModel duration = DurationModel::exponential(300.0);
  int failure_code = 480;

  void validate() const;
  friend bool operator==(const VendorModel&, const VendorModel&) = default;
};

struct LegOutcome {
  ResponseClass response;
  int code;
  std::int64_t duration_s;
};

LegOutcome vendor_leg(const VendorModel& model, Rng& rng);

/// A routing attempt the billing router already made for a call.
struct Attempt {
  std::size_t vendor_idx;
  ResponseClass response;
};

struct RouteStep {
  enum class Kind { Try, Connected, Abandoned };
  Kind kind;
  std::size_t vendor_idx = 0;  // for Try
};

/// Static-preference routing with signalling failover: the preferred vendor
/// first, the other one only after a 4xx/5xx/6xx, nothing after an answer.
RouteStep billing_route(const PreferencePair& prefs, std::span<const Attempt> history);

struct VendorSpec {
  VendorId id;
  Preference pref;
  VendorModel model;
  friend bool operator==(const VendorSpec&, const VendorSpec&) = default;
};

struct ScenarioConfig {
  std::uint64_t seed = 1;
  double arrival_rate_per_min = 4.0;
  Seconds duration{24 * 3600};
  Timestamp start = parse_timestamp("2009-11-30 00:00:00");
  std::array<VendorSpec, 2> vendors;
  double load_min = kDefaultLoadMin;
  IntervalPolicy policy;
  std::string prefix = "37410";
  Seconds rejection_ttl{3600};
  int reject_code = kDefaultRejectCode;
  bool admission_enabled = true;

  void validate() const;
  [[nodiscard]] GroupConfig group() const;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Honest vendor (ACD 8.67 min) against a preferred false-answer vendor (ACD 0.6 min).
ScenarioConfig honest_vs_fas_scenario();

/// Key/value text, `key = value` per line, `#` starts a comment.
ScenarioConfig parse_scenario(std::istream& in);
ScenarioConfig load_scenario(const std::string& path);
std::string format_scenario(const ScenarioConfig& config);

struct DecisionEntry {
  std::string call_id;
  Timestamp time;
  VendorId vendor;
  Decision decision;
  /// Number of targets refreshes that preceded this decision.
  std::size_t targets_epoch = 0;
};

struct ScenarioResult {
  std::vector<CallRecord> cdrs;  // in completion order
  std::vector<IntervalRecord> interval_history;
  std::vector<DecisionEntry> decision_log;
  /// Answered-minute share per vendor for each closed interval.
  std::vector<std::array<double, 2>> traffic_share;
  std::vector<AcdRow> acd_rows;
  std::uint64_t calls = 0;
  std::uint64_t abandoned = 0;
};

/// Seed of the admission PRNG derived from the scenario seed.
std::uint64_t admission_seed(const ScenarioConfig& config);

/// Runs the whole loop on a simulated clock. Same config, same result.
ScenarioResult run_scenario(const ScenarioConfig& config);

std::string_view to_string(VendorKind kind);

}  // namespace acdroute
