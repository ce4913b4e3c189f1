#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "acdroute/domain.hpp"
#include "acdroute/rejection.hpp"
#include "acdroute/store.hpp"

namespace acdroute {

/// Scheduler handed a time earlier than the interval start.
class ClockError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// When an interval may close. Defaults: 10 min ticks, at least 20 min and 20 calls.
struct IntervalPolicy {
  Seconds tick_period{600};
  Seconds min_age{1200};
  std::size_t min_calls = 20;
  friend bool operator==(const IntervalPolicy&, const IntervalPolicy&) = default;
};

void validate(const IntervalPolicy& policy);

/// Calls seen by the clone interfaces. `received` counts calls let through,
/// `rejected` counts calls refused to balance the load.
struct IntervalCounters {
  std::array<std::uint64_t, 2> received{0, 0};
  std::array<std::uint64_t, 2> rejected{0, 0};
  friend bool operator==(const IntervalCounters&, const IntervalCounters&) = default;
};

struct IntervalState {
  Timestamp opened_at;
  std::optional<Timestamp> closed_at;  // empty while open

  [[nodiscard]] bool is_open() const { return !closed_at.has_value(); }
};

enum class TickDecision { KeepOpen, Close };

/// Both minima must hold for the interval to close.
TickDecision tick(Timestamp now, const IntervalState& state, std::size_t calls_ended_in_interval,
                  const IntervalPolicy& policy = {});

/// Duration histogram and ACD of one vendor over one interval.
/// Bucket bounds are in seconds.
struct VendorIntervalStats {
  VendorId vendor;
  std::uint64_t bucket_zero = 0;
  std::uint64_t bucket_0_5 = 0;
  std::uint64_t bucket_5_30 = 0;
  std::uint64_t bucket_over_30 = 0;
  std::uint64_t calls = 0;
  double total_minutes = 0.0;
  std::optional<double> acd_min;  // total_minutes / answered calls

  [[nodiscard]] std::uint64_t answered() const { return calls - bucket_zero; }
};

/// Router-rejected attempts in `cdrs` are skipped; they never reached the vendor.
VendorIntervalStats vendor_stats(std::span<const CallRecord> cdrs, VendorId vendor);

/// Static description of one routing group.
struct GroupConfig {
  VendorPair vendors{VendorId{55}, VendorId{62}};
  PreferencePair prefs{Preference{9}, Preference{8}};
  double load_min = kDefaultLoadMin;
  std::string prefix = "37410";
};

void validate(const GroupConfig& group);

/// Everything known about one closed interval.
struct IntervalRecord {
  Timestamp opened_at;
  Timestamp closed_at;
  PreferencePair prefs;
  std::array<VendorIntervalStats, 2> stats;
  RejectionResult result;
  /// Clone-interface traffic while this record's targets were in force.
  IntervalCounters counters;
};

struct CloseOutcome {
  IntervalRecord record;
  IntervalState next;
};

/// Computes per-vendor statistics and the new rejection targets, writes the
/// two acd_vendors rows, and opens the next interval at `closed_at`.
/// `cdrs` are the records that ended inside the interval. A StorageError from
/// the store propagates and nothing is returned.
CloseOutcome close_interval(const IntervalState& state, Timestamp closed_at,
                            std::span<const CallRecord> cdrs, const GroupConfig& group,
                            Store& store);

/// Owns the open interval for one routing group and drives it from a tick schedule.
class Aggregator {
 public:
  Aggregator(GroupConfig group, IntervalPolicy policy, Store& store, Timestamp opened_at);

  /// Runs one scheduled tick. On close, `drain_counters` is called once to
  /// collect the clone-interface counters of the period that just ended.
  /// A persistence failure keeps the interval open and returns nothing.
  std::optional<IntervalRecord> on_tick(
      Timestamp now, const std::function<IntervalCounters()>& drain_counters = {});

  /// Attaches counters collected after the last close to the newest record.
  void finish(const IntervalCounters& live);

  [[nodiscard]] const IntervalState& state() const { return state_; }
  [[nodiscard]] const std::vector<IntervalRecord>& history() const { return history_; }
  [[nodiscard]] const GroupConfig& group() const { return group_; }
  [[nodiscard]] std::size_t persistence_failures() const { return persistence_failures_; }

 private:
  GroupConfig group_;
  IntervalPolicy policy_;
  Store& store_;
  IntervalState state_;
  std::vector<IntervalRecord> history_;
  std::size_t persistence_failures_ = 0;
};

}  // namespace acdroute
