#include "acdroute/aggregate.hpp"

#include <algorithm>

namespace acdroute {

void validate(const IntervalPolicy& policy) {
  if (policy.tick_period <= Seconds{0}) throw ValidationError("tick period must be positive");
  if (policy.min_age < Seconds{0}) throw ValidationError("minimum interval age must be >= 0");
}

void validate(const GroupConfig& group) {
  validate_group(group.vendors, group.prefs);
  validate(QualityInput{{}, group.prefs, group.load_min});
  if (group.prefix.find_first_of(",\r\n") != std::string::npos) {
    throw ValidationError("prefix contains a delimiter");
  }
}

TickDecision tick(Timestamp now, const IntervalState& state, std::size_t calls_ended_in_interval,
                  const IntervalPolicy& policy) {
  if (now < state.opened_at) {
    throw ClockError("tick at " + format_timestamp(now) + " precedes interval start " +
                     format_timestamp(state.opened_at));
  }
  const bool old_enough = now - state.opened_at >= policy.min_age;
  const bool enough_calls = calls_ended_in_interval >= policy.min_calls;
  return old_enough && enough_calls ? TickDecision::Close : TickDecision::KeepOpen;
}

VendorIntervalStats vendor_stats(std::span<const CallRecord> cdrs, VendorId vendor) {
  VendorIntervalStats s;
  s.vendor = vendor;
  std::int64_t total_s = 0;
  for (const auto& r : cdrs) {
    if (r.vendor != vendor || r.rejected_by_router) continue;
    ++s.calls;
    total_s += r.duration_s;
    if (r.duration_s == 0) {
      ++s.bucket_zero;
    } else if (r.duration_s <= 5) {
      ++s.bucket_0_5;
    } else if (r.duration_s <= 30) {
      ++s.bucket_5_30;
    } else {
      ++s.bucket_over_30;
    }
  }
  s.total_minutes = static_cast<double>(total_s) / 60.0;
  if (s.answered() > 0) s.acd_min = s.total_minutes / static_cast<double>(s.answered());
  return s;
}

CloseOutcome close_interval(const IntervalState& state, Timestamp closed_at,
                            std::span<const CallRecord> cdrs, const GroupConfig& group,
                            Store& store) {
  IntervalRecord rec;
  rec.opened_at = state.opened_at;
  rec.closed_at = closed_at;
  rec.prefs = group.prefs;
  for (std::size_t i = 0; i < 2; ++i) rec.stats[i] = vendor_stats(cdrs, group.vendors[i]);
  rec.result = compute_rejection(
      QualityInput{{rec.stats[0].acd_min, rec.stats[1].acd_min}, group.prefs, group.load_min});

  std::array<AcdRow, 2> rows;
  for (std::size_t i = 0; i < 2; ++i) {
    rows[i].vendor = group.vendors[i];
    rows[i].date = closed_at;
    rows[i].acd_min = rec.stats[i].acd_min;
    rows[i].reject_pct = rec.result.stored_reject_pct(i);
    rows[i].prefix = group.prefix;
  }
  store.insert_acd_rows(rows);

  return {std::move(rec), IntervalState{closed_at, std::nullopt}};
}

Aggregator::Aggregator(GroupConfig group, IntervalPolicy policy, Store& store,
                       Timestamp opened_at)
    : group_(std::move(group)), policy_(policy), store_(store), state_{opened_at, {}} {
  validate(group_);
  validate(policy_);
}

std::optional<IntervalRecord> Aggregator::on_tick(
    Timestamp now, const std::function<IntervalCounters()>& drain_counters) {
  auto ended = store_.query_cdrs(std::nullopt, TimeRange{state_.opened_at, now});
  std::erase_if(ended, [this](const CallRecord& r) {
    return r.rejected_by_router || !find_index(group_.vendors, r.vendor);
  });
  if (tick(now, state_, ended.size(), policy_) == TickDecision::KeepOpen) {
    return std::nullopt;
  }
  std::optional<CloseOutcome> outcome;
  try {
    outcome = close_interval(state_, now, ended, group_, store_);
  } catch (const StorageError&) {
    ++persistence_failures_;
    return std::nullopt;
  }
  const IntervalCounters period = drain_counters ? drain_counters() : IntervalCounters{};
  if (!history_.empty()) history_.back().counters = period;
  history_.push_back(outcome->record);
  state_ = outcome->next;
  return outcome->record;
}

void Aggregator::finish(const IntervalCounters& live) {
  if (!history_.empty()) history_.back().counters = live;
}

}  // namespace acdroute
