#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>

#include "acdroute/aggregate.hpp"
#include "acdroute/domain.hpp"
#include "acdroute/random.hpp"
#include "acdroute/rejection.hpp"

namespace acdroute {

/// A call arrived on a clone interface that is not part of the routing group.
class RoutingConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// 503 Service Unavailable: a 5xx, so billing moves on to the next vendor.
inline constexpr int kDefaultRejectCode = 503;

struct Decision {
  enum class Outcome { Accept, Reject };

  Outcome outcome = Outcome::Accept;
  int failure_code = 0;  // set on Reject

  static constexpr Decision accept() { return {}; }
  static constexpr Decision reject(int code) { return {Outcome::Reject, code}; }
  [[nodiscard]] constexpr bool rejected() const { return outcome == Outcome::Reject; }
  friend constexpr bool operator==(const Decision&, const Decision&) = default;
};

struct AdmissionConfig {
  VendorPair vendors{VendorId{55}, VendorId{62}};
  std::uint64_t seed = 1;
  /// How long a rejected call id is remembered; a billing retry arrives within seconds.
  Seconds rejection_ttl{3600};
  int reject_code = kDefaultRejectCode;
};

/// Per-call admission at the clone interfaces.
///
/// Each first attempt on a vendor is refused with probability
/// `reject_pct[vendor] / 100`; a call id is refused at most once, so its
/// retry on the other vendor always passes. Until the first targets arrive
/// every call is accepted.
///
/// All members are safe to call concurrently. Targets are swapped as a pair,
/// the seen-set test-and-insert is atomic, and counters are atomic.
class AdmissionState {
 public:
  explicit AdmissionState(AdmissionConfig config);

  /// Throws RoutingConfigError for a vendor outside the group.
  Decision decide(std::string_view call_id, VendorId vendor, Timestamp now);

  /// Counts the decision: accepted calls go to `received`, refused ones to `rejected`.
  void record_decision(VendorId vendor, const Decision& decision);

  /// decide followed by record_decision.
  Decision admit(std::string_view call_id, VendorId vendor, Timestamp now);

  /// Installs the unrounded reject percentages of a freshly closed interval.
  void refresh_targets(const RejectionResult& result);
  void set_targets(std::array<double, 2> reject_pct);

  [[nodiscard]] std::optional<std::array<double, 2>> targets() const;
  [[nodiscard]] IntervalCounters counters() const;
  /// Returns the counters and resets them to zero in one step per counter.
  IntervalCounters drain_counters();
  [[nodiscard]] std::size_t remembered_rejections() const;
  [[nodiscard]] const AdmissionConfig& config() const { return config_; }

 private:
  std::size_t index(VendorId vendor) const;
  void purge_expired(Timestamp now);

  AdmissionConfig config_;
  mutable std::mutex mutex_;
  std::optional<std::array<double, 2>> targets_;
  Rng rng_;
  std::unordered_map<std::string, Timestamp> seen_;
  std::deque<std::pair<Timestamp, std::string>> expiry_queue_;
  std::array<std::atomic<std::uint64_t>, 2> received_{};
  std::array<std::atomic<std::uint64_t>, 2> rejected_{};
};

}  // namespace acdroute
