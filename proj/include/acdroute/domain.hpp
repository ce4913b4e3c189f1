#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace acdroute {

/// Input that violates a documented precondition (bad code, bad config, bad row).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Wall-clock UTC time at one-second resolution.
using Timestamp = std::chrono::sys_seconds;
using Seconds = std::chrono::seconds;

/// Parses `YYYY-MM-DD HH:MM:SS`.
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp t);
/// `YYYY-MM-DD HH:MM`, the granularity of the monitoring table.
std::string format_timestamp_minutes(Timestamp t);

/// Billing vendor id (e.g. 55, 62).
struct VendorId {
  std::uint32_t value = 0;
  friend constexpr auto operator<=>(const VendorId&, const VendorId&) = default;
};

/// Static billing priority, 1 (lowest) to 9 (highest).
class Preference {
 public:
  constexpr Preference() = default;
  explicit Preference(int value);
  [[nodiscard]] constexpr int value() const noexcept { return value_; }
  friend constexpr auto operator<=>(const Preference&, const Preference&) = default;

 private:
  int value_ = 1;
};

/// The two vendors that form one routing group, indexed 0 and 1 everywhere.
using VendorPair = std::array<VendorId, 2>;
using PreferencePair = std::array<Preference, 2>;

/// Throws unless the pair names two different vendors with distinct preferences.
void validate_group(const VendorPair& vendors, const PreferencePair& prefs);

enum class ResponseClass {
  Provisional1xx,
  Success2xx,
  Redirect3xx,
  ClientError4xx,
  ServerError5xx,
  GlobalFailure6xx,
};

std::string_view to_string(ResponseClass c);

ResponseClass classify_response(int code);

/// True for 4xx/5xx/6xx. A 200 OK never causes the billing router to try the
/// next vendor, which is exactly what a false-answer vendor exploits.
constexpr bool triggers_failover(ResponseClass c) noexcept {
  return c == ResponseClass::ClientError4xx || c == ResponseClass::ServerError5xx ||
         c == ResponseClass::GlobalFailure6xx;
}

enum class CauseKind { NormalClearing, NoUserResponding, Other };

struct DisconnectCause {
  CauseKind kind = CauseKind::NormalClearing;
  int code = 0;  // only meaningful for Other

  static constexpr DisconnectCause normal() { return {CauseKind::NormalClearing, 0}; }
  static constexpr DisconnectCause no_answer() { return {CauseKind::NoUserResponding, 0}; }
  static constexpr DisconnectCause other(int code) { return {CauseKind::Other, code}; }
  friend constexpr bool operator==(const DisconnectCause&, const DisconnectCause&) = default;
};

/// One completed call attempt.
struct CallRecord {
  std::string call_id;
  VendorId vendor;
  Timestamp connect_time;
  Timestamp disconnect_time;
  std::int64_t duration_s = 0;
  DisconnectCause disconnect_cause;
  bool rejected_by_router = false;

  friend bool operator==(const CallRecord&, const CallRecord&) = default;
};

/// Checks the CallRecord invariants; throws ValidationError on the first violation.
void validate(const CallRecord& record);

/// Position (0 or 1) of `vendor` in the routing group.
std::optional<std::size_t> find_index(const VendorPair& vendors, VendorId vendor);

}  // namespace acdroute
