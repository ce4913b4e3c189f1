#include "acdroute/domain.hpp"

#include <charconv>
#include <cstdio>

namespace acdroute {

namespace {

int parse_field(std::string_view text, std::size_t pos, std::size_t len) {
  int value = 0;
  const char* first = text.data() + pos;
  const char* last = first + len;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text) {
  // YYYY-MM-DD HH:MM:SS
  if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != ' ' ||
      text[13] != ':' || text[16] != ':') {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{parse_field(text, 0, 4)},
                           month{static_cast<unsigned>(parse_field(text, 5, 2))},
                           day{static_cast<unsigned>(parse_field(text, 8, 2))}};
  const int hh = parse_field(text, 11, 2);
  const int mm = parse_field(text, 14, 2);
  const int ss = parse_field(text, 17, 2);
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) {
    throw ValidationError("bad timestamp '" + std::string(text) + "'");
  }
  return sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  using namespace std::chrono;
  const auto day_start = floor<days>(t);
  const year_month_day ymd{day_start};
  const hh_mm_ss hms{t - day_start};
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                static_cast<long>(hms.seconds().count()));
  return buf;
}

std::string format_timestamp_minutes(Timestamp t) { return format_timestamp(t).substr(0, 16); }

Preference::Preference(int value) : value_(value) {
  if (value < 1 || value > 9) {
    throw ValidationError("preference must be in 1..9, got " + std::to_string(value));
  }
}

void validate_group(const VendorPair& vendors, const PreferencePair& prefs) {
  if (vendors[0] == vendors[1]) {
    throw ValidationError("routing group needs two distinct vendors");
  }
  if (prefs[0] == prefs[1]) {
    throw ValidationError("routing group vendors must have distinct preferences");
  }
}

std::string_view to_string(ResponseClass c) {
  switch (c) {
    case ResponseClass::Provisional1xx: return "1xx";
    case ResponseClass::Success2xx: return "2xx";
    case ResponseClass::Redirect3xx: return "3xx";
    case ResponseClass::ClientError4xx: return "4xx";
    case ResponseClass::ServerError5xx: return "5xx";
    case ResponseClass::GlobalFailure6xx: return "6xx";
  }
  return "?";
}

ResponseClass classify_response(int code) {
  if (code < 100 || code > 699) {
    throw ValidationError("response code out of range: " + std::to_string(code));
  }
  return static_cast<ResponseClass>(code / 100 - 1);
}

void validate(const CallRecord& record) {
  if (record.call_id.empty()) {
    throw ValidationError("empty call_id");
  }
  if (record.call_id.find_first_of(",\"\r\n") != std::string::npos) {
    throw ValidationError("call_id contains a delimiter: " + record.call_id);
  }
  if (record.disconnect_time < record.connect_time) {
    throw ValidationError("disconnect before connect for " + record.call_id);
  }
  if (record.duration_s != (record.disconnect_time - record.connect_time).count()) {
    throw ValidationError("duration does not match timestamps for " + record.call_id);
  }
}

std::optional<std::size_t> find_index(const VendorPair& vendors, VendorId vendor) {
  for (std::size_t i = 0; i < vendors.size(); ++i) {
    if (vendors[i] == vendor) return i;
  }
  return std::nullopt;
}

}  // namespace acdroute
