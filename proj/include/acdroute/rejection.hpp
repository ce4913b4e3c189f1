#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "acdroute/domain.hpp"

namespace acdroute {

inline constexpr double kDefaultLoadMin = 0.1;

/// Measured quality of the two routes of a group plus their billing priority.
struct QualityInput {
  /// Average call duration in minutes; empty when the vendor answered nothing.
  std::array<std::optional<double>, 2> acd_min;
  PreferencePair pref;
  double load_min = kDefaultLoadMin;
};

/// Throws ValidationError when `load_min` is outside [0, 0.5), an ACD is
/// negative or not finite, or the preferences coincide.
void validate(const QualityInput& input);

/// Per-vendor routing targets for one closed interval.
///
/// `rank`, `load` and `max_idx` are empty when one ACD is missing. In that case
/// nothing is rejected. `reject_pct` is kept unrounded; use
/// `stored_reject_pct` for the 2-decimal value written to acd_vendors.
struct RejectionResult {
  std::optional<std::size_t> max_idx;
  std::optional<std::array<double, 2>> rank;
  std::optional<std::array<double, 2>> load;
  std::array<double, 2> reject_pct{0.0, 0.0};

  [[nodiscard]] double stored_reject_pct(std::size_t i) const;
};

/// Round half up to two decimals, as percentages are stored.
double round_pct2(double pct);

/// Index of the strictly larger ACD; 0 on ties.
constexpr std::size_t max_acd(const std::array<double, 2>& acd) noexcept {
  return acd[0] < acd[1] ? 1 : 0;
}

RejectionResult compute_rejection(const QualityInput& input);

}  // namespace acdroute
