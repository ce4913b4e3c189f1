#include "acdroute/rejection.hpp"

#include <cmath>
#include <string>

namespace acdroute {

void validate(const QualityInput& input) {
  if (!(input.load_min >= 0.0 && input.load_min < 0.5)) {
    throw ValidationError("load_min must be in [0, 0.5), got " + std::to_string(input.load_min));
  }
  for (const auto& acd : input.acd_min) {
    if (acd && !(std::isfinite(*acd) && *acd >= 0.0)) {
      throw ValidationError("ACD must be a finite non-negative number of minutes");
    }
  }
  if (input.pref[0] == input.pref[1]) {
    throw ValidationError("the two vendors must have distinct preferences");
  }
}

double round_pct2(double pct) { return std::floor(pct * 100.0 + 0.5) / 100.0; }

double RejectionResult::stored_reject_pct(std::size_t i) const { return round_pct2(reject_pct[i]); }

RejectionResult compute_rejection(const QualityInput& input) {
  validate(input);
  RejectionResult out;
  if (!input.acd_min[0] || !input.acd_min[1]) {
    return out;
  }
  const std::array<double, 2> acd{*input.acd_min[0], *input.acd_min[1]};
  const std::size_t hi = max_acd(acd);
  const std::size_t lo = 1 - hi;

  std::array<double, 2> rank{};
  rank[hi] = 1.0;
  // 0/0 is treated as equal quality.
  rank[lo] = acd[hi] > 0.0 ? acd[lo] / acd[hi] : 1.0;

  std::array<double, 2> load{};
  load[lo] = input.load_min + (0.5 - input.load_min) * rank[lo];
  load[hi] = 1.0 - load[lo];

  if (input.pref[hi] > input.pref[lo]) {
    out.reject_pct[hi] = load[lo] * 100.0;
    out.reject_pct[lo] = 0.0;
  } else {
    out.reject_pct[lo] = load[hi] * 100.0;
    out.reject_pct[hi] = 0.0;
  }
  out.max_idx = hi;
  out.rank = rank;
  out.load = load;
  return out;
}

}  // namespace acdroute
