#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "gridsiem/events.hpp"

namespace gridsiem {

/// Number of events of a constant-rate process started at `ref_us` that fall
/// in (a_us, b_us]. Summing over consecutive intervals never loses a packet.
inline std::int64_t count_between(double rate_pps, TimeUs ref_us, TimeUs a_us, TimeUs b_us) {
  if (rate_pps <= 0 || b_us <= a_us) return 0;
  auto cum = [&](TimeUs t) {
    if (t <= ref_us) return std::int64_t{0};
    const long double v = static_cast<long double>(rate_pps) * static_cast<long double>(t - ref_us) /
                          static_cast<long double>(kUsPerSecond);
    return static_cast<std::int64_t>(std::floor(v + 1e-9L));
  };
  return cum(b_us) - cum(a_us);
}

/// Shares `total` units among claimants in proportion to `demands` using
/// largest-remainder rounding. Ties on the remainder go to the lower index.
/// Requires total <= sum(demands).
inline std::vector<std::int64_t> apportion(std::int64_t total, std::span<const std::int64_t> demands) {
  std::vector<std::int64_t> out(demands.size(), 0);
  const std::int64_t sum = std::accumulate(demands.begin(), demands.end(), std::int64_t{0});
  if (sum <= 0 || total <= 0) return out;
  if (total >= sum) return {demands.begin(), demands.end()};
  std::vector<std::pair<std::int64_t, std::size_t>> rem;
  rem.reserve(demands.size());
  std::int64_t given = 0;
  for (std::size_t i = 0; i < demands.size(); ++i) {
    const std::int64_t num = total * demands[i];
    out[i] = num / sum;
    given += out[i];
    rem.emplace_back(num % sum, i);
  }
  std::stable_sort(rem.begin(), rem.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t j = 0; given < total; ++j, ++given) ++out[rem[j].second];
  return out;
}

}  // namespace gridsiem
