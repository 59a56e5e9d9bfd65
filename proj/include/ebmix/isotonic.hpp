#pragma once

#include <span>
#include <vector>

namespace ebmix {

/// Minimizes sum_j (w_j b_j^2 - 2 u_j b_j) subject to b_1 <= ... <= b_q and
/// lo <= b_j <= hi, by pool-adjacent-violators on block values
/// sum u / sum w followed by clamping. Zero weights are allowed (their
/// block value is +inf or -inf until pooled with weighted points).
/// `group` (optional, same length) marks runs that must share one value.
std::vector<double> isotonic_ratio(std::span<const double> u, std::span<const double> w,
                                   double lo, double hi,
                                   std::span<const int> group = {});

}  // namespace ebmix
