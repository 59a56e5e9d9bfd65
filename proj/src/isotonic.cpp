#include "ebmix/isotonic.hpp"

#include <algorithm>
#include <limits>

#include "ebmix/errors.hpp"

namespace ebmix {

namespace {

struct Block {
  double u;
  double w;
  std::size_t size;
  double value() const {
    if (w > 0.0) return u / w;
    if (u > 0.0) return std::numeric_limits<double>::infinity();
    if (u < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
};

}  // namespace

std::vector<double> isotonic_ratio(std::span<const double> u, std::span<const double> w,
                                   double lo, double hi, std::span<const int> group) {
  const std::size_t q = u.size();
  if (w.size() != q || (!group.empty() && group.size() != q))
    throw ParameterError("isotonic_ratio: length mismatch");
  if (!(lo <= hi)) throw ParameterError("isotonic_ratio: empty box");
  std::vector<Block> stack;
  stack.reserve(q);
  for (std::size_t j = 0; j < q; ++j) {
    if (w[j] < 0.0) throw ParameterError("isotonic_ratio: negative weight");
    const bool tied = !group.empty() && j > 0 && group[j] == group[j - 1];
    if (tied) {
      stack.back().u += u[j];
      stack.back().w += w[j];
      stack.back().size += 1;
    } else {
      stack.push_back({u[j], w[j], 1});
    }
    // Values are clamped before comparing: pooling two blocks that both sit
    // at a bound changes nothing, and comparing raw infinities would.
    while (stack.size() > 1) {
      const Block& top = stack.back();
      const Block& prev = stack[stack.size() - 2];
      if (std::clamp(prev.value(), lo, hi) <= std::clamp(top.value(), lo, hi)) break;
      Block merged{prev.u + top.u, prev.w + top.w, prev.size + top.size};
      stack.pop_back();
      stack.back() = merged;
    }
  }
  std::vector<double> b;
  b.reserve(q);
  for (const Block& blk : stack) b.insert(b.end(), blk.size, std::clamp(blk.value(), lo, hi));
  return b;
}

}  // namespace ebmix
