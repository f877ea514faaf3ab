#pragma once

#include <stdexcept>
#include <vector>

namespace vinpaint {

/// One contiguous block of timesteps [lo, hi] with its training budget.
struct IntervalBlock {
  int lo = 0, hi = 0;
  long iters = 0;
  int length() const { return hi - lo + 1; }
};

/// Partition of {1..T} into contiguous blocks, ascending in t. Blocks are
/// processed from the noisiest (last) down to the first; any remainder from
/// a non-dividing length or budget lands on the lowest-t block, which is
/// trained last.
struct IntervalPlan {
  int timesteps = 0;
  int interval_length = 0;
  long total_iters = 0;
  std::vector<IntervalBlock> blocks;

  int count() const { return static_cast<int>(blocks.size()); }
};

inline IntervalPlan make_interval_plan(int timesteps, int length, long total_iters) {
  if (length < 1) throw std::invalid_argument("make_interval_plan: length must be >= 1");
  if (length > timesteps)
    throw std::invalid_argument("make_interval_plan: length exceeds timestep count");
  if (total_iters < 0) throw std::invalid_argument("make_interval_plan: negative budget");

  IntervalPlan plan;
  plan.timesteps = timesteps;
  plan.interval_length = length;
  plan.total_iters = total_iters;

  for (int hi = timesteps; hi >= 1;) {
    const int lo = std::max(1, hi - length + 1);
    plan.blocks.push_back({lo, hi, 0});
    hi = lo - 1;
  }
  std::reverse(plan.blocks.begin(), plan.blocks.end());

  const long n = plan.count();
  const long per_block = total_iters / n;
  for (auto& b : plan.blocks) b.iters = per_block;
  plan.blocks.front().iters += total_iters - per_block * n;
  return plan;
}

}  // namespace vinpaint
