#include <doctest.h>

#include "vinpaint/interval_plan.hpp"

using namespace vinpaint;

TEST_CASE("interval plan: 20 intervals of length 50 with even budget") {
  const IntervalPlan plan = make_interval_plan(1000, 50, 40000);
  CHECK(plan.count() == 20);
  CHECK(plan.blocks.front().lo == 1);
  CHECK(plan.blocks.back().hi == 1000);
  long total = 0;
  int covered = 0;
  for (int i = 0; i < plan.count(); ++i) {
    const auto& b = plan.blocks[static_cast<std::size_t>(i)];
    CHECK(b.length() == 50);
    CHECK(b.iters == 2000);
    if (i > 0) CHECK(b.lo == plan.blocks[static_cast<std::size_t>(i - 1)].hi + 1);
    total += b.iters;
    covered += b.length();
  }
  CHECK(total == 40000);
  CHECK(covered == 1000);
}

TEST_CASE("interval plan: single block degenerates to train-then-sample") {
  const IntervalPlan plan = make_interval_plan(1000, 1000, 500);
  CHECK(plan.count() == 1);
  CHECK(plan.blocks[0].lo == 1);
  CHECK(plan.blocks[0].hi == 1000);
  CHECK(plan.blocks[0].iters == 500);
}

TEST_CASE("interval plan: remainder block sits at the low-t end") {
  const IntervalPlan plan = make_interval_plan(100, 30, 100);
  REQUIRE(plan.count() == 4);
  CHECK(plan.blocks[0].lo == 1);
  CHECK(plan.blocks[0].hi == 10);  // the size-10 block
  CHECK(plan.blocks[1].length() == 30);
  CHECK(plan.blocks[2].length() == 30);
  CHECK(plan.blocks[3].length() == 30);
  // budget 100 over 4 blocks: 25 each, remainder 0
  for (const auto& b : plan.blocks) CHECK(b.iters == 25);
}

TEST_CASE("interval plan: budget remainder lands on the last-trained block") {
  const IntervalPlan plan = make_interval_plan(100, 25, 103);
  REQUIRE(plan.count() == 4);
  CHECK(plan.blocks[0].iters == 25 + 3);
  CHECK(plan.blocks[1].iters == 25);
  long total = 0;
  for (const auto& b : plan.blocks) total += b.iters;
  CHECK(total == 103);
}

TEST_CASE("interval plan: invalid lengths") {
  CHECK_THROWS_AS(make_interval_plan(100, 0, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_interval_plan(100, 101, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_interval_plan(100, 10, -1), std::invalid_argument);
}
