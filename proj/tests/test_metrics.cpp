#include <catch2/catch_amalgamated.hpp>

#include <vector>

#include "diffnet/metrics.hpp"

using namespace diffnet;

TEST_CASE("nmsd of perfect estimates is zero") {
  std::vector<double> w_o = {0.5, -0.5};
  std::vector<double> w_all = {0.5, -0.5, 0.5, -0.5, 0.5, -0.5};
  CHECK(nmsd(w_all, w_o) == 0.0);
}

TEST_CASE("nmsd averages squared deviation norms") {
  std::vector<double> w_o = {0.0, 0.0};
  // node deviations of norm 1 and 3
  std::vector<double> w_all = {1.0, 0.0, 0.0, 3.0};
  CHECK(nmsd(w_all, w_o) == Catch::Approx(5.0));
}

TEST_CASE("nmsd is quadratic under scaling") {
  std::vector<double> w_o = {0.0, 0.0, 0.0};
  std::vector<double> w_all = {1.0, -2.0, 0.5, 0.25, 3.0, -1.0};
  double base = nmsd(w_all, w_o);
  for (double& t : w_all) t *= 2.0;
  CHECK(nmsd(w_all, w_o) == Catch::Approx(4.0 * base));
}

TEST_CASE("nmse basics") {
  std::vector<double> zero(5, 0.0);
  CHECK(nmse(zero) == 0.0);
  std::vector<double> pm = {1.0, -1.0};
  CHECK(nmse(pm) == 1.0);
}

TEST_CASE("moving average identity cases") {
  std::vector<double> constant(200, 3.25);
  auto ma = moving_average(constant, 64);
  for (double t : ma) CHECK(t == Catch::Approx(3.25).epsilon(1e-13));

  std::vector<double> anything = {5.0, -1.0, 2.5, 0.0};
  auto w1 = moving_average(anything, 1);
  CHECK(w1 == anything);
}

TEST_CASE("moving average ramps over exactly one window after a step") {
  std::vector<double> step(300, 0.0);
  const int n0 = 100, window = 64;
  for (int n = n0; n < 300; ++n) step[n] = 1.0;
  auto ma = moving_average(step, window);
  CHECK(ma[n0 - 1] == 0.0);
  CHECK(ma[n0] > 0.0);
  CHECK(ma[n0 + window - 2] < 1.0);
  for (int n = n0 + window - 1; n < 300; ++n) CHECK(ma[n] == Catch::Approx(1.0).epsilon(1e-13));
  // linear ramp in between
  CHECK(ma[n0 + 31] == Catch::Approx(32.0 / 64.0).epsilon(1e-12));
}

TEST_CASE("steady state summary windows") {
  std::vector<IterationRecord> recs(1000);
  for (int n = 0; n < 1000; ++n) {
    recs[n].nmsd = n < 400 ? 10.0 : 2.0;
    recs[n].v_s = 7.0;
  }
  auto tail = steady_state_summary(recs, 600);
  CHECK(tail.nmsd == Catch::Approx(2.0));
  CHECK(tail.v_s == Catch::Approx(7.0));

  auto all = steady_state_summary(recs, 1000);
  CHECK(all.nmsd == Catch::Approx(0.4 * 10.0 + 0.6 * 2.0));

  REQUIRE_THROWS_AS(steady_state_summary(std::span<const IterationRecord>(recs.data(), 10), 600),
                    std::invalid_argument);
}

TEST_CASE("network op totals add per-node counts") {
  std::vector<OpCount> nodes(20, op_cost(CostModel::kDnlms, 50, 5, 1));
  auto total = accumulate_ops(nodes);
  CHECK(total.mults == 20 * 404);
  CHECK(total.sums == 20 * 403);
  CHECK(total.divs == 20 * 5);

  // all idle sampling nodes match the tabulated s = 0 row
  std::vector<OpCount> idle;
  long long expected = 0;
  for (int k = 0; k < 20; ++k) {
    int nk = 3 + (k % 4);
    idle.push_back(op_cost(CostModel::kAsDnlms, 50, nk, 0));
    expected += 50 * (1 + nk) + nk + 4;
  }
  CHECK(accumulate_ops(idle).mults == expected);
}

TEST_CASE("db conversion guards zero") {
  CHECK(to_db(1.0) == 0.0);
  CHECK(to_db(0.01) == Catch::Approx(-20.0));
  CHECK(std::isfinite(to_db(0.0)));
}
