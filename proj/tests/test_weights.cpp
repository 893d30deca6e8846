#include <catch2/catch_amalgamated.hpp>

#include "diffnet/topology.hpp"
#include "diffnet/weights.hpp"

using namespace diffnet;

namespace {

NetworkTopology pair_topology() { return NetworkTopology(2, {{0, 1}}); }

NetworkTopology star5() {
  // center 0, four leaves
  return NetworkTopology(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
}

}  // namespace

TEST_CASE("uniform weights on a pair are one half") {
  auto t = pair_topology();
  auto c = uniform_weights(t);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) CHECK(c(j, k) == 0.5);
  CHECK(validate_weights(c, t).ok);
}

TEST_CASE("uniform weights split a five-node neighborhood into quarters plus self") {
  auto t = star5();
  auto c = uniform_weights(t);
  // center has |N| = 5
  for (int j = 0; j < 5; ++j) CHECK(c(j, 0) == Catch::Approx(0.2));
  // leaves have |N| = 2
  CHECK(c(0, 1) == 0.5);
  CHECK(c(1, 1) == 0.5);
  CHECK(validate_weights(c, t).ok);
}

TEST_CASE("metropolis weights on a pair") {
  auto t = pair_topology();
  auto c = metropolis_weights(t);
  CHECK(c(0, 1) == 0.5);
  CHECK(c(1, 0) == 0.5);
  CHECK(c(0, 0) == 0.5);
  CHECK(c(1, 1) == 0.5);
}

TEST_CASE("metropolis weights on a star") {
  auto t = star5();
  auto c = metropolis_weights(t);
  // leaf-to-center and center-to-leaf weight: 1/max(5, 2) = 1/5
  CHECK(c(1, 0) == Catch::Approx(0.2));
  CHECK(c(0, 1) == Catch::Approx(0.2));
  CHECK(c(1, 1) == Catch::Approx(0.8));
  CHECK(c(0, 0) == Catch::Approx(1.0 - 4.0 / 5.0));
  CHECK(validate_weights(c, t).ok);
  // off-diagonal symmetry
  for (int j = 0; j < 5; ++j)
    for (int k = 0; k < 5; ++k)
      if (j != k) CHECK(c(j, k) == Catch::Approx(c(k, j)));
}

TEST_CASE("rules satisfy the weight constraints on random graphs") {
  for (std::uint64_t seed : {2ULL, 8ULL, 21ULL}) {
    auto t = build_random_geometric_network(18, 5.0, seed);
    CHECK(validate_weights(uniform_weights(t), t).ok);
    CHECK(validate_weights(metropolis_weights(t), t).ok);
  }
}

TEST_CASE("validate_weights reports violations with indices") {
  auto t = pair_topology();
  auto c = uniform_weights(t);

  SECTION("negativity") {
    c(0, 1) = -0.1;
    c(1, 1) = 1.1;
    auto r = validate_weights(c, t);
    REQUIRE_FALSE(r.ok);
    CHECK(r.j == 0);
    CHECK(r.k == 1);
    CHECK(r.message.find("negative") != std::string::npos);
  }
  SECTION("column sum") {
    c(0, 0) = 0.4;  // column sums to 0.9
    auto r = validate_weights(c, t);
    REQUIRE_FALSE(r.ok);
    CHECK(r.k == 0);
    CHECK(r.message.find("sums") != std::string::npos);
  }
  SECTION("support") {
    NetworkTopology path3(3, {{0, 1}, {1, 2}});
    auto cp = uniform_weights(path3);
    cp(0, 2) = 0.0;  // zero outside support stays legal
    CHECK(validate_weights(cp, path3).ok);
    cp(0, 2) = 0.2;
    auto r = validate_weights(cp, path3);
    REQUIRE_FALSE(r.ok);
    CHECK(r.message.find("neighborhood") != std::string::npos);
  }
}

TEST_CASE("acw with equal variance estimates gives uniform columns") {
  auto t = star5();
  AcwState acw(t, 3, 0.2, 1e-5);
  CombinationMatrix c(5);
  // zero psi and w everywhere: all distances zero, all sigma_hat equal
  std::vector<double> psi(5 * 3, 0.0), w(5 * 3, 0.0);
  std::vector<int> sbar(5, 1);
  acw.update(psi, w, sbar, c);
  REQUIRE(validate_weights(c, t).ok);
  for (int j = 0; j < 5; ++j) CHECK(c(j, 0) == Catch::Approx(0.2));
  CHECK(c(0, 1) == Catch::Approx(0.5));
}

TEST_CASE("unit forgetting factor resets the variance proxies outright") {
  auto t = pair_topology();
  AcwState acw(t, 2, 1.0, 1e-5);
  CombinationMatrix c(2);
  std::vector<int> sbar = {1, 1};

  // first update with spread-out estimates: proxies become nonzero
  std::vector<double> psi = {1.0, 0.0, 0.0, 2.0};
  std::vector<double> w(4, 0.0);
  acw.update(psi, w, sbar, c);
  REQUIRE(acw.sigma_hat_sq(0, 0) > 0.0);

  // then every local estimate equals the combined one: with nu = 1 the
  // proxies drop to exactly zero and the regularizer alone splits weights
  std::vector<double> agree = {0.7, -0.4, 0.7, -0.4};
  std::vector<double> w_same = {0.7, -0.4, 0.7, -0.4};
  acw.update(agree, w_same, sbar, c);
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) CHECK(acw.sigma_hat_sq(j, k) == 0.0);
  CHECK(c(0, 0) == 0.5);
  CHECK(c(1, 0) == 0.5);
}

TEST_CASE("acw hand example: distances 0.1 and 0.3 with nu = 1") {
  NetworkTopology t = pair_topology();
  AcwState acw(t, 1, 1.0, 1e-5);
  CombinationMatrix c(2);
  // node 0 sees ||psi_0 - w_0||^2 = 0.1 (self) and ||psi_1 - w_0||^2 = 0.3
  std::vector<double> psi = {std::sqrt(0.1), std::sqrt(0.3)};
  std::vector<double> w = {0.0, 123.0};  // node 1's own w is irrelevant to column 0
  std::vector<int> sbar = {1, 1};
  acw.update(psi, w, sbar, c);
  // frozen from a high-precision evaluation of the regularized rule
  CHECK(c(0, 0) == Catch::Approx(0.749987500624968751).epsilon(1e-12));
  CHECK(c(1, 0) == Catch::Approx(0.250012499375031248).epsilon(1e-12));
}

TEST_CASE("acw with all nodes sampled reduces to the plain recursion") {
  auto t = build_random_geometric_network(8, 3.0, 5);
  const int m = 4;
  AcwState with_fix(t, m, 0.3, 1e-5);
  CombinationMatrix c1(8), c2(8);

  Rng rng(99);
  std::vector<double> psi(8 * m), w(8 * m);
  std::vector<int> all(8, 1);
  std::vector<double> sigma(8 * 8, 0.0);  // reference recursion state
  for (int step = 0; step < 5; ++step) {
    for (auto& x : psi) x = rng.gaussian();
    for (auto& x : w) x = rng.gaussian();
    with_fix.update(psi, w, all, c1);

    // reference: direct evaluation of the recursion with psi itself
    for (int k = 0; k < 8; ++k) {
      double inv_sum = 0.0;
      for (int j : t.neighbors(k)) {
        double dist = 0.0;
        for (int i = 0; i < m; ++i) {
          double diff = psi[j * m + i] - w[k * m + i];
          dist += diff * diff;
        }
        double& s = sigma[j * 8 + k];
        s = 0.7 * s + 0.3 * dist;
        inv_sum += 1.0 / (1e-5 + s);
      }
      for (int j : t.neighbors(k)) c2(j, k) = (1.0 / (1e-5 + sigma[j * 8 + k])) / inv_sum;
    }
    for (int j = 0; j < 8; ++j)
      for (int k = 0; k < 8; ++k) REQUIRE(c1(j, k) == c2(j, k));
  }
}

TEST_CASE("freezing a node pins its censoring-aware estimate") {
  auto t = pair_topology();
  const int m = 2;
  AcwState acw(t, m, 0.5, 1e-5);
  CombinationMatrix c(2);

  std::vector<double> psi = {1.0, 2.0, 3.0, 4.0};
  std::vector<double> w(4, 0.0);
  std::vector<int> sbar = {1, 1};
  acw.update(psi, w, sbar, c);
  REQUIRE(acw.psi_bar(0)[0] == 1.0);
  REQUIRE(acw.psi_bar(0)[1] == 2.0);

  // node 0 goes unsampled; its surrogate must stay at the last sampled psi
  sbar[0] = 0;
  for (int n = 0; n < 100; ++n) {
    psi[0] = 10.0 + n;
    psi[1] = -5.0;
    acw.update(psi, w, sbar, c);
    REQUIRE(acw.psi_bar(0)[0] == 1.0);
    REQUIRE(acw.psi_bar(0)[1] == 2.0);
    REQUIRE(acw.psi_bar(1)[0] == psi[2]);
  }
  CHECK(validate_weights(c, t).ok);
}
