#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "stmrf/mrf.hpp"
#include "test_util.hpp"

using namespace stmrf;
using testutil::random_labels;
using testutil::random_problem;

TEST_CASE("spatial energy counts disagreeing Potts edges") {
  const TransitionMatrix potts = potts_matrix(3);

  SUBCASE("uniform labels cost nothing") {
    LabelStack l(2, 3, 3);
    CHECK(spatial_energy(l, potts, 1.0) == 0.0);
  }
  SUBCASE("one differing pair on a 2x1 grid") {
    LabelStack l(1, 1, 2);
    l.at(0, 0, 0) = 0;
    l.at(0, 0, 1) = 1;
    CHECK(spatial_energy(l, potts, 1.0) == 1.0);
  }
  SUBCASE("2x2 checkerboard has 4 disagreeing edges") {
    LabelStack l(1, 2, 2);
    l.at(0, 0, 0) = 0;
    l.at(0, 0, 1) = 1;
    l.at(0, 1, 0) = 1;
    l.at(0, 1, 1) = 0;
    CHECK(spatial_energy(l, potts, 1.0) == 4.0);
    CHECK(spatial_energy(l, potts, 2.5) == 10.0);
  }
  SUBCASE("beta_sp-normalized energy equals the disagreement count") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const LabelStack l = random_labels(2, 4, 5, 3, s);
      int disagree = 0;
      for (int t = 0; t < l.t; ++t)
        for (int y = 0; y < l.h; ++y)
          for (int x = 0; x < l.w; ++x) {
            if (x + 1 < l.w && l.at(t, y, x) != l.at(t, y, x + 1)) ++disagree;
            if (y + 1 < l.h && l.at(t, y, x) != l.at(t, y + 1, x)) ++disagree;
          }
      CHECK(spatial_energy(l, potts, 3.0) / 3.0 ==
            doctest::Approx(disagree).epsilon(1e-12));
    }
  }
}

TEST_CASE("temporal energy evaluates both directed terms") {
  SUBCASE("identity tau and constant labels cost nothing") {
    std::vector<std::vector<double>> id(3, std::vector<double>(3, 0.0));
    for (int i = 0; i < 3; ++i) id[i][i] = 1.0;
    auto pair = build_tau_pair(id);
    LabelStack l(3, 2, 2);
    CHECK(temporal_energy(l, {pair, pair}, 1.0) == 0.0);
  }
  SUBCASE("single pixel, two dates, the worked example") {
    // F(a,b) = 0.8, labels (a, b): forward 1-tau2(a,b) = 0.2 and backward
    // 1-tau1(b,a) = 0.2 sum to 0.4.
    std::vector<std::vector<double>> f = {{1.0, 0.8}, {0.1, 1.0}};
    auto pair = build_tau_pair(f);
    LabelStack l(2, 1, 1);
    l.at(0, 0, 0) = 0;
    l.at(1, 0, 0) = 1;
    CHECK(temporal_energy(l, {pair}, 1.0) == doctest::Approx(0.4).epsilon(1e-12));
  }
  SUBCASE("single date means no links") {
    LabelStack l(1, 4, 4);
    CHECK(temporal_energy(l, {}, 1.0) == 0.0);
  }
}

TEST_CASE("total energy decomposes additively") {
  const MrfProblem p = random_problem(3, 3, 4, 4, 99);
  const LabelStack l = random_labels(3, 3, 4, 4, 7);

  const double total = total_energy(l, p);
  double unary = 0.0;
  for (int t = 0; t < l.t; ++t)
    for (int y = 0; y < l.h; ++y)
      for (int x = 0; x < l.w; ++x) unary += p.unary.at(t, y, x, l.at(t, y, x));
  CHECK(total == doctest::Approx(unary + spatial_energy(l, p.delta, p.beta_sp) +
                                 temporal_energy(l, p.tau_pairs, p.beta_temp))
                     .epsilon(1e-12));

  MrfProblem zero = p;
  zero.beta_sp = 0.0;
  zero.beta_temp = 0.0;
  CHECK(total_energy(l, zero) == doctest::Approx(unary).epsilon(1e-12));
}

TEST_CASE("total energy equals the naive oracle") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    const MrfProblem p = random_problem(2 + seed % 3, 2 + seed % 4, 3, 3, seed);
    const LabelStack l = random_labels(p.unary.t, p.unary.h, p.unary.w, 3,
                                       seed * 31 + 1);
    CHECK(total_energy(l, p) ==
          doctest::Approx(oracle::naive_total_energy(l, p)).epsilon(1e-12));
  }
}

TEST_CASE("per-pixel unary offsets shift every labeling equally") {
  MrfProblem p = random_problem(2, 3, 3, 3, 5);
  const LabelStack a = random_labels(2, 3, 3, 3, 1);
  const LabelStack b = random_labels(2, 3, 3, 3, 2);
  const double ea = total_energy(a, p), eb = total_energy(b, p);

  const double c = 2.375;
  for (int k = 0; k < 3; ++k) p.unary.at(1, 2, 0, k) += c;
  CHECK(total_energy(a, p) == doctest::Approx(ea + c).epsilon(1e-12));
  CHECK(total_energy(b, p) == doctest::Approx(eb + c).epsilon(1e-12));
}

TEST_CASE("problem validation catches inconsistent shapes") {
  MrfProblem p = random_problem(3, 2, 2, 3, 3);
  CHECK_NOTHROW(p.validate());

  MrfProblem wrong_k = p;
  wrong_k.delta = potts_matrix(4);
  CHECK_THROWS_AS(wrong_k.validate(), DataError);

  MrfProblem missing_tau = p;
  missing_tau.tau_pairs.pop_back();
  CHECK_THROWS_AS(missing_tau.validate(), DataError);

  MrfProblem bad_beta = p;
  bad_beta.beta_sp = -1.0;
  CHECK_THROWS_AS(bad_beta.validate(), DataError);
}
