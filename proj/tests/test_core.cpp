#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stmrf/core.hpp"
#include "stmrf/rng.hpp"

using namespace stmrf;

namespace {

ProbabilityStack single_pixel(const std::vector<double>& probs) {
  ProbabilityStack p(1, 1, 1, static_cast<int>(probs.size()));
  for (std::size_t k = 0; k < probs.size(); ++k) p.values[k] = probs[k];
  return p;
}

ProbabilityStack random_stack(int t, int h, int w, int k, std::uint64_t seed) {
  Rng rng(seed);
  ProbabilityStack p(t, h, w, k);
  for (int ti = 0; ti < t; ++ti)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (int ki = 0; ki < k; ++ki) {
          const double v = rng.uniform() + 1e-6;
          p.at(ti, y, x, ki) = v;
          sum += v;
        }
        for (int ki = 0; ki < k; ++ki) p.at(ti, y, x, ki) /= sum;
      }
  return p;
}

}  // namespace

TEST_CASE("prob_to_energy on exact values") {
  auto p = single_pixel({1.0, std::exp(-2.0)});
  // not a normalized distribution, but prob_to_energy is pointwise
  const EnergyStack e = prob_to_energy(p, 1e-12);
  CHECK(e.at(0, 0, 0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(e.at(0, 0, 0, 1) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("prob_to_energy clips at the floor") {
  auto p = single_pixel({0.0, 1.0});
  const EnergyStack e = prob_to_energy(p, 1e-12);
  CHECK(e.at(0, 0, 0, 0) == doctest::Approx(-std::log(1e-12)).epsilon(1e-12));
  CHECK(e.at(0, 0, 0, 0) == doctest::Approx(27.6310211159).epsilon(1e-6));
}

TEST_CASE("prob_to_energy validates the floor and finiteness") {
  auto p = single_pixel({0.5, 0.5});
  CHECK_THROWS_AS(prob_to_energy(p, 0.0), DataError);
  CHECK_THROWS_AS(prob_to_energy(p, 1e-3), DataError);
  p.values[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(prob_to_energy(p, 1e-12), DataError);
}

TEST_CASE("prob_to_energy error names the offending cell") {
  ProbabilityStack p = random_stack(2, 2, 3, 4, 7);
  p.at(1, 0, 2, 3) = std::numeric_limits<double>::infinity();
  try {
    prob_to_energy(p);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("t=1") != std::string::npos);
    CHECK(msg.find("y=0") != std::string::npos);
    CHECK(msg.find("x=2") != std::string::npos);
    CHECK(msg.find("k=3") != std::string::npos);
  }
}

TEST_CASE("argmax_labels picks the max, ties to the lowest index") {
  CHECK(argmax_labels(single_pixel({0.1, 0.7, 0.2})).at(0, 0, 0) == 1);
  CHECK(argmax_labels(single_pixel({0.4, 0.4, 0.2})).at(0, 0, 0) == 0);
  CHECK(argmax_labels(single_pixel({0.2, 0.2, 0.2, 0.2, 0.2})).at(0, 0, 0) == 0);
}

TEST_CASE("energy argmin reproduces argmax_labels exactly") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const ProbabilityStack p = random_stack(2, 4, 5, 5, seed);
    const EnergyStack e = prob_to_energy(p);
    const LabelStack via_prob = argmax_labels(p);
    for (int t = 0; t < p.t; ++t)
      for (int y = 0; y < p.h; ++y)
        for (int x = 0; x < p.w; ++x) {
          int arg = 0;
          for (int k = 1; k < p.k; ++k)
            if (e.at(t, y, x, k) < e.at(t, y, x, arg)) arg = k;
          CHECK(arg == via_prob.at(t, y, x));
        }
  }
}

TEST_CASE("prob_to_energy is strictly decreasing above the floor") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double a = 1e-6 + rng.uniform() * (1.0 - 1e-6);
    const double b = 1e-6 + rng.uniform() * (1.0 - 1e-6);
    if (a == b) continue;
    auto p = single_pixel({a, b});
    const EnergyStack e = prob_to_energy(p);
    CHECK((a < b) == (e.at(0, 0, 0, 0) > e.at(0, 0, 0, 1)));
  }
}

TEST_CASE("class set rejects duplicates and empties") {
  CHECK_THROWS_AS(ClassSet({"a", "a"}), DataError);
  CHECK_THROWS_AS(ClassSet({""}), DataError);
  CHECK_THROWS_AS(ClassSet(std::vector<std::string>{}), DataError);
  const ClassSet cs = ClassSet::study_default();
  CHECK(cs.size() == 5);
  CHECK(cs.index_of("water") == 3);
  CHECK(cs.index_of("nope") == -1);
}

TEST_CASE("probability stack validation") {
  ProbabilityStack p = random_stack(1, 2, 2, 3, 3);
  CHECK_NOTHROW(p.validate());
  p.at(0, 1, 1, 0) += 0.5;
  CHECK_THROWS_AS(p.validate(), DataError);
}

TEST_CASE("date arithmetic matches the study gaps") {
  const Date a{2014, 6, 8}, b{2014, 6, 30}, c{2014, 7, 22}, d{2014, 8, 24},
      e{2014, 9, 4};
  CHECK(gap_days(a, b) == 22);
  CHECK(gap_days(b, c) == 22);
  CHECK(gap_days(c, d) == 33);
  CHECK(gap_days(d, e) == 11);
  CHECK(Date::parse("2014-06-08") == a);
  CHECK(a.to_string() == "2014-06-08");
  CHECK_THROWS_AS(Date::parse("2014/06/08"), DataError);
}
