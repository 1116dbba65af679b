#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "stmrf/assess.hpp"
#include "stmrf/rng.hpp"

using namespace stmrf;

namespace {

const ClassSet kTwo({"x", "y"});

ErrorMatrix worked_matrix() {
  // n = [[40,10],[5,45]], W = (0.3, 0.7)
  return ErrorMatrix{kTwo, {40, 10, 5, 45}, {0.3, 0.7}};
}

ErrorMatrix random_matrix(int k, Rng& rng) {
  ErrorMatrix e;
  std::vector<std::string> names;
  for (int i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
  e.classes = ClassSet(names);
  e.counts.resize(k * k);
  e.weights.resize(k);
  double wsum = 0.0;
  for (int i = 0; i < k; ++i) {
    e.weights[i] = 0.05 + rng.uniform();
    wsum += e.weights[i];
    for (int j = 0; j < k; ++j)
      e.counts[i * k + j] = 1 + static_cast<long long>(rng.uniform_int(50));
  }
  for (auto& w : e.weights) w /= wsum;
  // weights sum to 1 only approximately after division; renormalize exactly
  double acc = 0.0;
  for (int i = 0; i + 1 < k; ++i) acc += e.weights[i];
  e.weights[k - 1] = 1.0 - acc;
  return e;
}

}  // namespace

TEST_CASE("the hand-worked stratified estimates") {
  const AccuracyReport r = area_adjusted_metrics(worked_matrix());
  CHECK(r.oa.value == doctest::Approx(0.87).epsilon(1e-12));
  REQUIRE(r.ua[0].has_value());
  CHECK(r.ua[0]->value == doctest::Approx(0.80).epsilon(1e-12));
  REQUIRE(r.pa[0].has_value());
  CHECK(r.pa[0]->value == doctest::Approx(0.24 / 0.31).epsilon(1e-9));
  CHECK(r.pa[0]->value == doctest::Approx(0.77419).epsilon(1e-4));
  CHECK(r.ref_proportion[0].value == doctest::Approx(0.31).epsilon(1e-12));
  CHECK(r.ref_proportion[1].value == doctest::Approx(0.69).epsilon(1e-12));

  // longhand variance of OA: sum W_i^2 UA_i (1-UA_i)/(n_i - 1)
  const double v = 0.3 * 0.3 * 0.8 * 0.2 / 49 + 0.7 * 0.7 * 0.9 * 0.1 / 49;
  CHECK(r.oa.ci == doctest::Approx(1.96 * std::sqrt(v)).epsilon(1e-12));
}

TEST_CASE("diagonal matrix scores perfectly with zero CIs") {
  const ErrorMatrix e{kTwo, {30, 0, 0, 70}, {0.3, 0.7}};
  const AccuracyReport r = area_adjusted_metrics(e);
  CHECK(r.oa.value == doctest::Approx(1.0));
  CHECK(r.oa.ci == 0.0);
  for (int i = 0; i < 2; ++i) {
    CHECK(r.ua[i]->value == doctest::Approx(1.0));
    CHECK(r.pa[i]->value == doctest::Approx(1.0));
    CHECK(r.ua[i]->ci == 0.0);
    CHECK(r.pa[i]->ci == 0.0);
  }
}

TEST_CASE("empty stratum with zero weight is reported absent") {
  const ErrorMatrix e{kTwo, {50, 0, 0, 0}, {1.0, 0.0}};
  const AccuracyReport r = area_adjusted_metrics(e);
  CHECK(r.oa.value == doctest::Approx(1.0));
  CHECK_FALSE(r.ua[1].has_value());  // no mapped-y samples, weight 0
}

TEST_CASE("empty stratum with positive weight errors with the class name") {
  const ErrorMatrix e{kTwo, {50, 0, 0, 0}, {0.6, 0.4}};
  CHECK_THROWS_WITH_AS(area_adjusted_metrics(e), doctest::Contains("'y'"),
                       DataError);
}

TEST_CASE("dropping unsampled strata renormalizes the rest") {
  const ErrorMatrix e{kTwo, {50, 0, 0, 0}, {0.6, 0.4}};
  std::vector<std::string> notices;
  const ErrorMatrix d = drop_unsampled_strata(e, &notices);
  REQUIRE(notices.size() == 1);
  CHECK(notices[0].find("'y'") != std::string::npos);
  CHECK(d.weights[0] == doctest::Approx(1.0));
  CHECK(d.weights[1] == 0.0);
  CHECK_NOTHROW(area_adjusted_metrics(d));

  // fully sampled matrices pass through unchanged
  std::vector<std::string> none;
  const ErrorMatrix same = drop_unsampled_strata(worked_matrix(), &none);
  CHECK(none.empty());
  CHECK(same.weights == worked_matrix().weights);

  const ErrorMatrix hopeless{kTwo, {0, 0, 0, 0}, {0.6, 0.4}};
  CHECK_THROWS_AS(drop_unsampled_strata(hopeless, nullptr), DataError);
}

TEST_CASE("adjusted cells sum to one for random matrices") {
  Rng rng(321);
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = 2 + static_cast<int>(rng.uniform_int(5));
    const ErrorMatrix e = random_matrix(k, rng);
    const AccuracyReport r = area_adjusted_metrics(e);
    double sum = 0.0;
    for (int j = 0; j < k; ++j) sum += r.ref_proportion[j].value;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(r.oa.value <= 1.0 + 1e-12);
    // UA_i * p_i+ = p_ii exactly
    for (int i = 0; i < k; ++i) {
      const double pii =
          e.weights[i] * e.count(i, i) / static_cast<double>(e.row_total(i));
      CHECK(r.ua[i]->value * e.weights[i] == doctest::Approx(pii).epsilon(1e-12));
    }
  }
}

TEST_CASE("collapsing two classes never decreases overall accuracy") {
  // Holds whenever samples are allocated proportionally to the stratum
  // weights (the regime the estimator is designed for); with arbitrary
  // allocation the reweighting can break it, so generate proportional
  // matrices here.
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 3 + static_cast<int>(rng.uniform_int(3));
    ErrorMatrix e = random_matrix(k, rng);
    {
      double wsum = 0.0;
      std::vector<long long> rows(k);
      for (int i = 0; i < k; ++i) {
        rows[i] = 20 + static_cast<long long>(rng.uniform_int(200));
        wsum += static_cast<double>(rows[i]);
      }
      for (int i = 0; i < k; ++i) {
        e.weights[i] = rows[i] / wsum;
        // spread the row total over the columns
        long long left = rows[i];
        for (int j = 0; j < k - 1; ++j) {
          e.counts[i * k + j] = left > 0 ? rng.uniform_int(left + 1) : 0;
          left -= e.counts[i * k + j];
        }
        e.counts[i * k + k - 1] = left;
      }
      double acc = 0.0;
      for (int i = 0; i + 1 < k; ++i) acc += e.weights[i];
      e.weights[k - 1] = 1.0 - acc;
    }
    const double oa = area_adjusted_metrics(e).oa.value;

    // merge classes 0 and 1
    ErrorMatrix m;
    std::vector<std::string> names;
    names.push_back("m");
    for (int i = 2; i < k; ++i) names.push_back("c" + std::to_string(i));
    m.classes = ClassSet(names);
    const int km = k - 1;
    m.counts.assign(km * km, 0);
    m.weights.assign(km, 0.0);
    auto cls = [&](int i) { return i <= 1 ? 0 : i - 1; };
    for (int i = 0; i < k; ++i) {
      m.weights[cls(i)] += e.weights[i];
      for (int j = 0; j < k; ++j)
        m.counts[cls(i) * km + cls(j)] += e.count(i, j);
    }
    const double oam = area_adjusted_metrics(m).oa.value;
    CHECK(oam >= oa - 1e-12);
  }
}

TEST_CASE("error matrix construction") {
  const ClassSet classes({"a", "b", "c"});
  LabelStack map(1, 4, 4);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) map.at(0, y, x) = (y * 4 + x) % 3;

  SUBCASE("counts land at (mapped, reference)") {
    const std::vector<RefSample> samples = {{0, 0, 1}};  // mapped a, ref b
    const ErrorMatrix e = error_matrix(map, 0, samples, classes);
    CHECK(e.count(0, 1) == 1);
    CHECK(e.total() == 1);
  }
  SUBCASE("weights are the mapped pixel proportions") {
    const ErrorMatrix e = error_matrix(map, 0, {{0, 0, 0}}, classes);
    CHECK(e.weights[0] == doctest::Approx(6.0 / 16));
    CHECK(e.weights[1] == doctest::Approx(5.0 / 16));
    CHECK(e.weights[2] == doctest::Approx(5.0 / 16));
  }
  SUBCASE("empty sample list produces a zero matrix") {
    const ErrorMatrix e = error_matrix(map, 0, {}, classes);
    CHECK(e.total() == 0);
  }
  SUBCASE("a perfect map yields a diagonal matrix") {
    std::vector<RefSample> samples;
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 4; ++x) samples.push_back({y, x, map.at(0, y, x)});
    const ErrorMatrix e = error_matrix(map, 0, samples, classes);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(e.count(i, j) == (i == j ? e.row_total(i) : 0));
  }
  SUBCASE("out-of-grid samples are rejected") {
    CHECK_THROWS_AS(error_matrix(map, 0, {{4, 0, 0}}, classes), DataError);
    CHECK_THROWS_AS(error_matrix(map, 0, {{0, -1, 0}}, classes), DataError);
  }
}

TEST_CASE("area estimates scale the adjusted proportions") {
  const std::vector<Metric> areas = area_estimates(worked_matrix(), 100.0);
  CHECK(areas[0].value == doctest::Approx(31.0).epsilon(1e-9));
  CHECK(areas[1].value == doctest::Approx(69.0).epsilon(1e-9));
  CHECK_THROWS_AS(area_estimates(worked_matrix(), 0.0), DataError);

  // perfect diagonal with weights equal to mapped proportions: CI = 0
  const ErrorMatrix diag{kTwo, {30, 0, 0, 70}, {0.3, 0.7}};
  const auto exact = area_estimates(diag, 200.0);
  CHECK(exact[0].value == doctest::Approx(60.0));
  CHECK(exact[0].ci == 0.0);
}

TEST_CASE("agreement map") {
  LabelStack a(1, 2, 3), b(1, 2, 3);
  for (int i = 0; i < 6; ++i) {
    a.values[i] = i % 2;
    b.values[i] = (i % 3 == 0) ? i % 2 : 1 - i % 2;
  }
  const AgreementMap m = agreement_map(a, 0, b, 0);
  int agree_count = 0;
  for (int i = 0; i < 6; ++i) {
    CHECK(m.second_class[i] == b.values[i]);
    CHECK(m.agree[i] == (a.values[i] == b.values[i] ? 1 : 0));
    agree_count += m.agree[i];
  }
  CHECK(m.agreement_fraction() == doctest::Approx(agree_count / 6.0));

  const AgreementMap same = agreement_map(a, 0, a, 0);
  CHECK(same.agreement_fraction() == 1.0);

  LabelStack complement = a;
  for (auto& v : complement.values) v = 1 - v;
  CHECK(agreement_map(a, 0, complement, 0).agreement_fraction() == 0.0);

  LabelStack wrong(1, 3, 2);
  CHECK_THROWS_AS(agreement_map(a, 0, wrong, 0), DataError);
}

TEST_CASE("multi-run averaging") {
  AccuracyReport r1 = area_adjusted_metrics(worked_matrix());
  AccuracyReport r2 = r1;
  r2.oa.value = r1.oa.value - 0.2;  // pretend a weaker run

  SUBCASE("single report averages to itself") {
    const MultiRunSummary s = multi_run_average({r1});
    CHECK(s.mean.oa.value == r1.oa.value);
    CHECK(s.oa_sd == 0.0);
  }
  SUBCASE("two reports average element-wise") {
    const MultiRunSummary s = multi_run_average({r1, r2});
    CHECK(s.mean.oa.value ==
          doctest::Approx((r1.oa.value + r2.oa.value) / 2).epsilon(1e-12));
    CHECK(s.oa_sd > 0.0);
  }
  SUBCASE("identical reports have zero run SD") {
    const MultiRunSummary s = multi_run_average({r1, r1, r1});
    CHECK(s.oa_sd == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(s.mean.oa.value == doctest::Approx(r1.oa.value).epsilon(1e-14));
  }
  SUBCASE("empty input is rejected") {
    CHECK_THROWS_AS(multi_run_average({}), DataError);
  }
}

TEST_CASE("report and matrix CSV emission") {
  const AccuracyReport r = area_adjusted_metrics(worked_matrix());
  std::ostringstream out;
  write_report_csv_header(out);
  write_report_csv(out, "2014-06-08", "st-mrf", kTwo, r);
  const std::string text = out.str();
  CHECK(text.find("date,method,metric,class,value,ci\n") == 0);
  CHECK(text.find("2014-06-08,st-mrf,oa,all,0.87,") != std::string::npos);
  CHECK(text.find("2014-06-08,st-mrf,ua,x,0.8,") != std::string::npos);

  std::ostringstream mat;
  write_error_matrix_csv(mat, worked_matrix());
  CHECK(mat.str().find(",x,y,stratum_weight") != std::string::npos);
  CHECK(mat.str().find("x,40,10,0.3") != std::string::npos);
}
