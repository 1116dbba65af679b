#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

/// Cross-tabulation of mapped (rows) against reference (columns) classes
/// plus the stratum area proportions the estimators weight by.
struct ErrorMatrix {
  ClassSet classes;
  std::vector<long long> counts;  // K x K row-major
  std::vector<double> weights;    // K, sums to 1

  int k() const { return classes.size(); }
  long long count(int mapped, int ref) const {
    return counts[static_cast<std::size_t>(mapped) * k() + ref];
  }
  long long row_total(int mapped) const;
  long long total() const;
  void validate() const;
};

struct Metric {
  double value = 0.0;
  double ci = 0.0;  // 95% half-width
};

/// Stratified, area-adjusted accuracy estimates. Per-class entries are
/// absent when the class is missing from both the map and the samples.
struct AccuracyReport {
  int k = 0;
  Metric oa;
  std::vector<std::optional<Metric>> ua;  // by mapped class
  std::vector<std::optional<Metric>> pa;  // by reference class
  std::vector<Metric> ref_proportion;     // adjusted area proportion per class
};

struct RefSample {
  int y = 0, x = 0;
  int ref_class = 0;
};

/// Tabulates one date's map layer against reference samples. Stratum
/// weights default to the mapped-class pixel proportions of that layer.
ErrorMatrix error_matrix(const LabelStack& map, int layer,
                         const std::vector<RefSample>& samples,
                         const ClassSet& classes);

/// OA, UA, PA and adjusted area proportions with 95% confidence half-widths
/// from the stratified estimators (p_ij = W_i n_ij / n_i+).
AccuracyReport area_adjusted_metrics(const ErrorMatrix& e);

/// Mapped strata that received no samples cannot be estimated; this zeroes
/// their weight and renormalizes the rest so the estimators cover the
/// sampled portion of the map. Appends one notice per dropped class.
ErrorMatrix drop_unsampled_strata(ErrorMatrix e,
                                  std::vector<std::string>* notices = nullptr);

/// Adjusted area per reference class: total_area * p_+j, CI scaled along.
std::vector<Metric> area_estimates(const ErrorMatrix& e, double total_area);

struct AgreementMap {
  int h = 0, w = 0;
  std::vector<std::uint8_t> agree;  // 1 where the maps coincide
  std::vector<int> second_class;    // class of map b everywhere

  double agreement_fraction() const;
};

/// Pixel-wise comparison of one layer of two label stacks; records the
/// second map's class, which difference maps display in disagreement areas.
AgreementMap agreement_map(const LabelStack& a, int layer_a,
                           const LabelStack& b, int layer_b);

/// Element-wise means of several runs' reports plus the run-to-run standard
/// deviation of each point estimate. Per-class metrics are averaged over
/// the runs where they are present.
struct MultiRunSummary {
  AccuracyReport mean;
  double oa_sd = 0.0;
  std::vector<std::optional<double>> ua_sd, pa_sd;
};
MultiRunSummary multi_run_average(const std::vector<AccuracyReport>& reports);

/// Appends "date,method,metric,class,value,ci" rows for one report.
void write_report_csv(std::ostream& out, const std::string& date,
                      const std::string& method, const ClassSet& classes,
                      const AccuracyReport& report);
void write_report_csv_header(std::ostream& out);

/// Error matrix as CSV with class-name headers.
void write_error_matrix_csv(std::ostream& out, const ErrorMatrix& e);

}  // namespace stmrf
