#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace stmrf {

// Error categories map onto the process exit codes used by the CLI:
// config = 2, data = 3, numeric = 4.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Calendar date (UTC, day resolution). Only what raster sidecars and
/// temporal gap computation need.
struct Date {
  int year = 1970;
  int month = 1;
  int day = 1;

  static Date parse(const std::string& iso);  // "YYYY-MM-DD"
  std::string to_string() const;

  /// Days since 1970-01-01 (proleptic Gregorian).
  long long serial() const;

  friend bool operator==(const Date& a, const Date& b) = default;
  friend auto operator<=>(const Date& a, const Date& b) = default;
};

/// Day count between two acquisitions, b after a.
int gap_days(const Date& a, const Date& b);

/// Ordered, immutable set of class names. Index order is the contract for
/// every matrix and probability vector in the library.
class ClassSet {
 public:
  /// Empty placeholder; real sets come from the validating constructor.
  ClassSet() = default;
  explicit ClassSet(std::vector<std::string> names);

  /// The five-class instance used by the synthetic study scenario.
  static ClassSet study_default();

  int size() const { return static_cast<int>(names_.size()); }
  const std::string& name(int k) const { return names_.at(k); }
  const std::vector<std::string>& names() const { return names_; }
  /// -1 when absent.
  int index_of(const std::string& name) const;

  friend bool operator==(const ClassSet& a, const ClassSet& b) = default;

 private:
  std::vector<std::string> names_;
};

namespace detail {
inline std::size_t flat4(int i0, int i1, int i2, int i3, int d1, int d2,
                         int d3) {
  return ((static_cast<std::size_t>(i0) * d1 + i1) * d2 + i2) * d3 + i3;
}
}  // namespace detail

/// T x H x W x F real-valued stack of co-registered scenes.
struct FeatureStack {
  int t = 0, h = 0, w = 0, f = 0;
  std::vector<double> values;
  std::vector<Date> dates;

  FeatureStack() = default;
  FeatureStack(int t_, int h_, int w_, int f_, std::vector<Date> dates_ = {});

  double& at(int ti, int y, int x, int fi) {
    return values[detail::flat4(ti, y, x, fi, h, w, f)];
  }
  double at(int ti, int y, int x, int fi) const {
    return values[detail::flat4(ti, y, x, fi, h, w, f)];
  }

  /// Throws DataError on shape/date/finiteness violations.
  void validate() const;
};

/// T x H x W x K per-class probabilities; every pixel's K-vector sums to 1.
struct ProbabilityStack {
  int t = 0, h = 0, w = 0, k = 0;
  std::vector<double> values;

  ProbabilityStack() = default;
  ProbabilityStack(int t_, int h_, int w_, int k_);

  double& at(int ti, int y, int x, int ki) {
    return values[detail::flat4(ti, y, x, ki, h, w, k)];
  }
  double at(int ti, int y, int x, int ki) const {
    return values[detail::flat4(ti, y, x, ki, h, w, k)];
  }

  void validate() const;
};

/// T x H x W x K non-negative unary energies.
struct EnergyStack {
  int t = 0, h = 0, w = 0, k = 0;
  std::vector<double> values;

  EnergyStack() = default;
  EnergyStack(int t_, int h_, int w_, int k_);

  double& at(int ti, int y, int x, int ki) {
    return values[detail::flat4(ti, y, x, ki, h, w, k)];
  }
  double at(int ti, int y, int x, int ki) const {
    return values[detail::flat4(ti, y, x, ki, h, w, k)];
  }

  void validate() const;
};

/// T x H x W integer class map.
struct LabelStack {
  int t = 0, h = 0, w = 0;
  std::vector<int> values;

  LabelStack() = default;
  LabelStack(int t_, int h_, int w_);

  int& at(int ti, int y, int x) {
    return values[(static_cast<std::size_t>(ti) * h + y) * w + x];
  }
  int at(int ti, int y, int x) const {
    return values[(static_cast<std::size_t>(ti) * h + y) * w + x];
  }

  /// Every value must lie in [0, k).
  void validate(int k) const;
};

}  // namespace stmrf
