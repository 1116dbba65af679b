#include "stmrf/types.hpp"

#include <cmath>
#include <cstdio>
#include <unordered_set>

namespace stmrf {

Date Date::parse(const std::string& iso) {
  Date d;
  char sep1 = 0, sep2 = 0;
  if (std::sscanf(iso.c_str(), "%d%c%d%c%d", &d.year, &sep1, &d.month, &sep2,
                  &d.day) != 5 ||
      sep1 != '-' || sep2 != '-' || d.month < 1 || d.month > 12 || d.day < 1 ||
      d.day > 31) {
    throw DataError("invalid ISO-8601 date: '" + iso + "'");
  }
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

long long Date::serial() const {
  // days_from_civil (Howard Hinnant's algorithm)
  long long y = year;
  y -= month <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

int gap_days(const Date& a, const Date& b) {
  return static_cast<int>(b.serial() - a.serial());
}

ClassSet::ClassSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw DataError("class set must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty()) throw DataError("class names must be non-empty");
    if (!seen.insert(n).second)
      throw DataError("duplicate class name: '" + n + "'");
  }
}

ClassSet ClassSet::study_default() {
  return ClassSet({"burnt_pasture", "clean_pasture", "shrubby_pasture",
                   "water", "forest"});
}

int ClassSet::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (names_[i] == name) return i;
  return -1;
}

FeatureStack::FeatureStack(int t_, int h_, int w_, int f_,
                           std::vector<Date> dates_)
    : t(t_), h(h_), w(w_), f(f_), dates(std::move(dates_)) {
  if (t < 1 || h < 1 || w < 1 || f < 1)
    throw DataError("feature stack dimensions must be positive");
  values.assign(static_cast<std::size_t>(t) * h * w * f, 0.0);
}

void FeatureStack::validate() const {
  if (t < 1 || h < 1 || w < 1 || f < 1)
    throw DataError("feature stack dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(t) * h * w * f)
    throw DataError("feature stack buffer size does not match dimensions");
  if (!dates.empty()) {
    if (static_cast<int>(dates.size()) != t)
      throw DataError("feature stack has " + std::to_string(dates.size()) +
                      " dates for " + std::to_string(t) + " layers");
    for (std::size_t i = 1; i < dates.size(); ++i)
      if (!(dates[i - 1] < dates[i]))
        throw DataError("dates must be strictly increasing");
  }
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]))
      throw DataError("non-finite feature value at flat index " +
                      std::to_string(i));
}

ProbabilityStack::ProbabilityStack(int t_, int h_, int w_, int k_)
    : t(t_), h(h_), w(w_), k(k_) {
  if (t < 1 || h < 1 || w < 1 || k < 1)
    throw DataError("probability stack dimensions must be positive");
  values.assign(static_cast<std::size_t>(t) * h * w * k, 0.0);
}

void ProbabilityStack::validate() const {
  if (t < 1 || h < 1 || w < 1 || k < 1)
    throw DataError("probability stack dimensions must be positive");
  if (values.size() != static_cast<std::size_t>(t) * h * w * k)
    throw DataError("probability stack buffer size does not match dimensions");
  for (int ti = 0; ti < t; ++ti)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        double sum = 0.0;
        for (int ki = 0; ki < k; ++ki) {
          const double p = at(ti, y, x, ki);
          if (!std::isfinite(p) || p < 0.0)
            throw DataError("invalid probability at (t=" + std::to_string(ti) +
                            ", y=" + std::to_string(y) +
                            ", x=" + std::to_string(x) +
                            ", k=" + std::to_string(ki) + ")");
          sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
          throw DataError("probabilities do not sum to 1 at (t=" +
                          std::to_string(ti) + ", y=" + std::to_string(y) +
                          ", x=" + std::to_string(x) + "), sum=" +
                          std::to_string(sum));
      }
}

EnergyStack::EnergyStack(int t_, int h_, int w_, int k_)
    : t(t_), h(h_), w(w_), k(k_) {
  if (t < 1 || h < 1 || w < 1 || k < 1)
    throw DataError("energy stack dimensions must be positive");
  values.assign(static_cast<std::size_t>(t) * h * w * k, 0.0);
}

void EnergyStack::validate() const {
  if (values.size() != static_cast<std::size_t>(t) * h * w * k)
    throw DataError("energy stack buffer size does not match dimensions");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i]) || values[i] < 0.0)
      throw DataError("energy values must be finite and non-negative");
}

LabelStack::LabelStack(int t_, int h_, int w_) : t(t_), h(h_), w(w_) {
  if (t < 1 || h < 1 || w < 1)
    throw DataError("label stack dimensions must be positive");
  values.assign(static_cast<std::size_t>(t) * h * w, 0);
}

void LabelStack::validate(int k) const {
  if (values.size() != static_cast<std::size_t>(t) * h * w)
    throw DataError("label stack buffer size does not match dimensions");
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i] < 0 || values[i] >= k)
      throw DataError("label out of range at flat index " + std::to_string(i));
}

}  // namespace stmrf
