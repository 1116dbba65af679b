#include "stmrf/assess.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace stmrf {

namespace {

constexpr double kZ95 = 1.96;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

long long ErrorMatrix::row_total(int mapped) const {
  long long s = 0;
  for (int j = 0; j < k(); ++j) s += count(mapped, j);
  return s;
}

long long ErrorMatrix::total() const {
  long long s = 0;
  for (long long c : counts) s += c;
  return s;
}

void ErrorMatrix::validate() const {
  const int kk = k();
  if (counts.size() != static_cast<std::size_t>(kk) * kk)
    throw DataError("error matrix count buffer size mismatch");
  if (static_cast<int>(weights.size()) != kk)
    throw DataError("error matrix needs one weight per class");
  for (long long c : counts)
    if (c < 0) throw DataError("error matrix counts must be >= 0");
  double wsum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw DataError("stratum weights must be >= 0");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw DataError("stratum weights must sum to 1, got " + fmt(wsum));
  for (int i = 0; i < kk; ++i)
    if (weights[i] > 0.0 && row_total(i) == 0)
      throw DataError("stratum '" + classes.name(i) +
                      "' has positive weight but no samples");
}

ErrorMatrix error_matrix(const LabelStack& map, int layer,
                         const std::vector<RefSample>& samples,
                         const ClassSet& classes) {
  if (layer < 0 || layer >= map.t)
    throw DataError("layer index out of range");
  const int k = classes.size();
  ErrorMatrix e{classes,
                std::vector<long long>(static_cast<std::size_t>(k) * k, 0),
                std::vector<double>(k, 0.0)};

  // Mapped-class pixel proportions as stratum weights.
  std::vector<long long> pix(k, 0);
  for (int y = 0; y < map.h; ++y)
    for (int x = 0; x < map.w; ++x) {
      const int c = map.at(layer, y, x);
      if (c < 0 || c >= k) throw DataError("map label out of class range");
      ++pix[c];
    }
  const double npix = static_cast<double>(map.h) * map.w;
  for (int i = 0; i < k; ++i) e.weights[i] = pix[i] / npix;

  for (const auto& s : samples) {
    if (s.y < 0 || s.y >= map.h || s.x < 0 || s.x >= map.w)
      throw DataError("reference sample (" + std::to_string(s.y) + "," +
                      std::to_string(s.x) + ") outside the grid");
    if (s.ref_class < 0 || s.ref_class >= k)
      throw DataError("reference class out of range");
    const int mapped = map.at(layer, s.y, s.x);
    ++e.counts[static_cast<std::size_t>(mapped) * k + s.ref_class];
  }
  return e;
}

AccuracyReport area_adjusted_metrics(const ErrorMatrix& e) {
  e.validate();
  const int k = e.k();

  // p[i][j] = W_i * n_ij / n_i+
  std::vector<double> p(static_cast<std::size_t>(k) * k, 0.0);
  std::vector<long long> nrow(k, 0);
  for (int i = 0; i < k; ++i) {
    nrow[i] = e.row_total(i);
    if (nrow[i] == 0) continue;  // weight 0, validated above
    for (int j = 0; j < k; ++j)
      p[static_cast<std::size_t>(i) * k + j] =
          e.weights[i] * e.count(i, j) / static_cast<double>(nrow[i]);
  }
  auto pij = [&](int i, int j) { return p[static_cast<std::size_t>(i) * k + j]; };

  AccuracyReport r;
  r.k = k;
  r.ua.assign(k, std::nullopt);
  r.pa.assign(k, std::nullopt);
  r.ref_proportion.assign(k, Metric{});

  double oa = 0.0, oa_var = 0.0;
  for (int i = 0; i < k; ++i) oa += pij(i, i);
  for (int i = 0; i < k; ++i) {
    if (nrow[i] == 0) continue;
    const double uai = e.count(i, i) / static_cast<double>(nrow[i]);
    const double var = nrow[i] > 1 ? uai * (1.0 - uai) / (nrow[i] - 1) : 0.0;
    oa_var += e.weights[i] * e.weights[i] * var;
    r.ua[i] = Metric{uai, kZ95 * std::sqrt(std::max(0.0, var))};
  }
  r.oa = {oa, kZ95 * std::sqrt(std::max(0.0, oa_var))};

  for (int j = 0; j < k; ++j) {
    double pj = 0.0, var = 0.0;
    for (int i = 0; i < k; ++i) {
      pj += pij(i, j);
      if (nrow[i] > 1) {
        const double q = e.count(i, j) / static_cast<double>(nrow[i]);
        var += e.weights[i] * e.weights[i] * q * (1.0 - q) / (nrow[i] - 1);
      }
    }
    r.ref_proportion[j] = {pj, kZ95 * std::sqrt(std::max(0.0, var))};

    if (pj > 0.0) {
      const double paj = pij(j, j) / pj;
      // Stratified PA variance: the mapped-j stratum contributes through its
      // user's accuracy, every other stratum through its misclassification
      // rate into reference class j.
      double acc = 0.0;
      if (nrow[j] > 1) {
        const double uaj = e.count(j, j) / static_cast<double>(nrow[j]);
        acc += e.weights[j] * e.weights[j] * (1.0 - paj) * (1.0 - paj) * uaj *
               (1.0 - uaj) / (nrow[j] - 1);
      }
      for (int i = 0; i < k; ++i) {
        if (i == j || nrow[i] <= 1) continue;
        const double q = e.count(i, j) / static_cast<double>(nrow[i]);
        acc += paj * paj * e.weights[i] * e.weights[i] * q * (1.0 - q) /
               (nrow[i] - 1);
      }
      r.pa[j] = Metric{paj, kZ95 * std::sqrt(std::max(0.0, acc / (pj * pj)))};
    }
  }

  // A class absent from both the map and the samples stays unreported.
  for (int i = 0; i < k; ++i) {
    bool in_samples = false;
    for (int m = 0; m < k; ++m)
      if (e.count(m, i) > 0 || e.count(i, m) > 0) in_samples = true;
    if (e.weights[i] == 0.0 && !in_samples) {
      r.ua[i] = std::nullopt;
      r.pa[i] = std::nullopt;
    }
  }
  return r;
}

ErrorMatrix drop_unsampled_strata(ErrorMatrix e,
                                  std::vector<std::string>* notices) {
  double covered = 0.0;
  for (int i = 0; i < e.k(); ++i) {
    if (e.weights[i] > 0.0 && e.row_total(i) == 0) {
      if (notices)
        notices->push_back("stratum '" + e.classes.name(i) +
                           "' has no samples; excluded from estimation");
      e.weights[i] = 0.0;
    } else {
      covered += e.weights[i];
    }
  }
  if (covered <= 0.0)
    throw DataError("no mapped stratum is covered by any sample");
  for (auto& w : e.weights) w /= covered;
  return e;
}

std::vector<Metric> area_estimates(const ErrorMatrix& e, double total_area) {
  if (!(total_area > 0.0)) throw DataError("total_area must be > 0");
  const AccuracyReport r = area_adjusted_metrics(e);
  std::vector<Metric> out(r.k);
  for (int j = 0; j < r.k; ++j)
    out[j] = {total_area * r.ref_proportion[j].value,
              total_area * r.ref_proportion[j].ci};
  return out;
}

double AgreementMap::agreement_fraction() const {
  if (agree.empty()) return 0.0;
  std::size_t s = 0;
  for (auto a : agree) s += a;
  return static_cast<double>(s) / agree.size();
}

AgreementMap agreement_map(const LabelStack& a, int layer_a,
                           const LabelStack& b, int layer_b) {
  if (a.h != b.h || a.w != b.w)
    throw DataError("agreement map requires equal layer shapes");
  if (layer_a < 0 || layer_a >= a.t || layer_b < 0 || layer_b >= b.t)
    throw DataError("agreement map layer index out of range");
  AgreementMap m;
  m.h = a.h;
  m.w = a.w;
  m.agree.resize(static_cast<std::size_t>(a.h) * a.w);
  m.second_class.resize(m.agree.size());
  for (int y = 0; y < a.h; ++y)
    for (int x = 0; x < a.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * a.w + x;
      m.agree[i] = a.at(layer_a, y, x) == b.at(layer_b, y, x);
      m.second_class[i] = b.at(layer_b, y, x);
    }
  return m;
}

MultiRunSummary multi_run_average(const std::vector<AccuracyReport>& reports) {
  if (reports.empty())
    throw DataError("multi_run_average needs at least one report");
  const int k = reports.front().k;
  for (const auto& r : reports)
    if (r.k != k) throw DataError("reports disagree on class count");

  MultiRunSummary s;
  s.mean.k = k;
  s.mean.ua.assign(k, std::nullopt);
  s.mean.pa.assign(k, std::nullopt);
  s.mean.ref_proportion.assign(k, Metric{});
  s.ua_sd.assign(k, std::nullopt);
  s.pa_sd.assign(k, std::nullopt);

  auto mean_sd = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double sq = 0.0;
    for (double x : v) sq += (x - m) * (x - m);
    return std::pair<double, double>(
        m, v.size() > 1 ? std::sqrt(sq / (v.size() - 1)) : 0.0);
  };

  {
    std::vector<double> vals, cis;
    for (const auto& r : reports) {
      vals.push_back(r.oa.value);
      cis.push_back(r.oa.ci);
    }
    auto [m, sd] = mean_sd(vals);
    s.mean.oa = {m, mean_sd(cis).first};
    s.oa_sd = sd;
  }

  auto average_optional = [&](auto getter, std::vector<std::optional<Metric>>& dst,
                              std::vector<std::optional<double>>& sd_dst) {
    for (int i = 0; i < k; ++i) {
      std::vector<double> vals, cis;
      for (const auto& r : reports) {
        const auto& opt = getter(r)[i];
        if (opt) {
          vals.push_back(opt->value);
          cis.push_back(opt->ci);
        }
      }
      if (!vals.empty()) {
        auto [m, sd] = mean_sd(vals);
        dst[i] = Metric{m, mean_sd(cis).first};
        sd_dst[i] = sd;
      }
    }
  };
  average_optional([](const AccuracyReport& r) -> const auto& { return r.ua; },
                   s.mean.ua, s.ua_sd);
  average_optional([](const AccuracyReport& r) -> const auto& { return r.pa; },
                   s.mean.pa, s.pa_sd);

  for (int j = 0; j < k; ++j) {
    std::vector<double> vals, cis;
    for (const auto& r : reports) {
      vals.push_back(r.ref_proportion[j].value);
      cis.push_back(r.ref_proportion[j].ci);
    }
    s.mean.ref_proportion[j] = {mean_sd(vals).first, mean_sd(cis).first};
  }
  return s;
}

void write_report_csv_header(std::ostream& out) {
  out << "date,method,metric,class,value,ci\n";
}

void write_report_csv(std::ostream& out, const std::string& date,
                      const std::string& method, const ClassSet& classes,
                      const AccuracyReport& report) {
  out << date << ',' << method << ",oa,all," << fmt(report.oa.value) << ','
      << fmt(report.oa.ci) << '\n';
  for (int i = 0; i < report.k; ++i) {
    if (report.ua[i])
      out << date << ',' << method << ",ua," << classes.name(i) << ','
          << fmt(report.ua[i]->value) << ',' << fmt(report.ua[i]->ci) << '\n';
    if (report.pa[i])
      out << date << ',' << method << ",pa," << classes.name(i) << ','
          << fmt(report.pa[i]->value) << ',' << fmt(report.pa[i]->ci) << '\n';
    out << date << ',' << method << ",area_proportion," << classes.name(i)
        << ',' << fmt(report.ref_proportion[i].value) << ','
        << fmt(report.ref_proportion[i].ci) << '\n';
  }
}

void write_error_matrix_csv(std::ostream& out, const ErrorMatrix& e) {
  const int k = e.k();
  out << "mapped\\reference";
  for (int j = 0; j < k; ++j) out << ',' << e.classes.name(j);
  out << ",stratum_weight\n";
  for (int i = 0; i < k; ++i) {
    out << e.classes.name(i);
    for (int j = 0; j < k; ++j) out << ',' << e.count(i, j);
    out << ',' << fmt(e.weights[i]) << '\n';
  }
}

}  // namespace stmrf
