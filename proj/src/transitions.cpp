#include "stmrf/transitions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace stmrf {

TransitionMatrix::TransitionMatrix(std::vector<std::vector<double>> m,
                                   TransitionKind kind, int gap_days)
    : m_(std::move(m)), kind_(kind), gap_days_(gap_days) {
  validate();
}

void TransitionMatrix::validate() const {
  const int k = size();
  if (k < 1) throw DataError("transition matrix must be at least 1x1");
  for (const auto& row : m_)
    if (static_cast<int>(row.size()) != k)
      throw DataError("transition matrix must be square");
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      const double v = m_[i][j];
      if (!std::isfinite(v) || v < 0.0 || v > 1.0)
        throw DataError("transition entry (" + std::to_string(i) + "," +
                        std::to_string(j) + ") out of [0,1]: " +
                        std::to_string(v));
    }
  if (kind_ == TransitionKind::kSpatial) {
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j)
        if (m_[i][j] != m_[j][i])
          throw DataError("spatial compatibility matrix must be symmetric");
  } else {
    // Self-transition is the most compatible outcome of every row.
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        if (m_[i][j] > m_[i][i])
          throw DataError("temporal matrix row " + std::to_string(i) +
                          " has off-diagonal entry above its diagonal");
  }
}

TransitionMatrix potts_matrix(int k) {
  if (k < 1) throw DataError("potts_matrix requires k >= 1");
  std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) m[i][i] = 1.0;
  return TransitionMatrix(std::move(m), TransitionKind::kSpatial);
}

std::pair<TransitionMatrix, TransitionMatrix> build_tau_pair(
    const std::vector<std::vector<double>>& f) {
  const int k = static_cast<int>(f.size());
  if (k < 1) throw DataError("forward compatibility matrix must be non-empty");
  for (const auto& row : f)
    if (static_cast<int>(row.size()) != k)
      throw DataError("forward compatibility matrix must be square");
  std::vector<std::vector<double>> ft(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) ft[j][i] = f[i][j];
  TransitionMatrix tau1(std::move(ft), TransitionKind::kTemporalBackward,
                        kBaseGapDays);
  TransitionMatrix tau2(f, TransitionKind::kTemporalForward, kBaseGapDays);
  return {std::move(tau1), std::move(tau2)};
}

TransitionMatrix scale_for_gap(const TransitionMatrix& tau, int gap_days,
                               int base_days) {
  if (gap_days < 0) throw DataError("gap_days must be >= 0");
  if (base_days <= 0) throw DataError("base_days must be > 0");
  const double s = static_cast<double>(gap_days) / base_days;
  auto m = tau.rows();
  const int k = tau.size();
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (i != j) m[i][j] = std::clamp(m[i][j] * s, 0.0, 1.0);
  return TransitionMatrix(std::move(m), tau.kind(), gap_days);
}

std::vector<std::vector<double>> default_study_matrix() {
  // Rows: from-class, columns: to-class, both in study_default() order
  // [burnt_pasture, clean_pasture, shrubby_pasture, water, forest].
  // Diagonals are 1 so that staying put is never penalized and gap scaling
  // cannot push an off-diagonal above its row's diagonal.
  return {
      {1.00, 0.70, 0.70, 0.05, 0.05},  // burnt: recovers into pasture
      {0.80, 1.00, 0.40, 0.05, 0.15},  // clean: burns, encroaches, regrows
      {0.80, 0.40, 1.00, 0.05, 0.40},  // shrubby: burns, cleared, to forest
      {0.05, 0.05, 0.05, 1.00, 0.05},  // water: permanent this season
      {0.05, 0.10, 0.10, 0.05, 1.00},  // forest: removable, else stable
  };
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim surrounding whitespace
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    fields.push_back(b == std::string::npos ? ""
                                            : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

}  // namespace

std::vector<std::vector<double>> load_compat_csv(std::istream& in,
                                                 const ClassSet& classes) {
  const int k = classes.size();
  std::string line;
  if (!std::getline(in, line))
    throw DataError("compatibility CSV is empty");
  auto header = split_csv_line(line);
  if (static_cast<int>(header.size()) != k)
    throw DataError("compatibility CSV header has " +
                    std::to_string(header.size()) + " columns, expected " +
                    std::to_string(k));
  for (int j = 0; j < k; ++j)
    if (header[j] != classes.name(j))
      throw DataError("compatibility CSV header column " + std::to_string(j) +
                      " is '" + header[j] + "', expected '" + classes.name(j) +
                      "'");
  std::vector<std::vector<double>> m;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != k)
      throw DataError("compatibility CSV row " + std::to_string(m.size()) +
                      " has " + std::to_string(fields.size()) +
                      " columns, expected " + std::to_string(k));
    std::vector<double> row;
    for (const auto& fstr : fields) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(fstr, &pos);
      } catch (const std::exception&) {
        throw DataError("compatibility CSV has non-numeric entry '" + fstr +
                        "'");
      }
      if (pos != fstr.size())
        throw DataError("compatibility CSV has non-numeric entry '" + fstr +
                        "'");
      row.push_back(v);
    }
    m.push_back(std::move(row));
  }
  if (static_cast<int>(m.size()) != k)
    throw DataError("compatibility CSV has " + std::to_string(m.size()) +
                    " rows, expected " + std::to_string(k));
  return m;
}

std::vector<std::vector<double>> load_compat_csv_file(const std::string& path,
                                                      const ClassSet& classes) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open compatibility CSV: " + path);
  return load_compat_csv(in, classes);
}

void save_compat_csv(std::ostream& out, const ClassSet& classes,
                     const std::vector<std::vector<double>>& m) {
  const int k = classes.size();
  for (int j = 0; j < k; ++j)
    out << classes.name(j) << (j + 1 < k ? "," : "\n");
  char buf[64];
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m[i][j]);
      out << buf << (j + 1 < k ? "," : "\n");
    }
}

}  // namespace stmrf
