#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

enum class TransitionKind {
  kSpatial,           // delta: symmetric neighbor compatibilities
  kTemporalBackward,  // tau1: messages from t toward t-1
  kTemporalForward,   // tau2: messages from t toward t+1
};

/// K x K compatibility weights in [0,1]. Entries are weights, not
/// probabilities: rows are not normalized, since they enter the energy only
/// as 1 - tau(a, b).
class TransitionMatrix {
 public:
  TransitionMatrix(std::vector<std::vector<double>> m, TransitionKind kind,
                   int gap_days = 0);

  int size() const { return static_cast<int>(m_.size()); }
  double operator()(int from, int to) const { return m_[from][to]; }
  TransitionKind kind() const { return kind_; }
  int gap_days() const { return gap_days_; }
  const std::vector<std::vector<double>>& rows() const { return m_; }

 private:
  void validate() const;

  std::vector<std::vector<double>> m_;
  TransitionKind kind_;
  int gap_days_;  // temporal kinds only
};

/// Identity compatibility matrix (Potts model), spatial kind.
TransitionMatrix potts_matrix(int k);

/// Builds the temporal pair from one forward compatibility matrix:
/// tau2 = f, tau1 = f transposed. first = tau1, second = tau2.
std::pair<TransitionMatrix, TransitionMatrix> build_tau_pair(
    const std::vector<std::vector<double>>& f);

/// Scales off-diagonal entries by gap_days / base_days, clipped to [0,1].
/// Diagonal entries are left unchanged: a class never becomes less
/// self-compatible because more time passed.
TransitionMatrix scale_for_gap(const TransitionMatrix& tau, int gap_days,
                               int base_days);

/// TerraSAR-X revisit interval, the reference gap of the study.
inline constexpr int kBaseGapDays = 11;

/// The built-in 5x5 forward compatibility matrix for the study class set
/// (burnt/clean/shrubby pasture, water, forest). Encodes the trajectory
/// assumptions: pasture burns and recovers, shrubby pasture regrows into
/// forest, water and forest persist, everything keeps a small escape weight.
std::vector<std::vector<double>> default_study_matrix();

/// Plain-text CSV with one header row of class names; expert knowledge can
/// be injected by handing a file to the pipeline instead of the default.
std::vector<std::vector<double>> load_compat_csv(std::istream& in,
                                                 const ClassSet& classes);
std::vector<std::vector<double>> load_compat_csv_file(const std::string& path,
                                                      const ClassSet& classes);
void save_compat_csv(std::ostream& out, const ClassSet& classes,
                     const std::vector<std::vector<double>>& m);

}  // namespace stmrf
