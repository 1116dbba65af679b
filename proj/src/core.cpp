#include "stmrf/core.hpp"

#include <cmath>
#include <string>

namespace stmrf {

EnergyStack prob_to_energy(const ProbabilityStack& p, double floor) {
  if (!(floor > 0.0) || floor > 1e-6)
    throw DataError("probability floor must be in (0, 1e-6], got " +
                    std::to_string(floor));
  EnergyStack e(p.t, p.h, p.w, p.k);
  for (int t = 0; t < p.t; ++t)
    for (int y = 0; y < p.h; ++y)
      for (int x = 0; x < p.w; ++x)
        for (int k = 0; k < p.k; ++k) {
          const double v = p.at(t, y, x, k);
          if (!std::isfinite(v))
            throw DataError("non-finite probability at (t=" +
                            std::to_string(t) + ", y=" + std::to_string(y) +
                            ", x=" + std::to_string(x) +
                            ", k=" + std::to_string(k) + ")");
          e.at(t, y, x, k) = -std::log(std::max(v, floor));
        }
  return e;
}

LabelStack argmax_labels(const ProbabilityStack& p) {
  LabelStack labels(p.t, p.h, p.w);
  for (int t = 0; t < p.t; ++t)
    for (int y = 0; y < p.h; ++y)
      for (int x = 0; x < p.w; ++x) {
        int best = 0;
        double best_p = p.at(t, y, x, 0);
        for (int k = 1; k < p.k; ++k) {
          const double v = p.at(t, y, x, k);
          if (v > best_p) {
            best_p = v;
            best = k;
          }
        }
        labels.at(t, y, x) = best;
      }
  return labels;
}

}  // namespace stmrf
