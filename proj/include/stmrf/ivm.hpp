#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "stmrf/types.hpp"

namespace stmrf {

/// Labeled training samples with polygon provenance.
struct TrainSet {
  ClassSet classes;
  int n = 0, f = 0;
  std::vector<double> features;  // n x f, row-major
  std::vector<int> labels;       // n, in [0, K)
  std::vector<int> polygon_ids;  // n

  void validate() const;
  /// Number of distinct labels present.
  int distinct_labels() const;
};

/// Sparse kernel logistic regression model: per-class bias plus weights over
/// the selected import points. Import points are kept in standardized
/// feature space together with the standardization statistics.
struct IvmModel {
  ClassSet classes;
  int k = 0, s = 0, f = 0;
  double sigma = 1.0;
  double c = 1.0;
  std::vector<double> alpha;          // k x (s+1), bias first, row-major
  std::vector<double> import_points;  // s x f, standardized space
  std::vector<double> feat_mean;      // f
  std::vector<double> feat_sd;        // f

  /// Binary format: magic "IVM1", u32 K, u32 S, u32 F, f64 sigma, f64 C,
  /// alpha K*(S+1) f64, import points S*F f64, then the standardization
  /// mean and sd (F f64 each). All little-endian. Class names are not part
  /// of the file; the loader is handed the class set.
  void save(std::ostream& out) const;
  static IvmModel load(std::istream& in, const ClassSet& classes);
  void save_file(const std::string& path) const;
  static IvmModel load_file(const std::string& path, const ClassSet& classes);
};

struct IvmTrainConfig {
  int max_import = 50;
  double tol = 1e-4;            // stop when relative objective drop < tol
  int candidate_subsample = 0;  // candidates scored per step; 0 = all
  std::uint64_t seed = 0;       // subsampling only
  int newton_max_iter = 30;
  double newton_tol = 1e-10;
};

/// exp(-|a-b|^2 / (2 sigma^2)).
double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double sigma);

/// Greedy forward selection of import points for multiclass kernel logistic
/// regression. Candidates are ranked by the objective drop from refitting
/// the incoming column's coefficients; the winner is then jointly refit by
/// damped Newton. The objective never increases across selection steps.
IvmModel train_ivm(const TrainSet& train, double sigma, double c,
                   const IvmTrainConfig& cfg = {});
IvmModel train_ivm(const TrainSet& train, double sigma, double c,
                   int max_import, double tol);

/// Softmax class probabilities for every pixel of the stack.
ProbabilityStack predict_proba(const IvmModel& model, const FeatureStack& stack,
                               int threads = 1);
/// Single-sample variant (raw feature space).
std::vector<double> predict_proba_one(const IvmModel& model,
                                      const std::vector<double>& features);

struct GridSearchResult {
  double sigma = 0.0;
  double c = 0.0;
  double mean_accuracy = 0.0;
};

/// Stratified cross-validated grid search maximizing mean validation
/// accuracy; ties prefer smaller C, then smaller sigma.
GridSearchResult grid_search_cv(const TrainSet& train,
                                const std::vector<double>& sigma_grid,
                                const std::vector<double>& c_grid, int folds,
                                const IvmTrainConfig& cfg = {});

/// Median of pairwise distances between (up to max_pairs) standardized
/// training points; the customary base for sigma grids.
double median_pairwise_distance(const TrainSet& train, int max_pairs = 20000);

/// Regularized negative log-likelihood of multiclass KLR and its gradient,
/// parameterized by the model matrix h = [1 | K_ns] and the import-point
/// kernel k_ss. Exposed so the gradient can be verified independently.
double klr_objective(const Eigen::MatrixXd& h, const Eigen::MatrixXd& k_ss,
                     const std::vector<int>& labels, double c,
                     const Eigen::MatrixXd& a);
Eigen::MatrixXd klr_gradient(const Eigen::MatrixXd& h,
                             const Eigen::MatrixXd& k_ss,
                             const std::vector<int>& labels, double c,
                             const Eigen::MatrixXd& a);

}  // namespace stmrf
