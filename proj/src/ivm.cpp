#include "stmrf/ivm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "stmrf/parallel.hpp"
#include "stmrf/rng.hpp"

namespace stmrf {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Row-wise softmax probabilities of the discriminants in `scores`.
MatrixXd softmax_rows(const MatrixXd& scores) {
  MatrixXd p = scores;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const double m = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

double nll_of_scores(const MatrixXd& scores, const std::vector<int>& labels) {
  double nll = 0.0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    const double m = scores.row(i).maxCoeff();
    const double lse = m + std::log((scores.row(i).array() - m).exp().sum());
    nll += lse - scores(i, labels[i]);
  }
  return nll;
}

}  // namespace

void TrainSet::validate() const {
  const int k = classes.size();
  if (k < 1) throw DataError("training set lacks a class set");
  if (n < k)
    throw DataError("training set needs at least K=" + std::to_string(k) +
                    " samples, got " + std::to_string(n));
  if (f < 1) throw DataError("training set needs at least one feature");
  if (features.size() != static_cast<std::size_t>(n) * f)
    throw DataError("training feature buffer size mismatch");
  if (static_cast<int>(labels.size()) != n)
    throw DataError("training label count mismatch");
  if (!polygon_ids.empty() && static_cast<int>(polygon_ids.size()) != n)
    throw DataError("training polygon id count mismatch");
  for (int lab : labels)
    if (lab < 0 || lab >= k)
      throw DataError("training label out of range: " + std::to_string(lab));
  for (double v : features)
    if (!std::isfinite(v)) throw DataError("non-finite training feature");
}

int TrainSet::distinct_labels() const {
  std::vector<char> seen(classes.size(), 0);
  int count = 0;
  for (int lab : labels)
    if (!seen[lab]) {
      seen[lab] = 1;
      ++count;
    }
  return count;
}

double rbf_kernel(const std::vector<double>& a, const std::vector<double>& b,
                  double sigma) {
  if (a.size() != b.size())
    throw DataError("rbf_kernel dimension mismatch: " +
                    std::to_string(a.size()) + " vs " +
                    std::to_string(b.size()));
  if (!(sigma > 0.0)) throw DataError("rbf_kernel requires sigma > 0");
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

double klr_objective(const MatrixXd& h, const MatrixXd& k_ss,
                     const std::vector<int>& labels, double c,
                     const MatrixXd& a) {
  const MatrixXd scores = h * a.transpose();  // N x K
  double obj = nll_of_scores(scores, labels);
  if (k_ss.rows() > 0) {
    const MatrixXd w = a.rightCols(a.cols() - 1);  // K x S
    obj += 0.5 / c * (w * k_ss).cwiseProduct(w).sum();
  }
  return obj;
}

MatrixXd klr_gradient(const MatrixXd& h, const MatrixXd& k_ss,
                      const std::vector<int>& labels, double c,
                      const MatrixXd& a) {
  const MatrixXd scores = h * a.transpose();
  MatrixXd resid = softmax_rows(scores);  // N x K
  for (Eigen::Index i = 0; i < resid.rows(); ++i) resid(i, labels[i]) -= 1.0;
  MatrixXd grad = resid.transpose() * h;  // K x (S+1)
  if (k_ss.rows() > 0)
    grad.rightCols(grad.cols() - 1) +=
        (1.0 / c) * a.rightCols(a.cols() - 1) * k_ss;
  return grad;
}

namespace {

/// Damped Newton minimization of the regularized KLR objective. Coefficients
/// in `a` are updated in place; returns the final objective. Falls back to
/// increasing ridge when the system is singular, and throws NumericError if
/// it stays singular.
double newton_fit(const MatrixXd& h, const MatrixXd& k_ss,
                  const std::vector<int>& labels, double c, MatrixXd& a,
                  int max_iter, double tol) {
  const Eigen::Index n = h.rows(), m = h.cols();
  const Eigen::Index k = a.rows();
  double obj = klr_objective(h, k_ss, labels, c, a);

  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd scores = h * a.transpose();
    const MatrixXd p = softmax_rows(scores);
    MatrixXd resid = p;
    for (Eigen::Index i = 0; i < n; ++i) resid(i, labels[i]) -= 1.0;
    MatrixXd grad = resid.transpose() * h;
    if (k_ss.rows() > 0)
      grad.rightCols(m - 1) += (1.0 / c) * a.rightCols(m - 1) * k_ss;

    // Full multiclass Hessian in K x K blocks of size m x m.
    MatrixXd hess = MatrixXd::Zero(k * m, k * m);
    for (Eigen::Index ki = 0; ki < k; ++ki)
      for (Eigen::Index kj = ki; kj < k; ++kj) {
        VectorXd wgt;
        if (ki == kj)
          wgt = (p.col(ki).array() * (1.0 - p.col(ki).array())).matrix();
        else
          wgt = (-p.col(ki).array() * p.col(kj).array()).matrix();
        const MatrixXd block = h.transpose() * wgt.asDiagonal() * h;
        hess.block(ki * m, kj * m, m, m) = block;
        if (ki != kj) hess.block(kj * m, ki * m, m, m) = block;
      }
    if (k_ss.rows() > 0)
      for (Eigen::Index ki = 0; ki < k; ++ki)
        hess.block(ki * m + 1, ki * m + 1, m - 1, m - 1) += (1.0 / c) * k_ss;

    Eigen::VectorXd gvec(k * m);
    for (Eigen::Index ki = 0; ki < k; ++ki)
      gvec.segment(ki * m, m) = grad.row(ki).transpose();

    // The softmax gauge direction makes the plain Hessian singular, so a
    // ridge is always welcome; escalate it if the factorization still fails.
    const double scale = std::max(1.0, hess.diagonal().maxCoeff());
    double ridge = 1e-10 * scale;
    VectorXd step;
    bool ok = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      MatrixXd damped = hess;
      damped.diagonal().array() += ridge;
      Eigen::LDLT<MatrixXd> ldlt(damped);
      if (ldlt.info() == Eigen::Success) {
        step = ldlt.solve(gvec);
        if (step.allFinite()) {
          ok = true;
          break;
        }
      }
      ridge *= 100.0;
    }
    if (!ok) throw NumericError("IVM Newton system singular beyond repair");

    // Backtracking line search keeps the objective monotone.
    MatrixXd dir(k, m);
    for (Eigen::Index ki = 0; ki < k; ++ki)
      dir.row(ki) = step.segment(ki * m, m).transpose();
    double lr = 1.0;
    double new_obj = obj;
    MatrixXd a_new = a;
    for (int ls = 0; ls < 30; ++ls) {
      a_new = a - lr * dir;
      new_obj = klr_objective(h, k_ss, labels, c, a_new);
      if (std::isfinite(new_obj) && new_obj <= obj) break;
      lr *= 0.5;
    }
    if (!(new_obj <= obj)) break;  // no progress in any tested step size
    a = a_new;
    const double drop = (obj - new_obj) / std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (drop < tol) break;
  }
  return obj;
}

/// One or two Newton iterations over just the coefficients of an incoming
/// kernel column, everything else frozen. Cheap enough to score every
/// candidate; the returned value estimates the post-refit objective.
double score_candidate(const MatrixXd& scores_base, const VectorXd& kcol,
                       double k_qq, const VectorXd& cross,
                       const std::vector<int>& labels, double c,
                       double base_reg) {
  const Eigen::Index n = scores_base.rows(), k = scores_base.cols();
  VectorXd v = VectorXd::Zero(k);
  auto objective = [&](const VectorXd& vv) {
    const MatrixXd scores = scores_base + kcol * vv.transpose();
    double reg = base_reg + (1.0 / c) * cross.dot(vv) +
                 0.5 / c * k_qq * vv.squaredNorm();
    return nll_of_scores(scores, labels) + reg;
  };
  double obj = objective(v);
  for (int it = 0; it < 2; ++it) {
    const MatrixXd scores = scores_base + kcol * v.transpose();
    const MatrixXd p = softmax_rows(scores);
    VectorXd grad = VectorXd::Zero(k);
    MatrixXd hess = MatrixXd::Zero(k, k);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double kv = kcol(i);
      for (Eigen::Index a = 0; a < k; ++a) {
        const double pa = p(i, a);
        grad(a) += kv * (pa - (labels[i] == a ? 1.0 : 0.0));
        for (Eigen::Index b = a; b < k; ++b) {
          const double w = (a == b) ? pa * (1.0 - pa) : -pa * p(i, b);
          hess(a, b) += kv * kv * w;
        }
      }
    }
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b < a; ++b) hess(a, b) = hess(b, a);
    grad += (1.0 / c) * (cross + k_qq * v);
    hess.diagonal().array() += (1.0 / c) * k_qq + 1e-10;
    VectorXd step = hess.ldlt().solve(grad);
    if (!step.allFinite()) break;
    double lr = 1.0;
    for (int ls = 0; ls < 12; ++ls) {
      const VectorXd v_new = v - lr * step;
      const double o = objective(v_new);
      if (std::isfinite(o) && o <= obj) {
        v = v_new;
        obj = o;
        break;
      }
      lr *= 0.5;
    }
  }
  return obj;
}

struct Standardizer {
  std::vector<double> mean, sd;

  static Standardizer fit(const std::vector<double>& x, int n, int f) {
    Standardizer s;
    s.mean.assign(f, 0.0);
    s.sd.assign(f, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) s.mean[j] += x[static_cast<std::size_t>(i) * f + j];
    for (int j = 0; j < f; ++j) s.mean[j] /= n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < f; ++j) {
        const double d = x[static_cast<std::size_t>(i) * f + j] - s.mean[j];
        s.sd[j] += d * d;
      }
    for (int j = 0; j < f; ++j) {
      s.sd[j] = std::sqrt(s.sd[j] / std::max(1, n - 1));
      if (s.sd[j] < 1e-12) s.sd[j] = 1.0;  // constant feature: leave centered
    }
    return s;
  }

  double apply(double v, int j) const { return (v - mean[j]) / sd[j]; }
};

}  // namespace

IvmModel train_ivm(const TrainSet& train, double sigma, double c,
                   const IvmTrainConfig& cfg) {
  train.validate();
  if (!(sigma > 0.0)) throw DataError("IVM requires sigma > 0");
  if (!(c > 0.0)) throw DataError("IVM requires C > 0");
  if (cfg.max_import < 1) throw DataError("IVM max_import must be >= 1");
  if (!(cfg.tol > 0.0)) throw DataError("IVM tol must be > 0");
  if (train.distinct_labels() < 2)
    throw DataError("need >= 2 classes in the training labels");

  const int n = train.n, f = train.f, k = train.classes.size();
  const Standardizer std_ = Standardizer::fit(train.features, n, f);

  MatrixXd x(n, f);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j)
      x(i, j) = std_.apply(train.features[static_cast<std::size_t>(i) * f + j], j);

  // Full training kernel; candidate columns are read straight out of it.
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  MatrixXd kfull(n, n);
  {
    const VectorXd sq = x.rowwise().squaredNorm();
    kfull = ((-(sq.replicate(1, n) + sq.transpose().replicate(n, 1) -
                2.0 * x * x.transpose())) *
             inv2s2)
                .array()
                .exp()
                .matrix();
  }

  std::vector<int> imports;
  MatrixXd h = MatrixXd::Ones(n, 1);
  MatrixXd k_ss(0, 0);
  MatrixXd a = MatrixXd::Zero(k, 1);

  // Bias-only fit gives the starting objective (log class priors).
  double obj = newton_fit(h, k_ss, train.labels, c, a, cfg.newton_max_iter,
                          cfg.newton_tol);

  std::vector<char> in_model(n, 0);
  Rng rng(cfg.seed);

  while (static_cast<int>(imports.size()) < cfg.max_import) {
    // Candidate pool, optionally subsampled.
    std::vector<int> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i)
      if (!in_model[i]) pool.push_back(i);
    if (pool.empty()) break;
    if (cfg.candidate_subsample > 0 &&
        static_cast<int>(pool.size()) > cfg.candidate_subsample) {
      for (int i = 0; i < cfg.candidate_subsample; ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.uniform_int(pool.size() - i));
        std::swap(pool[i], pool[j]);
      }
      pool.resize(cfg.candidate_subsample);
      std::sort(pool.begin(), pool.end());
    }

    const MatrixXd scores_base = h * a.transpose();
    const MatrixXd w = a.cols() > 1 ? a.rightCols(a.cols() - 1) : MatrixXd(k, 0);
    const double base_reg =
        k_ss.rows() > 0 ? 0.5 / c * (w * k_ss).cwiseProduct(w).sum() : 0.0;

    int best_q = -1;
    double best_score = std::numeric_limits<double>::infinity();
    for (int q : pool) {
      const VectorXd kcol = kfull.col(q);
      VectorXd cross = VectorXd::Zero(k);
      if (!imports.empty()) {
        VectorXd kq(imports.size());
        for (std::size_t s = 0; s < imports.size(); ++s)
          kq(s) = kfull(imports[s], q);
        cross = w * kq;
      }
      const double score = score_candidate(scores_base, kcol, 1.0, cross,
                                           train.labels, c, base_reg);
      if (score < best_score) {
        best_score = score;
        best_q = q;
      }
    }
    if (best_q < 0) break;

    // Admit the winner and refit everything jointly from the warm start.
    const int s_old = static_cast<int>(imports.size());
    imports.push_back(best_q);
    in_model[best_q] = 1;

    h.conservativeResize(Eigen::NoChange, s_old + 2);
    h.col(s_old + 1) = kfull.col(best_q);
    MatrixXd k_new(s_old + 1, s_old + 1);
    if (s_old > 0) k_new.topLeftCorner(s_old, s_old) = k_ss;
    for (int i = 0; i <= s_old; ++i) {
      k_new(i, s_old) = kfull(imports[i], best_q);
      k_new(s_old, i) = k_new(i, s_old);
    }
    k_ss = std::move(k_new);
    a.conservativeResize(Eigen::NoChange, s_old + 2);
    a.col(s_old + 1).setZero();

    const double new_obj = newton_fit(h, k_ss, train.labels, c, a,
                                      cfg.newton_max_iter, cfg.newton_tol);
    const double drop = (obj - new_obj) / std::max(1.0, std::abs(obj));
    obj = new_obj;
    if (drop < cfg.tol) break;
  }

  IvmModel model;
  model.classes = train.classes;
  model.k = k;
  model.s = static_cast<int>(imports.size());
  model.f = f;
  model.sigma = sigma;
  model.c = c;
  model.alpha.resize(static_cast<std::size_t>(k) * (model.s + 1));
  for (int ki = 0; ki < k; ++ki)
    for (int j = 0; j <= model.s; ++j)
      model.alpha[static_cast<std::size_t>(ki) * (model.s + 1) + j] = a(ki, j);
  model.import_points.resize(static_cast<std::size_t>(model.s) * f);
  for (int s = 0; s < model.s; ++s)
    for (int j = 0; j < f; ++j)
      model.import_points[static_cast<std::size_t>(s) * f + j] =
          x(imports[s], j);
  model.feat_mean = std_.mean;
  model.feat_sd = std_.sd;
  return model;
}

IvmModel train_ivm(const TrainSet& train, double sigma, double c,
                   int max_import, double tol) {
  IvmTrainConfig cfg;
  cfg.max_import = max_import;
  cfg.tol = tol;
  return train_ivm(train, sigma, c, cfg);
}

namespace {

void predict_into(const IvmModel& model, const double* raw, double* out) {
  // standardized query
  thread_local std::vector<double> q;
  q.resize(model.f);
  for (int j = 0; j < model.f; ++j)
    q[j] = (raw[j] - model.feat_mean[j]) / model.feat_sd[j];

  thread_local std::vector<double> scores;
  scores.assign(model.k, 0.0);
  const int cols = model.s + 1;
  for (int ki = 0; ki < model.k; ++ki)
    scores[ki] = model.alpha[static_cast<std::size_t>(ki) * cols];  // bias
  const double inv2s2 = 1.0 / (2.0 * model.sigma * model.sigma);
  for (int s = 0; s < model.s; ++s) {
    const double* ip = model.import_points.data() + static_cast<std::size_t>(s) * model.f;
    double d2 = 0.0;
    for (int j = 0; j < model.f; ++j) {
      const double d = q[j] - ip[j];
      d2 += d * d;
    }
    const double kv = std::exp(-d2 * inv2s2);
    for (int ki = 0; ki < model.k; ++ki)
      scores[ki] += model.alpha[static_cast<std::size_t>(ki) * cols + 1 + s] * kv;
  }
  double m = scores[0];
  for (int ki = 1; ki < model.k; ++ki) m = std::max(m, scores[ki]);
  double sum = 0.0;
  for (int ki = 0; ki < model.k; ++ki) {
    out[ki] = std::exp(scores[ki] - m);
    sum += out[ki];
  }
  for (int ki = 0; ki < model.k; ++ki) out[ki] /= sum;
}

}  // namespace

ProbabilityStack predict_proba(const IvmModel& model, const FeatureStack& stack,
                               int threads) {
  if (stack.f != model.f)
    throw DataError("feature count " + std::to_string(stack.f) +
                    " does not match model's " + std::to_string(model.f));
  ProbabilityStack p(stack.t, stack.h, stack.w, model.k);
  const std::size_t npix = static_cast<std::size_t>(stack.t) * stack.h * stack.w;
  parallel_chunks(npix, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      predict_into(model, stack.values.data() + i * stack.f,
                   p.values.data() + i * model.k);
  });
  return p;
}

std::vector<double> predict_proba_one(const IvmModel& model,
                                      const std::vector<double>& features) {
  if (static_cast<int>(features.size()) != model.f)
    throw DataError("feature count does not match model");
  std::vector<double> out(model.k);
  predict_into(model, features.data(), out.data());
  return out;
}

GridSearchResult grid_search_cv(const TrainSet& train,
                                const std::vector<double>& sigma_grid,
                                const std::vector<double>& c_grid, int folds,
                                const IvmTrainConfig& cfg) {
  train.validate();
  if (sigma_grid.empty() || c_grid.empty())
    throw DataError("grid search needs non-empty grids");
  if (folds < 2) throw DataError("grid search needs >= 2 folds");

  // Stratified fold ids: round-robin within each class, in input order.
  const int k = train.classes.size();
  std::vector<int> fold_of(train.n);
  {
    std::vector<int> per_class(k, 0);
    for (int i = 0; i < train.n; ++i)
      fold_of[i] = per_class[train.labels[i]]++ % folds;
    for (int ki = 0; ki < k; ++ki)
      if (per_class[ki] > 0 && per_class[ki] < folds)
        throw DataError("class '" + train.classes.name(ki) + "' has " +
                        std::to_string(per_class[ki]) +
                        " samples, fewer than " + std::to_string(folds) +
                        " folds");
  }

  GridSearchResult best;
  bool have_best = false;
  for (double sigma : sigma_grid)
    for (double c : c_grid) {
      long long correct = 0, total = 0;
      for (int fold = 0; fold < folds; ++fold) {
        TrainSet sub;
        sub.classes = train.classes;
        sub.f = train.f;
        std::vector<int> val_idx;
        for (int i = 0; i < train.n; ++i) {
          if (fold_of[i] == fold) {
            val_idx.push_back(i);
          } else {
            sub.features.insert(
                sub.features.end(),
                train.features.begin() + static_cast<std::size_t>(i) * train.f,
                train.features.begin() +
                    static_cast<std::size_t>(i + 1) * train.f);
            sub.labels.push_back(train.labels[i]);
            if (!train.polygon_ids.empty())
              sub.polygon_ids.push_back(train.polygon_ids[i]);
            ++sub.n;
          }
        }
        const IvmModel model = train_ivm(sub, sigma, c, cfg);
        for (int i : val_idx) {
          const std::vector<double> feat(
              train.features.begin() + static_cast<std::size_t>(i) * train.f,
              train.features.begin() + static_cast<std::size_t>(i + 1) * train.f);
          const auto p = predict_proba_one(model, feat);
          const int pred = static_cast<int>(
              std::max_element(p.begin(), p.end()) - p.begin());
          correct += pred == train.labels[i];
          ++total;
        }
      }
      const double acc = static_cast<double>(correct) / total;
      const bool wins =
          !have_best || acc > best.mean_accuracy ||
          (acc == best.mean_accuracy &&
           (c < best.c || (c == best.c && sigma < best.sigma)));
      if (wins) {
        best = {sigma, c, acc};
        have_best = true;
      }
    }
  return best;
}

double median_pairwise_distance(const TrainSet& train, int max_pairs) {
  train.validate();
  const Standardizer std_ = Standardizer::fit(train.features, train.n, train.f);
  Rng rng(0x5eed);
  std::vector<double> dists;
  const long long all_pairs =
      static_cast<long long>(train.n) * (train.n - 1) / 2;
  auto dist = [&](int i, int j) {
    double d2 = 0.0;
    for (int f = 0; f < train.f; ++f) {
      const double a =
          std_.apply(train.features[static_cast<std::size_t>(i) * train.f + f], f);
      const double b =
          std_.apply(train.features[static_cast<std::size_t>(j) * train.f + f], f);
      d2 += (a - b) * (a - b);
    }
    return std::sqrt(d2);
  };
  if (all_pairs <= max_pairs) {
    for (int i = 0; i < train.n; ++i)
      for (int j = i + 1; j < train.n; ++j) dists.push_back(dist(i, j));
  } else {
    dists.reserve(max_pairs);
    for (int p = 0; p < max_pairs; ++p) {
      const int i = static_cast<int>(rng.uniform_int(train.n));
      int j = static_cast<int>(rng.uniform_int(train.n - 1));
      if (j >= i) ++j;
      dists.push_back(dist(i, j));
    }
  }
  if (dists.empty()) return 1.0;
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2,
                   dists.end());
  const double med = dists[dists.size() / 2];
  return med > 0.0 ? med : 1.0;
}

// ============================================================================
// Serialization
// ============================================================================

namespace {

void write_u32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw DataError("truncated IVM model file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

void write_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

double read_f64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw DataError("truncated IVM model file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void IvmModel::save(std::ostream& out) const {
  out.write("IVM1", 4);
  write_u32(out, static_cast<std::uint32_t>(k));
  write_u32(out, static_cast<std::uint32_t>(s));
  write_u32(out, static_cast<std::uint32_t>(f));
  write_f64(out, sigma);
  write_f64(out, c);
  for (double v : alpha) write_f64(out, v);
  for (double v : import_points) write_f64(out, v);
  for (double v : feat_mean) write_f64(out, v);
  for (double v : feat_sd) write_f64(out, v);
  if (!out) throw DataError("failed writing IVM model");
}

IvmModel IvmModel::load(std::istream& in, const ClassSet& classes) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::string(magic, 4) != "IVM1")
    throw DataError("not an IVM model file (bad magic)");
  IvmModel m;
  m.classes = classes;
  m.k = static_cast<int>(read_u32(in));
  m.s = static_cast<int>(read_u32(in));
  m.f = static_cast<int>(read_u32(in));
  if (m.k != classes.size())
    throw DataError("model has K=" + std::to_string(m.k) +
                    " but class set has " + std::to_string(classes.size()));
  if (m.k < 1 || m.s < 0 || m.f < 1) throw DataError("corrupt IVM header");
  m.sigma = read_f64(in);
  m.c = read_f64(in);
  m.alpha.resize(static_cast<std::size_t>(m.k) * (m.s + 1));
  for (auto& v : m.alpha) v = read_f64(in);
  m.import_points.resize(static_cast<std::size_t>(m.s) * m.f);
  for (auto& v : m.import_points) v = read_f64(in);
  m.feat_mean.resize(m.f);
  for (auto& v : m.feat_mean) v = read_f64(in);
  m.feat_sd.resize(m.f);
  for (auto& v : m.feat_sd) v = read_f64(in);
  return m;
}

void IvmModel::save_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  save(out);
}

IvmModel IvmModel::load_file(const std::string& path, const ClassSet& classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open IVM model: " + path);
  return load(in, classes);
}

}  // namespace stmrf
