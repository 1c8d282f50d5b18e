// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/vc_gmm.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "model_io.hpp"
#include "whisperconv/banded.hpp"
#include "whisperconv/binary_io.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/parallel.hpp"

namespace whisperconv {

Eigen::MatrixXd BandedSpdMatrix::to_dense() const {
  const Eigen::Index n = size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k <= bandwidth_ && k <= i; ++k) {
      a(i, i - k) = band_(i, k);
      a(i - k, i) = band_(i, k);
    }
  }
  return a;
}

Vector BandedSpdMatrix::solve(const Vector& rhs) const {
  const Eigen::Index n = size();
  if (rhs.size() != n) throw DimensionError("banded solve: rhs size mismatch");
  const Eigen::Index b = bandwidth_;
  Matrix l = Matrix::Zero(n, b + 1);  // l(i, k) = L(i, i - k)
  auto lv = [&](Eigen::Index i, Eigen::Index j) { return l(i, i - j); };
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index j0 = std::max<Eigen::Index>(0, i - b);
    for (Eigen::Index j = j0; j <= i; ++j) {
      double s = band_(i, i - j);
      for (Eigen::Index k = std::max(j0, j - b); k < j; ++k) s -= lv(i, k) * lv(j, k);
      if (i == j) {
        if (!(s > 0.0)) throw DimensionError("banded matrix is not positive definite");
        l(i, 0) = std::sqrt(s);
      } else {
        l(i, i - j) = s / l(j, 0);
      }
    }
  }
  Vector y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double s = rhs[i];
    for (Eigen::Index k = std::max<Eigen::Index>(0, i - b); k < i; ++k) s -= lv(i, k) * y[k];
    y[i] = s / l(i, 0);
  }
  Vector x(n);
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (Eigen::Index k = i + 1; k <= std::min(n - 1, i + b); ++k) s -= lv(k, i) * x[k];
    x[i] = s / l(i, 0);
  }
  return x;
}

Matrix append_deltas(const Matrix& statics) {
  const Eigen::Index t = statics.rows();
  const Eigen::Index d = statics.cols();
  Matrix out(t, 2 * d);
  out.leftCols(d) = statics;
  if (t == 1) {
    out.rightCols(d).setZero();
    return out;
  }
  for (Eigen::Index i = 0; i < t; ++i) {
    if (i == 0) {
      out.row(i).tail(d) = statics.row(1) - statics.row(0);
    } else if (i == t - 1) {
      out.row(i).tail(d) = statics.row(t - 1) - statics.row(t - 2);
    } else {
      out.row(i).tail(d) = 0.5 * (statics.row(i + 1) - statics.row(i - 1));
    }
  }
  return out;
}

JointFeatureSet build_joint_vectors(const AlignedPairSet& pairs, std::vector<std::string>* skipped) {
  const int order = pairs.order;
  const int d = order - 1;
  JointFeatureSet out;
  out.static_dim = d;
  std::vector<Matrix> blocks;
  Eigen::Index total = 0;
  const auto spans = pairs.utterance_spans();
  for (std::size_t u = 0; u < spans.size(); ++u) {
    const auto [begin, end] = spans[u];
    const Eigen::Index n = end - begin;
    if (n < 2) {
      if (skipped) skipped->push_back(pairs.utterance_ids[u]);
      continue;
    }
    Matrix block(n, 4 * d);
    block.leftCols(2 * d) = append_deltas(pairs.rows.block(begin, 1, n, d));
    block.rightCols(2 * d) = append_deltas(pairs.rows.block(begin, order + 1, n, d));
    out.utterance_spans.emplace_back(total, total + n);
    total += n;
    blocks.push_back(std::move(block));
  }
  out.rows.resize(total, 4 * d);
  Eigen::Index at = 0;
  for (const auto& b : blocks) {
    out.rows.middleRows(at, b.rows()) = b;
    at += b.rows();
  }
  return out;
}

void GmmModel::validate() const {
  const auto k = weights.size();
  if (k == 0) throw ModelError("GMM has no mixtures");
  if (means.rows() != k || static_cast<Eigen::Index>(covariances.size()) != k) {
    throw ModelError("GMM parameter shapes disagree");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-6 || weights.minCoeff() < 0.0) {
    throw ModelError("GMM weights are not a probability vector");
  }
  for (const auto& c : covariances) {
    if (c.rows() != means.cols() || c.cols() != means.cols()) throw ModelError("GMM covariance shape");
  }
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct ComponentFactor {
  Eigen::MatrixXd chol;  // lower
  double log_det = 0.0;
};

ComponentFactor factor(const Eigen::MatrixXd& cov) {
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw TrainingError("covariance is not positive definite");
  ComponentFactor f;
  f.chol = llt.matrixL();
  f.log_det = 2.0 * f.chol.diagonal().array().log().sum();
  return f;
}

// Log-density of every row of `data` under N(mean, LL').
Vector log_gaussian(const Matrix& data, const Eigen::RowVectorXd& mean, const ComponentFactor& f) {
  Eigen::MatrixXd centered = (data.rowwise() - mean).transpose();
  f.chol.triangularView<Eigen::Lower>().solveInPlace(centered);
  const double c = -0.5 * (static_cast<double>(data.cols()) * kLog2Pi + f.log_det);
  return (c - 0.5 * centered.colwise().squaredNorm().array()).matrix().transpose();
}

// Raises eigenvalues below `floor` to `floor`; untouched when S - floor*I is
// already positive definite.
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& s, double floor) {
  Eigen::MatrixXd shifted = s;
  shifted.diagonal().array() -= floor;
  Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  if (llt.info() == Eigen::Success) return s;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(s);
  Vector values = eig.eigenvalues().cwiseMax(floor);
  Eigen::MatrixXd out = eig.eigenvectors() * values.asDiagonal() * eig.eigenvectors().transpose();
  return 0.5 * (out + out.transpose());
}

double log_sum_exp(const Eigen::Ref<const Eigen::RowVectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

struct KmeansResult {
  Matrix centers;
  std::vector<int> labels;
  double inertia = std::numeric_limits<double>::infinity();
};

Matrix squared_distances(const Matrix& data, const Matrix& centers, const Vector& data_norms) {
  Matrix d = -2.0 * data * centers.transpose();
  d.colwise() += data_norms;
  d.rowwise() += centers.rowwise().squaredNorm().transpose();
  return d.cwiseMax(0.0);
}

KmeansResult kmeans_once(const Matrix& data, int k, int max_iter, std::mt19937_64& rng) {
  const Eigen::Index n = data.rows();
  const Vector norms = data.rowwise().squaredNorm();
  KmeansResult r;
  r.centers.resize(k, data.cols());
  // k-means++ seeding.
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  r.centers.row(0) = data.row(pick(rng));
  Vector closest = (data.rowwise() - r.centers.row(0)).rowwise().squaredNorm();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int c = 1; c < k; ++c) {
    const double total = closest.sum();
    Eigen::Index chosen = pick(rng);
    if (total > 0.0) {
      double target = unit(rng) * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        target -= closest[i];
        if (target <= 0.0) {
          chosen = i;
          break;
        }
      }
    }
    r.centers.row(c) = data.row(chosen);
    closest = closest.cwiseMin((data.rowwise() - r.centers.row(c)).rowwise().squaredNorm());
  }

  r.labels.assign(static_cast<std::size_t>(n), -1);
  for (int iter = 0; iter < max_iter; ++iter) {
    const Matrix dist = squared_distances(data, r.centers, norms);
    bool changed = false;
    r.inertia = 0.0;
    Vector best_dist(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index arg;
      best_dist[i] = dist.row(i).minCoeff(&arg);
      r.inertia += best_dist[i];
      if (r.labels[static_cast<std::size_t>(i)] != static_cast<int>(arg)) {
        r.labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        changed = true;
      }
    }
    if (!changed && iter > 0) break;
    Matrix sums = Matrix::Zero(k, data.cols());
    std::vector<Eigen::Index> counts(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const int c = r.labels[static_cast<std::size_t>(i)];
      sums.row(c) += data.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        r.centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      } else {
        // Re-seed an empty cluster at the worst-fit point.
        Eigen::Index far;
        best_dist.maxCoeff(&far);
        r.centers.row(c) = data.row(far);
        best_dist[far] = 0.0;
      }
    }
  }
  return r;
}

GmmModel initialize_from_kmeans(const Matrix& data, const KmeansResult& km, int k, double floor) {
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  GmmModel m;
  m.weights = Vector::Zero(k);
  m.means = km.centers;
  m.covariances.assign(static_cast<std::size_t>(k), Eigen::MatrixXd::Zero(dim, dim));
  const Eigen::RowVectorXd global_mean = data.colwise().mean();
  const Matrix centered_all = data.rowwise() - global_mean;
  const Eigen::MatrixXd global_cov = centered_all.transpose() * centered_all / static_cast<double>(n);
  for (int c = 0; c < k; ++c) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (km.labels[static_cast<std::size_t>(i)] == c) members.push_back(i);
    }
    m.weights[c] = std::max<double>(static_cast<double>(members.size()), 1.0);
    if (members.size() < 2) {
      m.covariances[static_cast<std::size_t>(c)] = floor_covariance(global_cov, floor);
      continue;
    }
    Matrix block(static_cast<Eigen::Index>(members.size()), dim);
    for (std::size_t r = 0; r < members.size(); ++r) {
      block.row(static_cast<Eigen::Index>(r)) = data.row(members[r]);
    }
    m.means.row(c) = block.colwise().mean();
    const Matrix centered = block.rowwise() - m.means.row(c);
    m.covariances[static_cast<std::size_t>(c)] = floor_covariance(
        centered.transpose() * centered / static_cast<double>(members.size()), floor);
  }
  m.weights /= m.weights.sum();
  return m;
}

}  // namespace

Matrix gmm_posteriors(const GmmModel& m, const Matrix& data, Vector* row_log_likelihood) {
  const int k = m.mixtures();
  if (data.cols() != m.dim()) throw DimensionError("data dimension does not match the GMM");
  Matrix logp(data.rows(), k);
  for (int c = 0; c < k; ++c) {
    const auto f = factor(m.covariances[static_cast<std::size_t>(c)]);
    logp.col(c) = log_gaussian(data, m.means.row(c), f).array() + std::log(m.weights[c]);
  }
  Vector ll(data.rows());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    ll[i] = log_sum_exp(logp.row(i));
    logp.row(i) = (logp.row(i).array() - ll[i]).exp();
  }
  if (row_log_likelihood) *row_log_likelihood = std::move(ll);
  return logp;
}

GmmModel fit_gmm(const Matrix& data, const GmmTrainOptions& options, GmmTrainReport* report) {
  const int k = options.mixtures;
  const Eigen::Index n = data.rows();
  const Eigen::Index dim = data.cols();
  if (k < 1) throw ConfigError("mixture count must be at least 1");
  if (!(options.tol >= 0.0)) throw ConfigError("convergence tolerance must be non-negative");
  if (n < 10 * static_cast<Eigen::Index>(k)) {
    throw TrainingError("GMM training needs at least 10 frames per mixture (" + std::to_string(n) +
                        " frames for " + std::to_string(k) + " mixtures)");
  }
  if (!data.allFinite()) throw TrainingError("GMM training data contains non-finite values");

  const Eigen::RowVectorXd mu = data.colwise().mean();
  const double mean_var = (data.rowwise() - mu).colwise().squaredNorm().sum() /
                          (static_cast<double>(n) * static_cast<double>(dim));
  // Absolute minimum so that constant data still yields usable factors.
  const double floor = std::max(options.covariance_floor * mean_var, 1e-10);

  std::mt19937_64 rng(options.seed);
  KmeansResult best;
  for (int r = 0; r < std::max(1, options.kmeans_restarts); ++r) {
    auto km = kmeans_once(data, k, options.kmeans_max_iter, rng);
    if (km.inertia < best.inertia) best = std::move(km);
  }
  GmmModel m = initialize_from_kmeans(data, best, k, floor);

  GmmTrainReport local;
  GmmTrainReport& rep = report ? *report : local;
  rep.log_likelihood.clear();
  rep.converged = false;

  std::vector<ComponentFactor> factors(static_cast<std::size_t>(k));
  Matrix logp(n, k);
  for (int iter = 0; iter < options.max_iter; ++iter) {
    // E-step.
    parallel_for(static_cast<std::size_t>(k), options.jobs, [&](std::size_t c) {
      factors[c] = factor(m.covariances[c]);
      logp.col(static_cast<Eigen::Index>(c)) =
          log_gaussian(data, m.means.row(static_cast<Eigen::Index>(c)), factors[c]).array() +
          std::log(m.weights[static_cast<Eigen::Index>(c)]);
    });
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double lse = log_sum_exp(logp.row(i));
      total += lse;
      logp.row(i) = (logp.row(i).array() - lse).exp();
    }
    const double ll = total / static_cast<double>(n);
    if (!std::isfinite(ll)) throw DivergenceError("GMM log-likelihood became non-finite");
    rep.log_likelihood.push_back(ll);
    if (options.tol > 0.0 && rep.log_likelihood.size() >= 2) {
      const double prev = rep.log_likelihood[rep.log_likelihood.size() - 2];
      if ((ll - prev) / std::max(std::abs(prev), 1e-300) < options.tol) {
        rep.converged = true;
        break;
      }
    }
    // M-step.
    const Matrix& resp = logp;
    parallel_for(static_cast<std::size_t>(k), options.jobs, [&](std::size_t cu) {
      const auto c = static_cast<Eigen::Index>(cu);
      const double nk = resp.col(c).sum();
      m.weights[c] = nk / static_cast<double>(n);
      if (nk < 1e-10) return;  // starved component keeps its parameters
      m.means.row(c) = (resp.col(c).transpose() * data) / nk;
      const Matrix centered = data.rowwise() - m.means.row(c);
      const Matrix weighted = centered.array().colwise() * resp.col(c).array();
      Eigen::MatrixXd cov = weighted.transpose() * centered / nk;
      cov = 0.5 * (cov + cov.transpose());
      m.covariances[cu] = floor_covariance(cov, floor);
    });
    m.weights /= m.weights.sum();
  }
  m.gv_mean = Vector();
  return m;
}

GmmModel train_gmm(const JointFeatureSet& data, const GmmTrainOptions& options, GmmTrainReport* report) {
  if (data.rows.cols() != data.dim()) throw DimensionError("joint feature width mismatch");
  GmmModel m = fit_gmm(data.rows, options, report);
  const int d = data.static_dim;
  Vector gv = Vector::Zero(d);
  int used = 0;
  for (const auto& [begin, end] : data.utterance_spans) {
    if (end - begin < 2) continue;
    const Matrix block = data.rows.block(begin, 2 * d, end - begin, d);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    gv += ((block.rowwise() - mean).colwise().squaredNorm() / static_cast<double>(end - begin)).transpose();
    ++used;
  }
  if (used == 0) throw TrainingError("no utterance long enough for global variance statistics");
  m.gv_mean = gv / used;
  return m;
}

Matrix mlpg_solve(const MlpgProblem& p) {
  const Eigen::Index t = p.static_mean.rows();
  const Eigen::Index d = p.static_mean.cols();
  Matrix out(t, d);
  if (t == 0) return out;
  // Delta window row for frame i: coefficients on frames i-1, i, i+1.
  auto delta_coeffs = [t](Eigen::Index i) -> std::array<double, 3> {
    if (t == 1) return {0.0, 0.0, 0.0};
    if (i == 0) return {0.0, -1.0, 1.0};
    if (i == t - 1) return {-1.0, 1.0, 0.0};
    return {-0.5, 0.0, 0.5};
  };
  for (Eigen::Index dim = 0; dim < d; ++dim) {
    BandedSpdMatrix a(t, 2);
    Vector rhs = Vector::Zero(t);
    for (Eigen::Index i = 0; i < t; ++i) {
      const double vs = p.static_var(i, dim);
      const double vd = p.delta_var(i, dim);
      const double cv = p.covariance(i, dim);
      const double det = vs * vd - cv * cv;
      if (!(vs > 0.0) || !(det > 0.0)) throw DimensionError("MLPG covariance is not positive definite");
      // Precision of the (static, delta) pair.
      const double pss = vd / det;
      const double pdd = vs / det;
      const double psd = -cv / det;
      const auto w = delta_coeffs(i);
      // Observation rows: static picks y_i; delta = sum_j w[j] * y_{i-1+j}.
      const double ms = p.static_mean(i, dim);
      const double md = p.delta_mean(i, dim);
      // Static-static term.
      a.at(i, i) += pss;
      rhs[i] += pss * ms + psd * md;
      for (int j = 0; j < 3; ++j) {
        if (w[j] == 0.0) continue;
        const Eigen::Index col = i - 1 + j;
        // Cross terms between the static row and the delta row.
        if (col == i) {
          a.at(i, i) += 2.0 * psd * w[j];
        } else {
          a.at(std::max(i, col), std::min(i, col)) += psd * w[j];
        }
        rhs[col] += w[j] * (psd * ms + pdd * md);
        for (int k = 0; k < 3; ++k) {
          if (w[k] == 0.0) continue;
          const Eigen::Index col2 = i - 1 + k;
          if (col2 > col) continue;
          a.at(col, col2) += pdd * w[j] * w[k];
        }
      }
    }
    out.col(dim) = a.solve(rhs);
  }
  return out;
}

void apply_global_variance(Matrix& y, const Vector& gv_mean, double weight) {
  if (gv_mean.size() != y.cols()) throw DimensionError("GV statistics do not match trajectory width");
  if (y.rows() < 2) return;
  for (Eigen::Index d = 0; d < y.cols(); ++d) {
    const double mean = y.col(d).mean();
    const double var = (y.col(d).array() - mean).square().mean();
    if (!(var > 0.0) || !(gv_mean[d] > 0.0)) continue;
    const double scale = std::pow(gv_mean[d] / var, 0.5 * weight);
    y.col(d) = ((y.col(d).array() - mean) * scale + mean).matrix();
  }
}

namespace {

struct ConditionalComponent {
  ComponentFactor source_factor;
  Eigen::MatrixXd regression;  // A = S_yx S_xx^-1
  Eigen::MatrixXd covariance;  // S_yy - A S_xy
};

std::vector<ConditionalComponent> conditional_components(const GmmModel& m) {
  const int half = m.dim() / 2;
  std::vector<ConditionalComponent> out(static_cast<std::size_t>(m.mixtures()));
  for (int c = 0; c < m.mixtures(); ++c) {
    const auto& s = m.covariances[static_cast<std::size_t>(c)];
    const Eigen::MatrixXd sxx = s.topLeftCorner(half, half);
    const Eigen::MatrixXd syx = s.bottomLeftCorner(half, half);
    const Eigen::MatrixXd syy = s.bottomRightCorner(half, half);
    auto& cc = out[static_cast<std::size_t>(c)];
    cc.source_factor = factor(sxx);
    Eigen::LLT<Eigen::MatrixXd> llt(sxx);
    cc.regression = llt.solve(syx.transpose()).transpose();
    cc.covariance = syy - cc.regression * syx.transpose();
  }
  return out;
}

}  // namespace

MlpgProblem gmm_conditional_problem(const GmmModel& m, const Cepstrogram& src) {
  m.validate();
  const int d = src.config.order - 1;
  if (m.dim() != 4 * d) throw ModelError("GMM dimension does not match the feature order");
  if (m.gv_mean.size() != d) throw ModelError("GMM is missing global variance statistics");
  const Eigen::Index t = src.frames.rows();
  const Matrix x = append_deltas(src.frames.rightCols(d));
  const auto comps = conditional_components(m);
  const int half = 2 * d;

  // Max-posterior component given the source half of the joint density.
  Matrix logp(t, m.mixtures());
  for (int c = 0; c < m.mixtures(); ++c) {
    logp.col(c) = log_gaussian(x, m.means.row(c).head(half), comps[static_cast<std::size_t>(c)].source_factor)
                      .array() +
                  std::log(std::max(m.weights[c], 1e-300));
  }
  MlpgProblem p{Matrix(t, d), Matrix(t, d), Matrix(t, d), Matrix(t, d), Matrix(t, d)};
  for (Eigen::Index i = 0; i < t; ++i) {
    Eigen::Index c;
    logp.row(i).maxCoeff(&c);
    const auto& cc = comps[static_cast<std::size_t>(c)];
    const Vector mean = m.means.row(c).tail(half).transpose() +
                        cc.regression * (x.row(i) - m.means.row(c).head(half)).transpose();
    p.static_mean.row(i) = mean.head(d).transpose();
    p.delta_mean.row(i) = mean.tail(d).transpose();
    for (int k = 0; k < d; ++k) {
      // A Schur complement is SPD in exact arithmetic; guard the 2x2 block
      // against rounding.
      const double vs = std::max(cc.covariance(k, k), 1e-12);
      const double vd = std::max(cc.covariance(d + k, d + k), 1e-12);
      double cv = cc.covariance(k, d + k);
      if (vs * vd - cv * cv <= 1e-24) cv = 0.0;
      p.static_var(i, k) = vs;
      p.delta_var(i, k) = vd;
      p.covariance(i, k) = cv;
    }
  }
  return p;
}

Cepstrogram convert_gmm(const GmmModel& m, const Cepstrogram& src, const GmmConvertOptions& options) {
  if (!(m.config == src.config)) throw ModelError("GMM was trained with a different analysis config");
  const int d = src.config.order - 1;
  Cepstrogram out{Matrix(src.frames.rows(), src.config.order), src.config};
  if (src.frames.rows() == 0) return out;
  const MlpgProblem p = gmm_conditional_problem(m, src);
  Matrix y = mlpg_solve(p);
  if (options.global_variance) apply_global_variance(y, m.gv_mean, options.gv_weight);
  out.frames.col(0) = src.frames.col(0);
  out.frames.rightCols(d) = y;
  return out;
}

void save_gmm(const GmmModel& m, const std::filesystem::path& path) {
  m.validate();
  BinaryWriter out;
  out.magic("GMMV");
  out.u32(kGmmFormatVersion);
  out.u32(static_cast<std::uint32_t>(m.mixtures()));
  out.u32(static_cast<std::uint32_t>(m.dim()));
  for (Eigen::Index c = 0; c < m.weights.size(); ++c) out.f64(m.weights[c]);
  for (Eigen::Index c = 0; c < m.means.rows(); ++c) {
    for (Eigen::Index j = 0; j < m.means.cols(); ++j) out.f64(m.means(c, j));
  }
  for (const auto& cov : m.covariances) {
    const auto f = factor(cov);
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) out.f64(f.chol(i, j));
    }
  }
  out.u32(static_cast<std::uint32_t>(m.gv_mean.size()));
  for (Eigen::Index i = 0; i < m.gv_mean.size(); ++i) out.f64(m.gv_mean[i]);
  detail::write_analysis_config(out, m.config);
  out.str(m.trained_on);
  out.save(path);
}

GmmModel load_gmm(const std::filesystem::path& path) {
  auto in = BinaryReader::open(path);
  in.expect_magic("GMMV");
  if (in.u32() != kGmmFormatVersion) throw DecodeError(path.string() + ": unsupported GMMV version");
  const auto k = static_cast<Eigen::Index>(in.u32());
  const auto dim = static_cast<Eigen::Index>(in.u32());
  GmmModel m;
  m.weights.resize(k);
  for (Eigen::Index c = 0; c < k; ++c) m.weights[c] = in.f64();
  m.means.resize(k, dim);
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index j = 0; j < dim; ++j) m.means(c, j) = in.f64();
  }
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j <= i; ++j) l(i, j) = in.f64();
    }
    m.covariances.push_back(l * l.transpose());
  }
  const std::uint32_t gv = in.u32();
  m.gv_mean.resize(gv);
  for (std::uint32_t i = 0; i < gv; ++i) m.gv_mean[i] = in.f64();
  m.config = detail::read_analysis_config(in);
  m.trained_on = in.str();
  m.validate();
  return m;
}

}  // namespace whisperconv
