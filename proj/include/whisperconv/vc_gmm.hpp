// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "whisperconv/alignment.hpp"
#include "whisperconv/spectral.hpp"

namespace whisperconv {

/// Appends delta features: delta_t = 0.5 * (c_{t+1} - c_{t-1}); the first and
/// last frames use one-sided differences; a single frame has zero delta.
/// T x D -> T x 2D laid out as [statics, deltas].
Matrix append_deltas(const Matrix& statics);

/// Joint source/target vectors without c0:
/// [src c1.., src delta c1.., tgt c1.., tgt delta c1..].
struct JointFeatureSet {
  Matrix rows;
  int static_dim = 79;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> utterance_spans;

  int dim() const { return 4 * static_dim; }
};

/// Deltas are taken along each utterance's aligned row sequence, never across
/// utterances. Utterances with fewer than two rows are skipped.
JointFeatureSet build_joint_vectors(const AlignedPairSet& pairs,
                                    std::vector<std::string>* skipped = nullptr);

struct GmmTrainOptions {
  int mixtures = 64;
  /// Stop when the relative improvement of the mean log-likelihood drops
  /// below this value. Zero runs all max_iter iterations.
  double tol = 1e-3;
  int max_iter = 200;
  int kmeans_restarts = 10;
  int kmeans_max_iter = 100;
  /// Eigenvalue floor relative to the mean per-dimension data variance.
  double covariance_floor = 1e-6;
  std::uint64_t seed = 0;
  int jobs = 1;
};

struct GmmTrainReport {
  /// Mean per-frame log-likelihood before each M-step.
  std::vector<double> log_likelihood;
  bool converged = false;
};

struct GmmModel {
  Vector weights;
  Matrix means;                               // K x dim
  std::vector<Eigen::MatrixXd> covariances;  // K of dim x dim
  Vector gv_mean;                             // target static global variances
  AnalysisConfig config;
  std::string trained_on;

  int mixtures() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

/// Expectation-maximization for a full-covariance mixture, k-means++
/// initialized (best of several restarts by inertia).
GmmModel train_gmm(const JointFeatureSet& data, const GmmTrainOptions& options,
                   GmmTrainReport* report = nullptr);

/// Fits a mixture to arbitrary rows (no GV statistics).
GmmModel fit_gmm(const Matrix& data, const GmmTrainOptions& options, GmmTrainReport* report = nullptr);

/// Component posteriors (N x K) and per-row log-likelihoods.
Matrix gmm_posteriors(const GmmModel& m, const Matrix& data, Vector* row_log_likelihood = nullptr);

/// Per-dimension MLPG input: for every frame the static and delta means and
/// the 2x2 covariance between the static and delta of that dimension.
struct MlpgProblem {
  Matrix static_mean;  // T x D
  Matrix delta_mean;   // T x D
  Matrix static_var;   // T x D
  Matrix delta_var;    // T x D
  Matrix covariance;   // T x D, cov(static, delta)
};

/// Solves (W' P W) y = W' P m for each dimension with a banded Cholesky
/// factorization, W being the static/delta window of append_deltas.
Matrix mlpg_solve(const MlpgProblem& problem);

/// Rescales each column toward the target variance:
/// y' = mean + (y - mean) * (gv / var)^(0.5 * weight).
void apply_global_variance(Matrix& trajectory, const Vector& gv_mean, double weight = 0.8);

struct GmmConvertOptions {
  bool global_variance = true;
  double gv_weight = 0.8;
};

/// Max-posterior mixture per frame, Gaussian conditioning, MLPG, GV; c0 is
/// copied from the source.
Cepstrogram convert_gmm(const GmmModel& m, const Cepstrogram& src, const GmmConvertOptions& options = {});
/// The MLPG inputs convert_gmm builds for `src` (exposed for tests).
MlpgProblem gmm_conditional_problem(const GmmModel& m, const Cepstrogram& src);

/// GMMV file: "GMMV", u32 version, u32 K, u32 dim, weights, means, packed
/// lower Cholesky factors, u32 + gv_mean (float64 LE), then the analysis
/// config and trained_on descriptor.
inline constexpr std::uint32_t kGmmFormatVersion = 1;
void save_gmm(const GmmModel& m, const std::filesystem::path& path);
GmmModel load_gmm(const std::filesystem::path& path);

}  // namespace whisperconv
