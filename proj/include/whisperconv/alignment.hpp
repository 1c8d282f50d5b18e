// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "whisperconv/spectral.hpp"

namespace whisperconv {

/// Monotone frame pairing from (0, 0) to (Ts-1, Tt-1) with steps
/// (1,0), (0,1) or (1,1).
struct AlignmentPath {
  std::vector<std::pair<int, int>> pairs;
  double total_cost = 0.0;
};

/// Euclidean distance between two frames over c1..c(order-1).
double frame_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j);

struct TrimResult {
  Cepstrogram trimmed;
  int offset = 0;
};

/// Relative level (in nepers of c0) below the utterance maximum that counts
/// as silence: 40 dB.
inline constexpr double kSilenceThresholdNepers = 4.6;

/// Drops leading and trailing frames whose c0 is more than 40 dB below the
/// utterance maximum, keeping `margin_frames` on each side.
TrimResult trim_silence(const Cepstrogram& c, int margin_frames = 5);

/// Minimum-cost alignment. Ties prefer (1,1), then (1,0), then (0,1).
AlignmentPath dtw(const Cepstrogram& src, const Cepstrogram& tgt);
AlignmentPath dtw(const Matrix& src, const Matrix& tgt);

/// One parallel utterance: features already trimmed; offsets map frame
/// indices back to the untrimmed analysis.
struct ParallelUtterance {
  std::string id;
  Cepstrogram source;
  Cepstrogram target;
  int source_offset = 0;
  int target_offset = 0;
};

struct PairProvenance {
  int utterance = 0;  // index into AlignedPairSet::utterance_ids
  int source_frame = 0;
  int target_frame = 0;
};

/// N x (2 * order) rows: source frame followed by its aligned target frame.
struct AlignedPairSet {
  Matrix rows;
  int order = 80;
  std::vector<std::string> utterance_ids;
  std::vector<PairProvenance> provenance;

  Eigen::Index size() const { return rows.rows(); }
  auto source() const { return rows.leftCols(order); }
  auto target() const { return rows.rightCols(order); }
  /// Row ranges [begin, end) per utterance, in utterance order.
  std::vector<std::pair<Eigen::Index, Eigen::Index>> utterance_spans() const;
  /// Path of utterance `u` in untrimmed frame indices.
  std::vector<std::pair<int, int>> path_of(int utterance) const;
  /// Appends all rows of `other`, renumbering its utterances.
  void append(const AlignedPairSet& other);
};

/// Appends the rows selected by `path` to `out` as a new utterance. Rows are
/// taken from the given (untransformed) source and target frames.
void append_pairs(AlignedPairSet& out, const ParallelUtterance& utt, const AlignmentPath& path);

using FrameConverter = std::function<Cepstrogram(const Cepstrogram&)>;
using InterimTrainer = std::function<FrameConverter(const AlignedPairSet&)>;

/// Round 1 aligns raw source to target. Each later round trains an interim
/// converter on the current pairs, converts every source utterance, re-aligns
/// the converted source against the target and re-extracts pairs from the
/// original source frames.
AlignedPairSet iterative_align(const std::vector<ParallelUtterance>& corpus, int rounds,
                               const InterimTrainer& trainer, int jobs = 1);

/// ALGN file: "ALGN", u32 version, u32 N, u32 columns, N x columns float32
/// LE; provenance goes to `<path>.json`.
inline constexpr std::uint32_t kAlignedPairFormatVersion = 1;
void write_aligned_pairs(const AlignedPairSet& pairs, const std::filesystem::path& path);
AlignedPairSet read_aligned_pairs(const std::filesystem::path& path);

/// (src_idx, tgt_idx, local_cost) lines with a header row.
void write_path_csv(const AlignmentPath& path, const Matrix& src, const Matrix& tgt,
                    std::ostream& out, int src_offset = 0, int tgt_offset = 0);

}  // namespace whisperconv
