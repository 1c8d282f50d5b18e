// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/alignment.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <ostream>

#include "whisperconv/binary_io.hpp"
#include "whisperconv/errors.hpp"
#include "whisperconv/parallel.hpp"

namespace whisperconv {

double frame_distance(const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
  const Eigen::Index d = a.cols() - 1;
  return (a.row(i).tail(d) - b.row(j).tail(d)).norm();
}

TrimResult trim_silence(const Cepstrogram& c, int margin_frames) {
  if (margin_frames < 0) throw ConfigError("margin_frames must be non-negative");
  const int frames = c.num_frames();
  if (frames == 0) throw EmptyInputError("cannot trim an empty cepstrogram");
  const double threshold = c.frames.col(0).maxCoeff() - kSilenceThresholdNepers;
  int first = -1;
  int last = -1;
  for (int t = 0; t < frames; ++t) {
    if (c.frames(t, 0) >= threshold) {
      if (first < 0) first = t;
      last = t;
    }
  }
  // Every frame at the floor means the max itself is the floor: all silence.
  if (first < 0 || c.frames.col(0).maxCoeff() <= kLogFloor + 1e-9) {
    throw EmptyInputError("utterance is entirely silent");
  }
  const int begin = std::max(0, first - margin_frames);
  const int end = std::min(frames, last + 1 + margin_frames);
  TrimResult r;
  r.offset = begin;
  r.trimmed.config = c.config;
  r.trimmed.frames = c.frames.middleRows(begin, end - begin);
  return r;
}

AlignmentPath dtw(const Matrix& src, const Matrix& tgt) {
  const Eigen::Index ts = src.rows();
  const Eigen::Index tt = tgt.rows();
  if (ts == 0 || tt == 0) throw EmptyInputError("dtw needs non-empty sequences");
  if (src.cols() != tgt.cols()) throw DimensionError("dtw inputs have different orders");

  Matrix cost(ts, tt);
  for (Eigen::Index i = 0; i < ts; ++i) {
    for (Eigen::Index j = 0; j < tt; ++j) {
      const double d = frame_distance(src, i, tgt, j);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = std::numeric_limits<double>::infinity();
        if (i > 0 && j > 0) best = cost(i - 1, j - 1);
        if (i > 0) best = std::min(best, cost(i - 1, j));
        if (j > 0) best = std::min(best, cost(i, j - 1));
      }
      cost(i, j) = d + best;
    }
  }

  AlignmentPath path;
  path.total_cost = cost(ts - 1, tt - 1);
  Eigen::Index i = ts - 1;
  Eigen::Index j = tt - 1;
  path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = cost(i - 1, j - 1);
      const double up = cost(i - 1, j);
      const double left = cost(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up <= left) {
        --i;
      } else {
        --j;
      }
    }
    path.pairs.emplace_back(static_cast<int>(i), static_cast<int>(j));
  }
  std::reverse(path.pairs.begin(), path.pairs.end());
  return path;
}

AlignmentPath dtw(const Cepstrogram& src, const Cepstrogram& tgt) {
  return dtw(src.frames, tgt.frames);
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> AlignedPairSet::utterance_spans() const {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> spans(utterance_ids.size(), {0, 0});
  std::vector<bool> seen(utterance_ids.size(), false);
  for (std::size_t r = 0; r < provenance.size(); ++r) {
    const auto u = static_cast<std::size_t>(provenance[r].utterance);
    const auto row = static_cast<Eigen::Index>(r);
    if (!seen[u]) {
      spans[u] = {row, row + 1};
      seen[u] = true;
    } else {
      spans[u].second = row + 1;
    }
  }
  return spans;
}

std::vector<std::pair<int, int>> AlignedPairSet::path_of(int utterance) const {
  std::vector<std::pair<int, int>> out;
  for (const auto& p : provenance) {
    if (p.utterance == utterance) out.emplace_back(p.source_frame, p.target_frame);
  }
  return out;
}

void AlignedPairSet::append(const AlignedPairSet& other) {
  if (other.size() == 0 && other.utterance_ids.empty()) return;
  if (size() > 0 && other.order != order) throw DimensionError("pair sets have different orders");
  if (size() == 0 && utterance_ids.empty()) order = other.order;
  const int base = static_cast<int>(utterance_ids.size());
  utterance_ids.insert(utterance_ids.end(), other.utterance_ids.begin(), other.utterance_ids.end());
  for (auto p : other.provenance) {
    p.utterance += base;
    provenance.push_back(p);
  }
  Matrix merged(rows.rows() + other.rows.rows(), 2 * order);
  if (rows.rows() > 0) merged.topRows(rows.rows()) = rows;
  if (other.rows.rows() > 0) merged.bottomRows(other.rows.rows()) = other.rows;
  rows = std::move(merged);
}

void append_pairs(AlignedPairSet& out, const ParallelUtterance& utt, const AlignmentPath& path) {
  const int order = utt.source.config.order;
  if (utt.source.frames.cols() != order || utt.target.frames.cols() != order) {
    throw DimensionError("utterance " + utt.id + " has inconsistent feature order");
  }
  if (out.size() == 0 && out.utterance_ids.empty()) out.order = order;
  if (out.order != order) throw DimensionError("pair set order mismatch for " + utt.id);
  const int u = static_cast<int>(out.utterance_ids.size());
  out.utterance_ids.push_back(utt.id);
  const Eigen::Index base = out.rows.rows();
  out.rows.conservativeResize(base + static_cast<Eigen::Index>(path.pairs.size()), 2 * order);
  for (std::size_t k = 0; k < path.pairs.size(); ++k) {
    const auto [i, j] = path.pairs[k];
    const auto row = base + static_cast<Eigen::Index>(k);
    out.rows.row(row).head(order) = utt.source.frames.row(i);
    out.rows.row(row).tail(order) = utt.target.frames.row(j);
    out.provenance.push_back({u, i + utt.source_offset, j + utt.target_offset});
  }
}

AlignedPairSet iterative_align(const std::vector<ParallelUtterance>& corpus, int rounds,
                               const InterimTrainer& trainer, int jobs) {
  if (rounds < 1) throw ConfigError("iterative alignment needs at least one round");
  if (corpus.empty()) throw EmptyInputError("iterative alignment needs a non-empty corpus");

  std::vector<AlignmentPath> paths(corpus.size());
  parallel_for(corpus.size(), jobs, [&](std::size_t u) {
    paths[u] = dtw(corpus[u].source, corpus[u].target);
  });
  auto collect = [&] {
    AlignedPairSet pairs;
    for (std::size_t u = 0; u < corpus.size(); ++u) append_pairs(pairs, corpus[u], paths[u]);
    return pairs;
  };

  AlignedPairSet pairs = collect();
  for (int round = 1; round < rounds; ++round) {
    if (!trainer) throw ConfigError("iterative alignment beyond one round needs a trainer");
    const FrameConverter convert = trainer(pairs);
    parallel_for(corpus.size(), jobs, [&](std::size_t u) {
      paths[u] = dtw(convert(corpus[u].source), corpus[u].target);
    });
    pairs = collect();
  }
  return pairs;
}

void write_aligned_pairs(const AlignedPairSet& pairs, const std::filesystem::path& path) {
  BinaryWriter out;
  out.magic("ALGN");
  out.u32(kAlignedPairFormatVersion);
  out.u32(static_cast<std::uint32_t>(pairs.rows.rows()));
  out.u32(static_cast<std::uint32_t>(2 * pairs.order));
  for (Eigen::Index r = 0; r < pairs.rows.rows(); ++r) {
    for (Eigen::Index c = 0; c < pairs.rows.cols(); ++c) out.f32(static_cast<float>(pairs.rows(r, c)));
  }
  out.save(path);

  nlohmann::json side;
  side["utterances"] = pairs.utterance_ids;
  auto& rows = side["rows"] = nlohmann::json::array();
  for (const auto& p : pairs.provenance) rows.push_back({p.utterance, p.source_frame, p.target_frame});
  std::ofstream js(path.string() + ".json");
  if (!js) throw IoError("cannot write provenance for " + path.string());
  js << side.dump() << '\n';
}

AlignedPairSet read_aligned_pairs(const std::filesystem::path& path) {
  auto in = BinaryReader::open(path);
  in.expect_magic("ALGN");
  if (in.u32() != kAlignedPairFormatVersion) throw DecodeError(path.string() + ": unsupported ALGN version");
  const std::uint32_t n = in.u32();
  const std::uint32_t cols = in.u32();
  if (cols % 2 != 0) throw DecodeError(path.string() + ": odd column count");
  AlignedPairSet pairs;
  pairs.order = static_cast<int>(cols / 2);
  pairs.rows.resize(n, cols);
  for (std::uint32_t r = 0; r < n; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) pairs.rows(r, c) = in.f32();
  }
  std::ifstream js(path.string() + ".json");
  if (!js) throw IoError("missing provenance sidecar " + path.string() + ".json");
  try {
    const auto side = nlohmann::json::parse(js);
    pairs.utterance_ids = side.at("utterances").get<std::vector<std::string>>();
    for (const auto& row : side.at("rows")) {
      pairs.provenance.push_back({row.at(0).get<int>(), row.at(1).get<int>(), row.at(2).get<int>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw DecodeError(path.string() + ".json: " + e.what());
  }
  if (pairs.provenance.size() != n) throw DecodeError(path.string() + ": provenance row count mismatch");
  return pairs;
}

void write_path_csv(const AlignmentPath& path, const Matrix& src, const Matrix& tgt,
                    std::ostream& out, int src_offset, int tgt_offset) {
  out << "src_idx,tgt_idx,local_cost\n";
  char buf[64];
  for (const auto& [i, j] : path.pairs) {
    std::snprintf(buf, sizeof buf, "%.9g", frame_distance(src, i, tgt, j));
    out << (i + src_offset) << ',' << (j + tgt_offset) << ',' << buf << '\n';
  }
}

}  // namespace whisperconv
