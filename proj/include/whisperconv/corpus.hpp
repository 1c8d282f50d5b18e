// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace whisperconv {

enum class Gender { kMale, kFemale };
enum class Partition { kTrain, kValidation, kTest };
enum class SelectionMode { kSD, kAll, kExcl, kMale, kFemale };

std::string to_string(Gender g);
std::string to_string(Partition p);
std::string to_string(SelectionMode m);
Gender parse_gender(const std::string& s);
Partition parse_partition(const std::string& s);
SelectionMode parse_selection_mode(const std::string& s);

struct Utterance {
  std::string id;
  std::string speaker;
  Gender gender = Gender::kFemale;
  std::string locale;
  std::string dataset;
  std::filesystem::path normal_path;
  std::filesystem::path whisper_path;
};

struct Manifest {
  std::string dataset;
  std::string version;
  std::vector<Utterance> utterances;

  std::vector<std::string> speakers() const;  // first-seen order
  const Utterance& find(const std::string& id) const;
};

/// Parses manifest JSON:
///   {"dataset": str, "version"?: str,
///    "utterances": [{"id", "speaker", "gender", "locale", "normal_path",
///                    "whisper_path", "dataset"?}]}
/// Relative audio paths resolve against `base_dir`. When `check_files` is
/// set, every missing audio file is collected and reported in one error.
Manifest parse_manifest(const std::string& json_text, const std::filesystem::path& base_dir,
                        bool check_files = true);
Manifest load_manifest(const std::filesystem::path& path, bool check_files = true);
void save_manifest(const Manifest& m, const std::filesystem::path& path);

/// Builds a manifest from <root>/<speaker>/{normal,whisper}/<stem>.wav (case
/// of the two folder names is ignored); utterances pair by stem. Gender comes
/// from `genders` when listed there, else from a leading 'M'/'F' in the
/// speaker name.
Manifest scan_parallel_tree(const std::filesystem::path& root, const std::string& dataset,
                            const std::map<std::string, Gender>& genders = {});

struct SplitAssignment {
  std::map<std::string, Partition> partition;
  std::uint64_t seed = 0;

  std::vector<std::string> ids_in(Partition p) const;
  void write_csv(std::ostream& out) const;
};

/// Counts per part by largest-remainder rounding of n * ratio.
std::array<std::size_t, 3> split_counts(std::size_t n, const std::array<double, 3>& ratios);

/// Per-speaker seeded shuffle, then contiguous train/validation/test slices.
SplitAssignment split(const Manifest& m, const std::array<double, 3>& ratios = {0.8, 0.1, 0.1},
                      std::uint64_t seed = 0);

struct SelectionQuery {
  SelectionMode mode = SelectionMode::kAll;
  std::string target_speaker;
  std::optional<std::string> dataset;
  Partition partition = Partition::kTrain;
};

/// Utterances of one partition filtered by regime and dataset, in manifest
/// order. SD and Excl need a target speaker.
std::vector<Utterance> select_utterances(const Manifest& m, const SplitAssignment& s,
                                         const SelectionQuery& q);

/// select_utterances restricted to the training partition.
std::vector<Utterance> select_training_set(const Manifest& m, const SplitAssignment& s, SelectionMode mode,
                                           const std::string& target_speaker = {},
                                           const std::optional<std::string>& dataset = std::nullopt);

/// Human-readable descriptor of a training regime stored in model files.
std::string describe_selection(const SelectionQuery& q, const std::vector<Utterance>& chosen);

}  // namespace whisperconv
