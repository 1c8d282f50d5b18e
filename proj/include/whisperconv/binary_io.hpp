// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace whisperconv {

// Little-endian record writer used by every binary format in the project.
class BinaryWriter {
 public:
  void magic(std::string_view four_cc);
  void u32(std::uint32_t v);
  void f32(float v);
  void f64(double v);
  void str(std::string_view s);  // u32 length + bytes

  const std::vector<unsigned char>& bytes() const { return buf_; }
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<unsigned char> buf_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::vector<unsigned char> bytes, std::string origin = "<memory>");
  static BinaryReader open(const std::filesystem::path& path);

  // Throws DecodeError when the next four bytes differ.
  void expect_magic(std::string_view four_cc);
  std::string peek_magic() const;
  std::uint32_t u32();
  float f32();
  double f64();
  std::string str();
  bool at_end() const { return pos_ == buf_.size(); }

 private:
  void need(std::size_t n) const;
  std::vector<unsigned char> buf_;
  std::size_t pos_ = 0;
  std::string origin_;
};

}  // namespace whisperconv
