// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "whisperconv/binary_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "whisperconv/errors.hpp"

namespace whisperconv {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written with native little-endian stores");

void BinaryWriter::magic(std::string_view four_cc) {
  buf_.insert(buf_.end(), four_cc.begin(), four_cc.begin() + 4);
}

void BinaryWriter::u32(std::uint32_t v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  buf_.insert(buf_.end(), p, p + sizeof v);
}

void BinaryWriter::f32(float v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  buf_.insert(buf_.end(), p, p + sizeof v);
}

void BinaryWriter::f64(double v) {
  const auto* p = reinterpret_cast<const unsigned char*>(&v);
  buf_.insert(buf_.end(), p, p + sizeof v);
}

void BinaryWriter::str(std::string_view s) {
  u32(static_cast<std::uint32_t>(s.size()));
  buf_.insert(buf_.end(), s.begin(), s.end());
}

void BinaryWriter::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(buf_.data()), static_cast<std::streamsize>(buf_.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

BinaryReader::BinaryReader(std::vector<unsigned char> bytes, std::string origin)
    : buf_(std::move(bytes)), origin_(std::move(origin)) {}

BinaryReader BinaryReader::open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return BinaryReader(std::move(bytes), path.string());
}

void BinaryReader::need(std::size_t n) const {
  if (buf_.size() - pos_ < n) throw DecodeError(origin_ + ": truncated file");
}

std::string BinaryReader::peek_magic() const {
  if (buf_.size() - pos_ < 4) return {};
  return std::string(reinterpret_cast<const char*>(buf_.data() + pos_), 4);
}

void BinaryReader::expect_magic(std::string_view four_cc) {
  need(4);
  if (std::memcmp(buf_.data() + pos_, four_cc.data(), 4) != 0) {
    throw DecodeError(origin_ + ": expected magic '" + std::string(four_cc) + "'");
  }
  pos_ += 4;
}

std::uint32_t BinaryReader::u32() {
  need(4);
  std::uint32_t v;
  std::memcpy(&v, buf_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

float BinaryReader::f32() {
  need(4);
  float v;
  std::memcpy(&v, buf_.data() + pos_, 4);
  pos_ += 4;
  return v;
}

double BinaryReader::f64() {
  need(8);
  double v;
  std::memcpy(&v, buf_.data() + pos_, 8);
  pos_ += 8;
  return v;
}

std::string BinaryReader::str() {
  const std::uint32_t n = u32();
  need(n);
  std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
  pos_ += n;
  return s;
}

}  // namespace whisperconv
