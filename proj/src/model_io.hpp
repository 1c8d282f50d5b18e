// Copyright 2026 The whisperconv Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "whisperconv/binary_io.hpp"
#include "whisperconv/spectral.hpp"

namespace whisperconv::detail {

inline void write_analysis_config(BinaryWriter& out, const AnalysisConfig& cfg) {
  out.u32(static_cast<std::uint32_t>(cfg.sample_rate));
  out.u32(static_cast<std::uint32_t>(cfg.frame_len));
  out.u32(static_cast<std::uint32_t>(cfg.hop));
  out.u32(static_cast<std::uint32_t>(cfg.fft_size));
  out.u32(static_cast<std::uint32_t>(cfg.order));
  out.f64(cfg.warp_alpha);
}

inline AnalysisConfig read_analysis_config(BinaryReader& in) {
  AnalysisConfig cfg;
  cfg.sample_rate = static_cast<int>(in.u32());
  cfg.frame_len = static_cast<int>(in.u32());
  cfg.hop = static_cast<int>(in.u32());
  cfg.fft_size = static_cast<int>(in.u32());
  cfg.order = static_cast<int>(in.u32());
  cfg.warp_alpha = in.f64();
  cfg.validate();
  return cfg;
}

}  // namespace whisperconv::detail
