// Copyright 2026 The yolopar Authors
// SPDX-License-Identifier: Apache-2.0

#include <yolopar/workload.hpp>

#include <algorithm>
#include <bit>
#include <fstream>
#include <iterator>
#include <limits>

namespace yolopar {
namespace {

constexpr std::byte kMagic[4] = {std::byte{'F'}, std::byte{'M'}, std::byte{'A'}, std::byte{'P'}};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::span<std::byte> out, std::size_t offset, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out[offset + b] = std::byte((v >> (8 * b)) & 0xFFu);
}

std::uint32_t get_u32(std::span<const std::byte> in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= std::to_integer<std::uint32_t>(in[offset + b]) << (8 * b);
  }
  return v;
}

}  // namespace

const char* to_string(FmapErrc code) noexcept {
  switch (code) {
    case FmapErrc::io_error:
      return "io_error";
    case FmapErrc::bad_magic:
      return "bad_magic";
    case FmapErrc::unsupported_version:
      return "unsupported_version";
    case FmapErrc::truncated:
      return "truncated";
    case FmapErrc::malformed_header:
      return "malformed_header";
    case FmapErrc::trailing_data:
      return "trailing_data";
  }
  return "?";
}

std::vector<std::byte> encode_feature_map(const FeatureMap& feat) {
  constexpr auto u32_max = std::numeric_limits<std::uint32_t>::max();
  if (feat.num_anchors() > u32_max || feat.num_fields() > u32_max) {
    throw std::invalid_argument("feature map too large for the FMAP format");
  }
  const auto values = feat.values();
  std::vector<std::byte> out(kHeaderBytes + values.size() * 4);
  std::copy(std::begin(kMagic), std::end(kMagic), out.begin());
  put_u32(out, 4, kFmapVersion);
  put_u32(out, 8, static_cast<std::uint32_t>(feat.num_anchors()));
  put_u32(out, 12, static_cast<std::uint32_t>(feat.num_fields()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    put_u32(out, kHeaderBytes + 4 * i, std::bit_cast<std::uint32_t>(values[i]));
  }
  return out;
}

FeatureMap decode_feature_map(std::span<const std::byte> bytes) {
  if (bytes.size() < 4) throw FmapError(FmapErrc::truncated, "FMAP: file shorter than its magic");
  if (!std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FmapError(FmapErrc::bad_magic, "FMAP: bad magic (expected \"FMAP\")");
  }
  if (bytes.size() < 8) throw FmapError(FmapErrc::truncated, "FMAP: truncated header");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFmapVersion) {
    throw FmapError(FmapErrc::unsupported_version,
                    "FMAP: unsupported version " + std::to_string(version));
  }
  if (bytes.size() < kHeaderBytes) throw FmapError(FmapErrc::truncated, "FMAP: truncated header");

  const std::uint64_t anchors = get_u32(bytes, 8);
  const std::uint64_t fields = get_u32(bytes, 12);
  if (fields < kBoxFields) {
    throw FmapError(FmapErrc::malformed_header,
                    "FMAP: num_fields " + std::to_string(fields) + " is below 5");
  }
  const std::uint64_t count = anchors * fields;  // < 2^64, both factors < 2^32
  const std::uint64_t payload = bytes.size() - kHeaderBytes;
  if (payload / 4 < count) {
    throw FmapError(FmapErrc::truncated, "FMAP: header declares " + std::to_string(anchors) +
                                             " rows but the payload holds " +
                                             std::to_string(payload / 4 / fields));
  }
  if (payload != count * 4) {
    throw FmapError(FmapErrc::trailing_data, "FMAP: unexpected bytes after the payload");
  }

  std::vector<float> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
  }
  return FeatureMap(static_cast<std::size_t>(anchors), static_cast<std::size_t>(fields) - kBoxFields,
                    std::move(values));
}

void write_feature_map(const FeatureMap& feat, const std::filesystem::path& path) {
  const auto bytes = encode_feature_map(feat);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FmapError(FmapErrc::io_error, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FmapError(FmapErrc::io_error, "write failed: " + path.string());
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FmapError(FmapErrc::io_error, "cannot open " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw FmapError(FmapErrc::io_error, "read failed: " + path.string());
  return decode_feature_map(std::as_bytes(std::span(raw)));
}

}  // namespace yolopar
