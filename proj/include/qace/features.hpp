// Copyright 2026 The QACE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Precomputed region features, one `<image_id>.vfea` file per image.
//
// Layout: the four bytes "VFEA", u32 num_boxes, u32 dim, then
// num_boxes * dim float32 values in row-major order. All integers and floats
// are little-endian regardless of host byte order.

#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "qace/error.hpp"

namespace qace {

inline constexpr std::uint32_t kFeatureBoxes = 36;
inline constexpr std::uint32_t kFeatureDim = 2054;
inline constexpr std::array<char, 4> kFeatureMagic = {'V', 'F', 'E', 'A'};

struct VisualFeatures {
  std::string image_id;
  std::uint32_t num_boxes = 0;
  std::uint32_t dim = 0;
  std::vector<float> values;

  float at(std::size_t box, std::size_t column) const {
    return values[box * dim + column];
  }
};

namespace internal {

inline void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace internal

inline std::filesystem::path FeaturePath(const std::filesystem::path& dir,
                                         const std::string& image_id) {
  return dir / (image_id + ".vfea");
}

// Throws FeatureShapeError unless the matrix is 36 x 2054 and finite.
inline void ValidateFeatures(const VisualFeatures& f) {
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kFeatureShapeError, "features for '" + f.image_id + "': " + what);
  };
  if (f.num_boxes != kFeatureBoxes) {
    fail("expected " + std::to_string(kFeatureBoxes) + " boxes, got " +
         std::to_string(f.num_boxes));
  }
  if (f.dim != kFeatureDim) {
    fail("expected dim " + std::to_string(kFeatureDim) + ", got " + std::to_string(f.dim));
  }
  if (f.values.size() != static_cast<std::size_t>(f.num_boxes) * f.dim) {
    fail("value count does not match the header");
  }
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!std::isfinite(f.values[i])) {
      fail("non-finite value at box " + std::to_string(i / f.dim) + ", column " +
           std::to_string(i % f.dim));
    }
  }
}

inline std::string EncodeFeatures(const VisualFeatures& f) {
  if (f.values.size() != static_cast<std::size_t>(f.num_boxes) * f.dim) {
    throw Error(ErrorKind::kFeatureShapeError,
                "features for '" + f.image_id + "': value count does not match the header");
  }
  std::string out(kFeatureMagic.begin(), kFeatureMagic.end());
  out.reserve(12 + 4 * f.values.size());
  internal::PutU32(out, f.num_boxes);
  internal::PutU32(out, f.dim);
  for (float v : f.values) internal::PutU32(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

// Parses one file image. With `validate` the fixed shape is enforced too.
inline VisualFeatures DecodeFeatures(const std::string& bytes, std::string image_id,
                                     bool validate = true) {
  VisualFeatures f;
  f.image_id = std::move(image_id);
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::kFeatureShapeError, "features for '" + f.image_id + "': " + what);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kFeatureMagic.data(), 4) != 0) {
    fail("missing VFEA header");
  }
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  f.num_boxes = internal::GetU32(p + 4);
  f.dim = internal::GetU32(p + 8);
  const std::uint64_t count = static_cast<std::uint64_t>(f.num_boxes) * f.dim;
  if (bytes.size() - 12 != 4 * count) {
    fail("payload is " + std::to_string(bytes.size() - 12) + " bytes, header implies " +
         std::to_string(4 * count));
  }
  f.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    f.values[i] = std::bit_cast<float>(internal::GetU32(p + 12 + 4 * i));
  }
  if (validate) ValidateFeatures(f);
  return f;
}

inline void WriteFeatureFile(const std::filesystem::path& dir, const VisualFeatures& f) {
  const std::string bytes = EncodeFeatures(f);
  const auto path = FeaturePath(dir, f.image_id);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::kConfigError, "cannot write " + path.string());
}

// Missing file is UnknownImage; a malformed one is FeatureShapeError.
inline VisualFeatures ReadFeatureFile(const std::filesystem::path& dir,
                                      const std::string& image_id, bool validate = true) {
  const auto path = FeaturePath(dir, image_id);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kUnknownImage, "no feature file " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return DecodeFeatures(bytes, image_id, validate);
}

}  // namespace qace
