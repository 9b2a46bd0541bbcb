/*
 * Copyright (c) 2026 The mrc Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef MRC_TENSOR_IO_HPP
#define MRC_TENSOR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "mrc/matrix.hpp"

namespace mrc {

// Raw tensor files. Every file opens with an 8-byte header: the magic
// "MRT1" followed by a 4-byte dtype tag ("f64\0", "u8q\0" or "stk\0").
// All integers are little-endian u32, floats little-endian IEEE-754
// binary64, data row-major.
//
//   f64: u32 rows, u32 cols, rows*cols f64
//   u8q: u32 rows, u32 cols, rows*cols u8 codes
//   stk: u32 samples, u32 rows, u32 cols, samples*rows*cols f64

inline constexpr std::string_view kTensorMagic = "MRT1";
inline constexpr std::string_view kTagF64 = "f64";
inline constexpr std::string_view kTagU8q = "u8q";
inline constexpr std::string_view kTagStack = "stk";

/// Unsigned integer codes of a quantized matrix, row-major.
struct CodeMatrix {
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  std::vector<std::uint8_t> codes;
};

std::string encode_matrix(const DenseMatrix& m);
std::string encode_codes(const CodeMatrix& m);
std::string encode_stack(const std::vector<DenseMatrix>& samples);

/// Decoders throw ManifestError for a bad header or truncated payload and
/// NonFiniteError for NaN/Inf; `context` prefixes every message.
DenseMatrix decode_matrix(std::string_view bytes, const std::string& context);
CodeMatrix decode_codes(std::string_view bytes, const std::string& context);
std::vector<DenseMatrix> decode_stack(std::string_view bytes, const std::string& context);

/// Whole-file helpers. Reads raise MissingFileError when the file is absent.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace mrc

#endif  // MRC_TENSOR_IO_HPP
