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

#include "mrc/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "mrc/error.hpp"

namespace mrc {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_f64(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

std::uint32_t to_u32(std::size_t v, const char* what) {
  if (v > 0xffffffffu) throw ArgumentError(std::string(what) + " exceeds u32 range");
  return static_cast<std::uint32_t>(v);
}

void put_header(std::string& out, std::string_view tag) {
  out.append(kTensorMagic);
  out.append(tag);
  out.append(4 - tag.size(), '\0');
}

class Reader {
 public:
  Reader(std::string_view bytes, const std::string& context) : bytes_(bytes), context_(context) {}

  void expect_header(std::string_view tag) {
    need(8);
    if (bytes_.substr(0, 4) != kTensorMagic) fail("bad magic");
    std::string expected(tag);
    expected.append(4 - tag.size(), '\0');
    if (bytes_.substr(4, 4) != expected) {
      fail("dtype tag '" + std::string(bytes_.substr(4, 3)) + "', expected '" +
           std::string(tag) + "'");
    }
    pos_ = 8;
  }

  std::uint32_t u32() {
    need(pos_ + 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
      bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }

  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes_[pos_++]); }

  void need(std::size_t total) const {
    if (bytes_.size() < total) fail("truncated tensor data");
  }

  void expect_end() const {
    if (pos_ != bytes_.size()) fail("trailing bytes after payload");
  }

  DenseMatrix matrix(std::uint32_t rows, std::uint32_t cols) {
    if (rows == 0 || cols == 0) fail("zero dimension");
    const std::size_t count = static_cast<std::size_t>(rows) * cols;
    need(pos_ + count * 8);
    std::vector<double> data(count);
    for (double& v : data) {
      v = f64();
      if (!std::isfinite(v)) throw NonFiniteError(context_ + ": non-finite entry");
    }
    return DenseMatrix(rows, cols, std::move(data));
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ManifestError(context_ + ": " + msg); }

 private:
  std::string_view bytes_;
  const std::string& context_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_matrix(const DenseMatrix& m) {
  std::string out;
  out.reserve(16 + m.size() * 8);
  put_header(out, kTagF64);
  put_u32(out, to_u32(m.rows(), "rows"));
  put_u32(out, to_u32(m.cols(), "cols"));
  for (double v : m.data()) put_f64(out, v);
  return out;
}

std::string encode_codes(const CodeMatrix& m) {
  std::string out;
  out.reserve(16 + m.codes.size());
  put_header(out, kTagU8q);
  put_u32(out, m.rows);
  put_u32(out, m.cols);
  out.append(reinterpret_cast<const char*>(m.codes.data()), m.codes.size());
  return out;
}

std::string encode_stack(const std::vector<DenseMatrix>& samples) {
  std::string out;
  put_header(out, kTagStack);
  put_u32(out, to_u32(samples.size(), "sample count"));
  const std::size_t rows = samples.empty() ? 0 : samples.front().rows();
  const std::size_t cols = samples.empty() ? 0 : samples.front().cols();
  put_u32(out, to_u32(rows, "rows"));
  put_u32(out, to_u32(cols, "cols"));
  out.reserve(out.size() + samples.size() * rows * cols * 8);
  for (const DenseMatrix& x : samples) {
    if (x.rows() != rows || x.cols() != cols) {
      throw DimensionMismatchError("encode_stack: samples differ in shape");
    }
    for (double v : x.data()) put_f64(out, v);
  }
  return out;
}

DenseMatrix decode_matrix(std::string_view bytes, const std::string& context) {
  Reader r(bytes, context);
  r.expect_header(kTagF64);
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  DenseMatrix m = r.matrix(rows, cols);
  r.expect_end();
  return m;
}

CodeMatrix decode_codes(std::string_view bytes, const std::string& context) {
  Reader r(bytes, context);
  r.expect_header(kTagU8q);
  CodeMatrix m;
  m.rows = r.u32();
  m.cols = r.u32();
  const std::size_t count = static_cast<std::size_t>(m.rows) * m.cols;
  r.need(16 + count);
  m.codes.resize(count);
  for (auto& c : m.codes) c = r.u8();
  r.expect_end();
  return m;
}

std::vector<DenseMatrix> decode_stack(std::string_view bytes, const std::string& context) {
  Reader r(bytes, context);
  r.expect_header(kTagStack);
  const std::uint32_t count = r.u32();
  const std::uint32_t rows = r.u32();
  const std::uint32_t cols = r.u32();
  std::vector<DenseMatrix> samples;
  samples.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) samples.push_back(r.matrix(rows, cols));
  r.expect_end();
  return samples;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) throw MissingFileError("missing file " + path.string());
    throw IoError("cannot open " + path.string());
  }
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace mrc
