// Copyright 2026 The FedRE Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "fedre/errors.hpp"

// Little-endian binary file helpers shared by the dataset, checkpoint and
// gradient formats. Readers track the byte offset so parse errors can name
// where the file went wrong.

namespace fedre {

static_assert(std::endian::native == std::endian::little,
              "file formats are little-endian; big-endian hosts need byte swaps");

class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
    if (!out_) throw ValidationError("cannot open for writing: " + path);
  }

  void bytes(const void* p, std::size_t n) {
    out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  void u32(std::uint32_t v) { bytes(&v, 4); }
  void u64(std::uint64_t v) { bytes(&v, 8); }
  void f64(double v) { bytes(&v, 8); }
  void f64s(const double* p, std::size_t n) { bytes(p, 8 * n); }
  void magic(const char m[8]) { bytes(m, 8); }

  void close() {
    out_.close();
    if (!out_) throw ValidationError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path)
      : path_(path), in_(path, std::ios::binary) {
    if (!in_) throw ValidationError("cannot open for reading: " + path);
  }

  void bytes(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw ParseError(path_ + ": truncated at byte offset " +
                       std::to_string(offset_ + static_cast<std::size_t>(in_.gcount())));
    }
    offset_ += n;
  }
  std::uint32_t u32() { std::uint32_t v; bytes(&v, 4); return v; }
  std::uint64_t u64() { std::uint64_t v; bytes(&v, 8); return v; }
  double f64() { double v; bytes(&v, 8); return v; }
  void f64s(double* p, std::size_t n) { bytes(p, 8 * n); }

  void expect_magic(const char expected[8]) {
    char got[9] = {0};
    bytes(got, 8);
    if (std::memcmp(got, expected, 8) != 0) {
      throw ParseError(path_ + ": bad magic \"" + std::string(got, got + 8) +
                       "\" at byte offset 0, expected \"" +
                       std::string(expected, expected + 8) + "\"");
    }
  }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

  std::size_t offset() const { return offset_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& why) {
    throw ParseError(path_ + ": " + why + " at byte offset " + std::to_string(offset_));
  }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t offset_ = 0;
};

}  // namespace fedre
