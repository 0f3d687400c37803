// Copyright 2026 The patchasm Authors.
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

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "patchasm/core.hpp"

namespace patchasm {

/// NPY (format 1.0, C order, little endian) reader/writer for the tensor
/// dtypes the pipeline exchanges.
enum class NpyDtype { Float32, Float64, UInt8, UInt32 };

class NpyError : public std::runtime_error {
 public:
  enum class Kind { Io, MalformedHeader, UnsupportedDtype, UnsupportedLayout, TruncatedPayload };
  NpyError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

template <class T>
struct NpyTraits;
template <>
struct NpyTraits<float> {
  static constexpr NpyDtype dtype = NpyDtype::Float32;
};
template <>
struct NpyTraits<double> {
  static constexpr NpyDtype dtype = NpyDtype::Float64;
};
template <>
struct NpyTraits<std::uint8_t> {
  static constexpr NpyDtype dtype = NpyDtype::UInt8;
};
template <>
struct NpyTraits<std::uint32_t> {
  static constexpr NpyDtype dtype = NpyDtype::UInt32;
};

std::string_view npy_descr(NpyDtype dtype);
std::size_t npy_itemsize(NpyDtype dtype);

struct NpyHeader {
  NpyDtype dtype = NpyDtype::Float32;
  std::vector<std::size_t> shape;
  std::size_t data_offset = 0;
};

/// Serializes a full NPY file image.
std::string encode_npy(NpyDtype dtype, const std::vector<std::size_t>& shape, const void* data);
NpyHeader parse_npy_header(std::string_view bytes);

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_file(const std::filesystem::path& path);

template <class T>
void write_npy(const std::filesystem::path& path, const Tensor<T>& tensor) {
  write_file_atomic(path, encode_npy(NpyTraits<T>::dtype, tensor.shape(), tensor.data().data()));
}

template <class T>
Tensor<T> decode_npy(std::string_view bytes);

template <class T>
Tensor<T> read_npy(const std::filesystem::path& path) {
  return decode_npy<T>(read_file(path));
}

/// Dtype and shape of an NPY file without decoding its payload.
NpyHeader peek_npy(const std::filesystem::path& path);

}  // namespace patchasm
