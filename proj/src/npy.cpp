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

#include "patchasm/npy.hpp"

#include <bit>
#include <cctype>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace patchasm {

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

namespace {

constexpr std::string_view kMagic = "\x93NUMPY";
constexpr std::size_t kPreamble = 10;  // magic, version, header length

using Kind = NpyError::Kind;

}  // namespace

std::string_view npy_descr(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::Float32: return "<f4";
    case NpyDtype::Float64: return "<f8";
    case NpyDtype::UInt8: return "|u1";
    case NpyDtype::UInt32: return "<u4";
  }
  return "";
}

std::size_t npy_itemsize(NpyDtype dtype) {
  switch (dtype) {
    case NpyDtype::Float32: return 4;
    case NpyDtype::Float64: return 8;
    case NpyDtype::UInt8: return 1;
    case NpyDtype::UInt32: return 4;
  }
  return 0;
}

std::string encode_npy(NpyDtype dtype, const std::vector<std::size_t>& shape, const void* data) {
  std::string dict = "{'descr': '" + std::string(npy_descr(dtype)) +
                     "', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict += std::to_string(shape[i]);
    if (shape.size() == 1 || i + 1 < shape.size()) dict += ",";
    if (i + 1 < shape.size()) dict += " ";
  }
  dict += "), }";
  // Pad with spaces so the payload starts on a 64-byte boundary; the header
  // ends with a newline.
  const std::size_t unpadded = kPreamble + dict.size() + 1;
  dict.append((64 - unpadded % 64) % 64, ' ');
  dict += '\n';
  if (dict.size() > 0xFFFF) throw NpyError(Kind::MalformedHeader, "NPY header too long");

  std::string out(kMagic);
  out += '\x01';
  out += '\x00';
  out += static_cast<char>(dict.size() & 0xFF);
  out += static_cast<char>(dict.size() >> 8);
  out += dict;
  std::size_t count = 1;
  for (auto s : shape) count *= s;
  out.append(static_cast<const char*>(data), count * npy_itemsize(dtype));
  return out;
}

namespace {

std::string_view value_after(std::string_view dict, std::string_view key) {
  const auto k = dict.find("'" + std::string(key) + "'");
  if (k == std::string_view::npos) throw NpyError(Kind::MalformedHeader, "NPY header lacks '" + std::string(key) + "'");
  auto pos = dict.find(':', k);
  if (pos == std::string_view::npos) throw NpyError(Kind::MalformedHeader, "NPY header is malformed");
  ++pos;
  while (pos < dict.size() && dict[pos] == ' ') ++pos;
  return dict.substr(pos);
}

}  // namespace

NpyHeader parse_npy_header(std::string_view bytes) {
  if (bytes.size() < kPreamble || bytes.substr(0, kMagic.size()) != kMagic)
    throw NpyError(Kind::MalformedHeader, "not an NPY file");
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0)
    throw NpyError(Kind::MalformedHeader, "unsupported NPY version " + std::to_string(major) + "." +
                                              std::to_string(minor));
  const std::size_t len = static_cast<unsigned char>(bytes[8]) |
                          (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreamble + len) throw NpyError(Kind::MalformedHeader, "NPY header is truncated");
  const std::string_view dict = bytes.substr(kPreamble, len);
  if (dict.empty() || dict.front() != '{' || dict.find('}') == std::string_view::npos)
    throw NpyError(Kind::MalformedHeader, "NPY header is not a dictionary");

  NpyHeader h;
  h.data_offset = kPreamble + len;

  const std::string_view descr = value_after(dict, "descr");
  if (descr.size() < 2 || (descr[0] != '\'' && descr[0] != '"'))
    throw NpyError(Kind::MalformedHeader, "NPY descr is not a string");
  const auto end = descr.find(descr[0], 1);
  if (end == std::string_view::npos) throw NpyError(Kind::MalformedHeader, "NPY descr is unterminated");
  const std::string_view d = descr.substr(1, end - 1);
  if (d == "<f4") h.dtype = NpyDtype::Float32;
  else if (d == "<f8") h.dtype = NpyDtype::Float64;
  else if (d == "|u1" || d == "<u1") h.dtype = NpyDtype::UInt8;
  else if (d == "<u4") h.dtype = NpyDtype::UInt32;
  else throw NpyError(Kind::UnsupportedDtype, "unsupported NPY dtype '" + std::string(d) + "'");

  const std::string_view fortran = value_after(dict, "fortran_order");
  if (fortran.starts_with("True")) throw NpyError(Kind::UnsupportedLayout, "Fortran-ordered NPY arrays are not supported");
  if (!fortran.starts_with("False")) throw NpyError(Kind::MalformedHeader, "NPY fortran_order is not a boolean");

  const std::string_view shape = value_after(dict, "shape");
  if (shape.empty() || shape[0] != '(') throw NpyError(Kind::MalformedHeader, "NPY shape is not a tuple");
  const auto close = shape.find(')');
  if (close == std::string_view::npos) throw NpyError(Kind::MalformedHeader, "NPY shape is unterminated");
  std::string inner(shape.substr(1, close - 1));
  std::istringstream in(inner);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t a = 0;
    while (a < item.size() && std::isspace(static_cast<unsigned char>(item[a]))) ++a;
    std::size_t b = item.size();
    while (b > a && std::isspace(static_cast<unsigned char>(item[b - 1]))) --b;
    if (a == b) continue;
    std::size_t v = 0;
    for (std::size_t i = a; i < b; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(item[i])))
        throw NpyError(Kind::MalformedHeader, "NPY shape entry is not an integer");
      v = v * 10 + static_cast<std::size_t>(item[i] - '0');
    }
    h.shape.push_back(v);
  }
  return h;
}

template <class T>
Tensor<T> decode_npy(std::string_view bytes) {
  const NpyHeader h = parse_npy_header(bytes);
  if (h.dtype != NpyTraits<T>::dtype)
    throw NpyError(Kind::UnsupportedDtype, "NPY dtype is " + std::string(npy_descr(h.dtype)) + ", expected " +
                                               std::string(npy_descr(NpyTraits<T>::dtype)));
  const std::size_t count = Tensor<T>::count(h.shape);
  const std::size_t need = count * sizeof(T);
  if (bytes.size() - h.data_offset < need)
    throw NpyError(Kind::TruncatedPayload, "NPY payload is truncated: expected " + std::to_string(need) +
                                               " bytes, found " + std::to_string(bytes.size() - h.data_offset));
  std::vector<T> data(count);
  if (need) std::memcpy(data.data(), bytes.data() + h.data_offset, need);
  return Tensor<T>(h.shape, std::move(data));
}

template Tensor<float> decode_npy<float>(std::string_view);
template Tensor<double> decode_npy<double>(std::string_view);
template Tensor<std::uint8_t> decode_npy<std::uint8_t>(std::string_view);
template Tensor<std::uint32_t> decode_npy<std::uint32_t>(std::string_view);

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NpyError(Kind::Io, "cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw NpyError(Kind::Io, "failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw NpyError(Kind::Io, "cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NpyError(Kind::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

NpyHeader peek_npy(const std::filesystem::path& path) { return parse_npy_header(read_file(path)); }

}  // namespace patchasm
