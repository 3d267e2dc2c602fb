// include/ctcfuse/binary_io.hpp

// Copyright 2026  The ctcfuse Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef CTCFUSE_BINARY_IO_HPP_
#define CTCFUSE_BINARY_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "ctcfuse/error.hpp"

namespace ctcfuse::io {

// Little-endian scalar encoding independent of host byte order.

template <typename U>
void WriteLe(std::ostream& os, U v) {
  static_assert(std::is_unsigned_v<U>);
  std::array<char, sizeof(U)> b{};
  for (std::size_t i = 0; i < sizeof(U); ++i)
    b[i] = static_cast<char>((v >> (8 * i)) & 0xFFu);
  os.write(b.data(), b.size());
}

template <typename U>
U ReadLe(std::istream& is, const std::string& what) {
  std::array<unsigned char, sizeof(U)> b{};
  is.read(reinterpret_cast<char*>(b.data()), b.size());
  if (is.gcount() != static_cast<std::streamsize>(b.size()))
    Fail(ErrorKind::kParseError, what + ": unexpected end of file");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(b[i]) << (8 * i);
  return v;
}

inline void WriteU32(std::ostream& os, std::uint32_t v) { WriteLe(os, v); }
inline void WriteU64(std::ostream& os, std::uint64_t v) { WriteLe(os, v); }
inline void WriteF32(std::ostream& os, float v) {
  WriteLe(os, std::bit_cast<std::uint32_t>(v));
}
inline void WriteF64(std::ostream& os, double v) {
  WriteLe(os, std::bit_cast<std::uint64_t>(v));
}

inline std::uint32_t ReadU32(std::istream& is, const std::string& what) {
  return ReadLe<std::uint32_t>(is, what);
}
inline std::uint64_t ReadU64(std::istream& is, const std::string& what) {
  return ReadLe<std::uint64_t>(is, what);
}
inline float ReadF32(std::istream& is, const std::string& what) {
  return std::bit_cast<float>(ReadLe<std::uint32_t>(is, what));
}
inline double ReadF64(std::istream& is, const std::string& what) {
  return std::bit_cast<double>(ReadLe<std::uint64_t>(is, what));
}

}  // namespace ctcfuse::io

#endif  // CTCFUSE_BINARY_IO_HPP_
