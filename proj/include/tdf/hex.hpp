#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "tdf/errors.hpp"

namespace tdf {

using Payload = std::vector<std::uint8_t>;

inline std::string to_hex(const std::uint8_t* data, std::size_t n) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(digits[data[i] >> 4]);
    out.push_back(digits[data[i] & 0x0f]);
  }
  return out;
}

template <typename ByteRange>
std::string to_hex(const ByteRange& bytes) {
  return to_hex(reinterpret_cast<const std::uint8_t*>(std::data(bytes)),
                std::size(bytes));
}

inline Payload from_hex(std::string_view text) {
  auto nibble = [&](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw Error("invalid hex digit '" + std::string(1, c) + "'");
  };
  if (text.size() % 2 != 0)
    throw Error("hex string has odd length " + std::to_string(text.size()));
  Payload out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<std::uint8_t>(nibble(text[2 * i]) << 4 |
                                       nibble(text[2 * i + 1]));
  return out;
}

}  // namespace tdf
