#pragma once

#include <compare>
#include <cstdint>

#include "tdf/hex.hpp"

namespace tdf {

// Identifier of the logical thread a token belongs to. "Thread" here always
// means a tagged token stream flowing through the graph, never a host
// execution thread.
struct TagId {
  std::uint32_t value = 0;

  friend auto operator<=>(const TagId&, const TagId&) = default;
};

// The unit of data on an edge: a fixed-width payload plus its thread tag.
// The payload holds exactly width_bits/8 bytes of the carrying edge.
struct Token {
  Payload payload;
  TagId tag;

  friend bool operator==(const Token&, const Token&) = default;
};

}  // namespace tdf
