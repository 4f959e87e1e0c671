#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tdf/errors.hpp"

namespace tdf::aes {

// Key lengths supported by the standard, with the derived key size and
// round count Nr: (16, 10), (24, 12), (32, 14).
enum class Standard { Aes128, Aes192, Aes256 };

constexpr unsigned key_bytes(Standard s) {
  switch (s) {
    case Standard::Aes128: return 16;
    case Standard::Aes192: return 24;
    case Standard::Aes256: return 32;
  }
  return 0;
}

constexpr unsigned rounds(Standard s) {
  switch (s) {
    case Standard::Aes128: return 10;
    case Standard::Aes192: return 12;
    case Standard::Aes256: return 14;
  }
  return 0;
}

constexpr std::string_view name(Standard s) {
  switch (s) {
    case Standard::Aes128: return "aes128";
    case Standard::Aes192: return "aes192";
    case Standard::Aes256: return "aes256";
  }
  return "";
}

inline Standard standard_from_name(std::string_view n) {
  if (n == "aes128") return Standard::Aes128;
  if (n == "aes192") return Standard::Aes192;
  if (n == "aes256") return Standard::Aes256;
  throw Error("unknown AES standard \"" + std::string(n) + "\"");
}

// 16-byte block state, column-major 4x4 matrix: state(row, col) = bytes[row + 4*col].
using State = std::array<std::uint8_t, 16>;
using RoundKey = std::array<std::uint8_t, 16>;

struct KeySchedule {
  std::vector<RoundKey> round_keys;  // Nr + 1 keys
};

inline constexpr std::array<std::uint8_t, 256> kSBox = {
    0x63, 0x7c, 0x77, 0x7b, 0xf2, 0x6b, 0x6f, 0xc5, 0x30, 0x01, 0x67, 0x2b, 0xfe, 0xd7, 0xab, 0x76,
    0xca, 0x82, 0xc9, 0x7d, 0xfa, 0x59, 0x47, 0xf0, 0xad, 0xd4, 0xa2, 0xaf, 0x9c, 0xa4, 0x72, 0xc0,
    0xb7, 0xfd, 0x93, 0x26, 0x36, 0x3f, 0xf7, 0xcc, 0x34, 0xa5, 0xe5, 0xf1, 0x71, 0xd8, 0x31, 0x15,
    0x04, 0xc7, 0x23, 0xc3, 0x18, 0x96, 0x05, 0x9a, 0x07, 0x12, 0x80, 0xe2, 0xeb, 0x27, 0xb2, 0x75,
    0x09, 0x83, 0x2c, 0x1a, 0x1b, 0x6e, 0x5a, 0xa0, 0x52, 0x3b, 0xd6, 0xb3, 0x29, 0xe3, 0x2f, 0x84,
    0x53, 0xd1, 0x00, 0xed, 0x20, 0xfc, 0xb1, 0x5b, 0x6a, 0xcb, 0xbe, 0x39, 0x4a, 0x4c, 0x58, 0xcf,
    0xd0, 0xef, 0xaa, 0xfb, 0x43, 0x4d, 0x33, 0x85, 0x45, 0xf9, 0x02, 0x7f, 0x50, 0x3c, 0x9f, 0xa8,
    0x51, 0xa3, 0x40, 0x8f, 0x92, 0x9d, 0x38, 0xf5, 0xbc, 0xb6, 0xda, 0x21, 0x10, 0xff, 0xf3, 0xd2,
    0xcd, 0x0c, 0x13, 0xec, 0x5f, 0x97, 0x44, 0x17, 0xc4, 0xa7, 0x7e, 0x3d, 0x64, 0x5d, 0x19, 0x73,
    0x60, 0x81, 0x4f, 0xdc, 0x22, 0x2a, 0x90, 0x88, 0x46, 0xee, 0xb8, 0x14, 0xde, 0x5e, 0x0b, 0xdb,
    0xe0, 0x32, 0x3a, 0x0a, 0x49, 0x06, 0x24, 0x5c, 0xc2, 0xd3, 0xac, 0x62, 0x91, 0x95, 0xe4, 0x79,
    0xe7, 0xc8, 0x37, 0x6d, 0x8d, 0xd5, 0x4e, 0xa9, 0x6c, 0x56, 0xf4, 0xea, 0x65, 0x7a, 0xae, 0x08,
    0xba, 0x78, 0x25, 0x2e, 0x1c, 0xa6, 0xb4, 0xc6, 0xe8, 0xdd, 0x74, 0x1f, 0x4b, 0xbd, 0x8b, 0x8a,
    0x70, 0x3e, 0xb5, 0x66, 0x48, 0x03, 0xf6, 0x0e, 0x61, 0x35, 0x57, 0xb9, 0x86, 0xc1, 0x1d, 0x9e,
    0xe1, 0xf8, 0x98, 0x11, 0x69, 0xd9, 0x8e, 0x94, 0x9b, 0x1e, 0x87, 0xe9, 0xce, 0x55, 0x28, 0xdf,
    0x8c, 0xa1, 0x89, 0x0d, 0xbf, 0xe6, 0x42, 0x68, 0x41, 0x99, 0x2d, 0x0f, 0xb0, 0x54, 0xbb, 0x16,
};

// Every byte replaced through the fixed substitution table.
inline State sub_bytes(State s) {
  for (auto& b : s) b = kSBox[b];
  return s;
}

// Row r rotated left by r positions (row 0 unchanged).
inline State shift_rows(const State& s) {
  State out;
  for (unsigned row = 0; row < 4; ++row)
    for (unsigned col = 0; col < 4; ++col)
      out[row + 4 * col] = s[row + 4 * ((col + row) % 4)];
  return out;
}

namespace detail {

inline std::uint8_t xtime(std::uint8_t a) {
  return static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1b : 0x00));
}

}  // namespace detail

// Each column multiplied by the fixed circulant matrix (02 03 01 01).
inline State mix_columns(const State& s) {
  State out;
  for (unsigned col = 0; col < 4; ++col) {
    const std::uint8_t* c = &s[4 * col];
    const std::uint8_t all = static_cast<std::uint8_t>(c[0] ^ c[1] ^ c[2] ^ c[3]);
    for (unsigned row = 0; row < 4; ++row) {
      const std::uint8_t a = c[row];
      const std::uint8_t b = c[(row + 1) % 4];
      out[row + 4 * col] =
          static_cast<std::uint8_t>(a ^ all ^ detail::xtime(static_cast<std::uint8_t>(a ^ b)));
    }
  }
  return out;
}

inline State add_round_key(State s, std::span<const std::uint8_t, 16> key) {
  for (unsigned i = 0; i < 16; ++i) s[i] ^= key[i];
  return s;
}

// One encryption round: SubBytes, ShiftRows, MixColumns (skipped in the final
// round per the standard), AddRoundKey.
inline State round_step(const State& s, const RoundKey& key, bool is_final) {
  State t = shift_rows(sub_bytes(s));
  if (!is_final) t = mix_columns(t);
  return add_round_key(t, key);
}

namespace detail {

inline constexpr std::array<std::uint8_t, 11> kRcon = {
    0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1b, 0x36};

using Word = std::array<std::uint8_t, 4>;

inline Word sub_word(Word w) {
  for (auto& b : w) b = kSBox[b];
  return w;
}

inline Word rot_word(Word w) {
  return {w[1], w[2], w[3], w[0]};
}

// w[i] = w[i-nk] ^ f(w[i-1]) with the per-index rule of the standard.
inline Word next_word(const Word& prev, const Word& back_nk, std::size_t i,
                      unsigned nk) {
  Word t = prev;
  if (i % nk == 0) {
    t = sub_word(rot_word(t));
    t[0] ^= kRcon[i / nk];
  } else if (nk > 6 && i % nk == 4) {
    t = sub_word(t);
  }
  Word w;
  for (unsigned j = 0; j < 4; ++j) w[j] = static_cast<std::uint8_t>(back_nk[j] ^ t[j]);
  return w;
}

}  // namespace detail

// Derives the Nr+1 round keys from the secret key.
inline KeySchedule expand_key(std::span<const std::uint8_t> key, Standard std) {
  const unsigned nk = key_bytes(std) / 4;
  const unsigned nr = rounds(std);
  if (key.size() != key_bytes(std))
    throw KeyLengthError("key is " + std::to_string(key.size()) + " bytes, " +
                         std::string(name(std)) + " needs " +
                         std::to_string(key_bytes(std)));

  std::vector<detail::Word> w(4 * (nr + 1));
  for (unsigned i = 0; i < nk; ++i)
    w[i] = {key[4 * i], key[4 * i + 1], key[4 * i + 2], key[4 * i + 3]};
  for (std::size_t i = nk; i < w.size(); ++i)
    w[i] = detail::next_word(w[i - 1], w[i - nk], i, nk);

  KeySchedule ks;
  ks.round_keys.resize(nr + 1);
  for (unsigned r = 0; r <= nr; ++r)
    for (unsigned j = 0; j < 4; ++j)
      for (unsigned b = 0; b < 4; ++b)
        ks.round_keys[r][4 * j + b] = w[4 * r + j][b];
  return ks;
}

// Straight-line reference cipher: the oracle the dataflow path is checked
// against. Initial AddRoundKey, Nr-1 full rounds, final round without
// MixColumns.
inline State encrypt_block(const State& plaintext,
                           std::span<const std::uint8_t> key, Standard std) {
  const KeySchedule ks = expand_key(key, std);
  const unsigned nr = rounds(std);
  State s = add_round_key(plaintext, ks.round_keys[0]);
  for (unsigned r = 1; r < nr; ++r) s = round_step(s, ks.round_keys[r], false);
  return round_step(s, ks.round_keys[nr], true);
}

}  // namespace tdf::aes
