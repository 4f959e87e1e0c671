#pragma once

#include <deque>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tdf/aes.hpp"
#include "tdf/errors.hpp"
#include "tdf/graph.hpp"
#include "tdf/hex.hpp"

namespace tdf {

// A kernel maps the consumed input payloads (one per input port, in port
// order) to the produced output payloads (one per declared output port).
// Kernels are pure functions of the payloads and the actor params.
using KernelFn =
    std::function<std::vector<Payload>(const ActorSpec&, const std::vector<Payload>&)>;

inline constexpr std::string_view kSplitKind = "sbox_split";
inline constexpr std::string_view kJoinKind = "sbox_join";

inline bool is_sbox_kind(std::string_view kind) {
  return kind == kSplitKind || kind == kJoinKind;
}

// Library of computational kernels actors are drawn from. Switching boxes
// are routing builtins handled by the engine and always resolve.
class KernelRegistry {
 public:
  void register_kind(std::string kind, KernelFn fn) {
    kernels_[std::move(kind)] = std::move(fn);
  }

  bool contains(std::string_view kind) const {
    return is_sbox_kind(kind) || kernels_.count(std::string(kind)) > 0;
  }

  const KernelFn& at(const std::string& kind) const {
    auto it = kernels_.find(kind);
    if (it == kernels_.end()) throw Error("unknown kernel kind \"" + kind + "\"");
    return it->second;
  }

  // Registry with the builtin kinds: identity plus the AES pipeline kernels.
  static KernelRegistry standard();

 private:
  std::map<std::string, KernelFn, std::less<>> kernels_;
};

namespace kernels {

inline aes::State to_state(const Payload& p, const ActorSpec& a) {
  if (p.size() != 16)
    throw KernelError(a.id + ": expected a 16-byte block, got " +
                      std::to_string(p.size()) + " bytes");
  aes::State s;
  std::copy(p.begin(), p.end(), s.begin());
  return s;
}

inline Payload to_payload(const aes::State& s) { return Payload(s.begin(), s.end()); }

// Forwards each consumed payload to the same-index output port.
inline std::vector<Payload> identity(const ActorSpec& a,
                                     const std::vector<Payload>& in) {
  if (in.size() < a.outputs.size())
    throw KernelError(a.id + ": identity kernel has more outputs than inputs");
  return {in.begin(), in.begin() + static_cast<std::ptrdiff_t>(a.outputs.size())};
}

inline std::vector<Payload> add_round_key(const ActorSpec& a,
                                          const std::vector<Payload>& in) {
  if (in.size() != 2) throw KernelError(a.id + ": add_round_key takes (state, key)");
  aes::State s = to_state(in[0], a);
  const aes::State k = to_state(in[1], a);
  for (unsigned i = 0; i < 16; ++i) s[i] ^= k[i];
  return {to_payload(s)};
}

inline std::vector<Payload> aes_round(const ActorSpec& a,
                                      const std::vector<Payload>& in) {
  if (in.size() != 2) throw KernelError(a.id + ": aes_round takes (state, key)");
  const bool is_final = int_param(a.params, "is_final").value_or(0) != 0;
  aes::RoundKey key;
  const aes::State k = to_state(in[1], a);
  std::copy(k.begin(), k.end(), key.begin());
  return {to_payload(aes::round_step(to_state(in[0], a), key, is_final))};
}

// One key-expansion stage. The sliding window payload carries the last nk
// words of the schedule; the stage generates up to four further words and
// emits the round key of its round. The head stage (round 1) consumes the
// raw key instead and additionally emits round key 0.
//
// Outputs follow the declared ports: [rk0,] rk [, window].
inline std::vector<Payload> key_expand(const ActorSpec& a,
                                       const std::vector<Payload>& in) {
  const auto round = int_param(a.params, "round");
  const auto nk_param = int_param(a.params, "nk");
  if (!round || !nk_param)
    throw KernelError(a.id + ": key_expand needs integer params round and nk");
  const unsigned nk = static_cast<unsigned>(*nk_param);
  const unsigned r = static_cast<unsigned>(*round);
  const bool head = int_param(a.params, "head").value_or(0) != 0;
  if (nk != 4 && nk != 6 && nk != 8)
    throw KernelError(a.id + ": nk must be 4, 6 or 8");
  if (in.size() != 1 || in[0].size() != 4 * nk)
    throw KernelError(a.id + ": expected one " + std::to_string(4 * nk) +
                      "-byte window payload");

  std::deque<aes::detail::Word> win;
  for (unsigned i = 0; i < nk; ++i)
    win.push_back({in[0][4 * i], in[0][4 * i + 1], in[0][4 * i + 2], in[0][4 * i + 3]});

  Payload rk0;
  if (head) {
    rk0.assign(in[0].begin(), in[0].begin() + 16);
    if (r != 1) throw KernelError(a.id + ": head stage must be round 1");
  }

  // The window ends at word index e; round r needs words 4r..4r+3.
  std::size_t e = head ? nk - 1 : 4 * static_cast<std::size_t>(r) - 1;
  for (std::size_t i = e + 1; i <= 4 * static_cast<std::size_t>(r) + 3; ++i) {
    auto w = aes::detail::next_word(win.back(), win.front(), i, nk);
    win.pop_front();
    win.push_back(w);
    e = i;
  }

  Payload rk;
  const std::size_t base = 4 * static_cast<std::size_t>(r) - (e - nk + 1);
  for (std::size_t j = 0; j < 4; ++j)
    for (unsigned b = 0; b < 4; ++b) rk.push_back(win[base + j][b]);

  std::vector<Payload> out;
  if (head) out.push_back(std::move(rk0));
  out.push_back(std::move(rk));
  // Emit the window only when a next stage consumes it.
  const bool wants_window = a.find_output("window") != nullptr;
  if (wants_window) {
    Payload wp;
    for (const auto& w : win) wp.insert(wp.end(), w.begin(), w.end());
    out.push_back(std::move(wp));
  }
  if (out.size() != a.outputs.size())
    throw KernelError(a.id + ": declared ports do not match key_expand outputs");
  return out;
}

}  // namespace kernels

inline KernelRegistry KernelRegistry::standard() {
  KernelRegistry reg;
  reg.register_kind("identity", kernels::identity);
  reg.register_kind("add_round_key", kernels::add_round_key);
  reg.register_kind("aes_round", kernels::aes_round);
  reg.register_kind("key_expand", kernels::key_expand);
  return reg;
}

}  // namespace tdf
