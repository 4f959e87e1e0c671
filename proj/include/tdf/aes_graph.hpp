#pragma once

#include <string>

#include "tdf/aes.hpp"
#include "tdf/graph.hpp"

namespace tdf::aes {

// Emits the unrolled encryption pipeline for one standard: one initial
// AddRoundKey actor, Nr round actors (the last flagged is_final), and a
// key-expansion chain of Nr stages computing the schedule in-pipeline so
// round keys travel as tokens alongside the state.
//
// Round actors are the same kernel across standards, parameterized only by
// is_final (plus the shared stage count), and carry standard-independent ids
// (round1..roundN-1, round_final) so the composer shares them. Key-expansion
// actors differ per standard and carry prefixed ids.
//
// Graph inputs: pt (128-bit block), key (key-length bits). Output: ct.
inline DataflowGraph build_graph(Standard std, unsigned stages_per_round = 4) {
  if (stages_per_round < 1) throw Error("stages_per_round must be >= 1");
  const unsigned nr = rounds(std);
  const unsigned kw = key_bytes(std) * 8;
  const std::string kx = "kx" + std::string(name(std)).substr(3) + "_";

  DataflowGraph g;
  g.name = std::string(name(std));

  auto round_id = [&](unsigned r) {
    return r == nr ? std::string("round_final") : "round" + std::to_string(r);
  };

  g.actors.push_back({.id = "ark0",
                      .kind = "add_round_key",
                      .params = {},
                      .inputs = {{"state", 128}, {"key", 128}},
                      .outputs = {{"state", 128}}});
  for (unsigned r = 1; r <= nr; ++r) {
    g.actors.push_back(
        {.id = round_id(r),
         .kind = "aes_round",
         .params = {{"is_final", std::int64_t{r == nr}},
                    {"stages", std::int64_t{stages_per_round}}},
         .inputs = {{"state", 128}, {"key", 128}},
         .outputs = {{"state", 128}}});
  }
  for (unsigned r = 1; r <= nr; ++r) {
    ActorSpec a;
    a.id = kx + std::to_string(r);
    a.kind = "key_expand";
    a.params = {{"round", std::int64_t{r}}, {"nk", std::int64_t{key_bytes(std) / 4}}};
    if (r == 1) {
      a.params.emplace("head", std::int64_t{1});
      a.inputs = {{"key", kw}};
      a.outputs = {{"rk0", 128}, {"rk", 128}};
    } else {
      a.inputs = {{"window", kw}};
      a.outputs = {{"rk", 128}};
    }
    if (r < nr) a.outputs.push_back({"window", kw});
    g.actors.push_back(std::move(a));
  }

  auto edge = [&](std::string sa, std::string sp, std::string da, std::string dp) {
    g.edges.push_back({{std::move(sa), std::move(sp)}, {std::move(da), std::move(dp)}});
  };

  edge(kx + "1", "rk0", "ark0", "key");
  edge("ark0", "state", round_id(1), "state");
  for (unsigned r = 1; r < nr; ++r) {
    edge(round_id(r), "state", round_id(r + 1), "state");
    edge(kx + std::to_string(r), "window", kx + std::to_string(r + 1), "window");
  }
  for (unsigned r = 1; r <= nr; ++r)
    edge(kx + std::to_string(r), "rk", round_id(r), "key");

  g.inputs.push_back({.name = "pt", .width_bits = 128, .attach = {"ark0", "state"}});
  g.inputs.push_back({.name = "key", .width_bits = kw, .attach = {kx + "1", "key"}});
  g.outputs.push_back({.name = "ct", .width_bits = 128, .attach = {round_id(nr), "state"}});
  return g;
}

}  // namespace tdf::aes
