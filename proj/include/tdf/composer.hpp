#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tdf/config_registers.hpp"
#include "tdf/errors.hpp"
#include "tdf/graph.hpp"
#include "tdf/kernels.hpp"
#include "tdf/token.hpp"

namespace tdf {

// Number of tag bits needed for T concurrent threads: max(1, ceil(log2 T)).
inline unsigned tag_width(unsigned max_threads) {
  if (max_threads < 1) throw Error("max_threads must be >= 1");
  unsigned bits = 0;
  while ((1u << bits) < max_threads) ++bits;
  return std::max(1u, bits);
}

// Switching box inserted by the composer where merged paths diverge (split)
// or converge (join). Routes map a configuration to the output (split) or
// input (join) port index tokens of that configuration use. Not to be
// confused with the AES S-box substitution table.
struct SBoxSpec {
  enum class Kind { Split, Join };

  std::string id;
  Kind kind = Kind::Split;
  std::map<int, int> routes;  // config id -> port index

  friend bool operator==(const SBoxSpec&, const SBoxSpec&) = default;
};

struct ConfigEntry {
  int id = 0;
  std::string source;  // name of the source graph this config executes

  friend bool operator==(const ConfigEntry&, const ConfigEntry&) = default;
};

// A runtime-reconfigurable graph produced by merging several application
// graphs: the base holds actors plus sboxes and all edges; the config table
// gives one configuration per source graph.
struct MergedGraph {
  DataflowGraph base;
  std::vector<ConfigEntry> configs;
  std::vector<SBoxSpec> sboxes;
  unsigned max_threads = 1;
  unsigned tag_width = 1;

  bool is_merged() const { return !configs.empty(); }

  const SBoxSpec* find_sbox(std::string_view id) const {
    for (const auto& sb : sboxes)
      if (sb.id == id) return &sb;
    return nullptr;
  }
  const ConfigEntry* find_config(int id) const {
    for (const auto& c : configs)
      if (c.id == id) return &c;
    return nullptr;
  }
  std::size_t non_sbox_actor_count() const {
    std::size_t n = 0;
    for (const auto& a : base.actors) n += !is_sbox_kind(a.kind);
    return n;
  }
};

// Port index a token takes through a switching box: the route of the
// configuration selected for the token's tag. The payload and tag are
// untouched; routing is a pure table lookup.
inline int route(const SBoxSpec& sb, const Token& tok,
                 const ConfigRegisterFile& regs) {
  const int config = regs.require(tok.tag);
  auto it = sb.routes.find(config);
  if (it == sb.routes.end())
    throw UnroutableToken("sbox " + sb.id + " has no route for config " +
                          std::to_string(config) + " (tag " +
                          std::to_string(tok.tag.value) + ")");
  return it->second;
}

struct MergeOptions {
  std::size_t default_capacity = kDefaultFifoCapacity;
  // Bump join output capacities by the cross-config pipeline-depth skew of
  // the consumer, so bounded FIFOs cannot starve the shorter path while the
  // longer one fills (the paper leaves FIFO depths unstated).
  bool skew_safe_capacities = true;
};

namespace detail {

// Longest stage path from any graph input to each actor's inputs (the cycle
// its first tokens can arrive, ignoring arbitration). nullopt if cyclic.
inline std::optional<std::map<std::string, std::uint64_t>> arrival_depths(
    const DataflowGraph& g) {
  std::map<std::string, std::vector<std::string>> succs;
  std::map<std::string, std::size_t> pending;
  for (const auto& a : g.actors) pending[a.id] = 0;
  for (const auto& e : g.edges) {
    succs[e.src.actor].push_back(e.dst.actor);
    ++pending[e.dst.actor];
  }

  std::map<std::string, std::uint64_t> arrival;
  std::vector<std::string> ready;
  for (const auto& a : g.actors)
    if (pending[a.id] == 0) ready.push_back(a.id);
  for (const auto& b : g.inputs) arrival[b.attach.actor] = 0;

  std::size_t done = 0;
  while (!ready.empty()) {
    const std::string id = ready.back();
    ready.pop_back();
    ++done;
    const ActorSpec* a = g.find_actor(id);
    const std::uint64_t leave = arrival[id] + stage_count(*a);
    for (const auto& succ : succs[id]) {
      arrival[succ] = std::max(arrival[succ], leave);
      if (--pending[succ] == 0) ready.push_back(succ);
    }
  }
  if (done != g.actors.size()) return std::nullopt;
  return arrival;
}

struct Conn {
  int config = 0;
  bool from_boundary = false;
  Endpoint src;             // when !from_boundary
  std::string input_name;   // merged input name when from_boundary
  std::size_t capacity = kDefaultFifoCapacity;

  std::string key() const { return from_boundary ? "@" + input_name : src.str(); }
};

struct MergedBoundary {
  BoundaryPort port;
  std::vector<std::string> source_graphs;
};

// Unifies boundary ports across graphs: shared only when name, width and
// attachment all agree; otherwise they stay separate, renamed with their
// source graph.
inline std::vector<MergedBoundary> unify_boundaries(
    std::span<const DataflowGraph> graphs, bool inputs_side) {
  std::vector<MergedBoundary> merged;
  std::map<std::string, std::size_t> by_key;
  for (std::size_t c = 0; c < graphs.size(); ++c) {
    const auto& side = inputs_side ? graphs[c].inputs : graphs[c].outputs;
    for (const auto& b : side) {
      const std::string key =
          b.name + "|" + std::to_string(b.width_bits) + "|" + b.attach.str();
      auto it = by_key.find(key);
      if (it == by_key.end()) {
        MergedBoundary mb;
        mb.port = b;
        mb.port.configs = {static_cast<int>(c)};
        mb.port.source_name = b.name;
        mb.source_graphs = {graphs[c].name};
        by_key.emplace(key, merged.size());
        merged.push_back(std::move(mb));
      } else {
        auto& mb = merged[it->second];
        mb.port.configs.push_back(static_cast<int>(c));
        mb.port.capacity = std::max(mb.port.capacity, b.capacity);
        mb.source_graphs.push_back(graphs[c].name);
      }
    }
  }
  // Resolve name collisions between distinct entries.
  std::map<std::string, int> name_uses;
  for (const auto& mb : merged) ++name_uses[mb.port.source_name];
  std::set<std::string> taken;
  for (auto& mb : merged) {
    std::string name = mb.port.source_name;
    if (name_uses[name] > 1) name += "_" + mb.source_graphs.front();
    while (!taken.insert(name).second) name += "_" + std::to_string(mb.port.configs.front());
    mb.port.name = name;
    if (mb.port.configs.size() == graphs.size()) mb.port.configs.clear();
    if (mb.port.source_name == mb.port.name) mb.port.source_name.clear();
  }
  return merged;
}

}  // namespace detail

std::vector<Violation> validate_merged(const MergedGraph& m);

// Merges N application graphs into one reconfigurable graph. Actors sharing
// an id are instantiated once (their kind, params and ports must agree);
// where connections diverge across configurations, split/join sboxes are
// inserted with one route per config. Boundary ports are shared only when
// identical, never routed.
inline MergedGraph merge(std::span<const DataflowGraph> graphs,
                         unsigned max_threads, MergeOptions opt = {}) {
  if (graphs.size() < 2)
    throw MergeConflict("merge needs at least 2 graphs, got " +
                        std::to_string(graphs.size()));
  for (const auto& g : graphs) {
    auto violations = validate(g);
    if (!violations.empty()) throw ValidationError(std::move(violations));
  }

  MergedGraph m;
  m.max_threads = max_threads;
  m.tag_width = tag_width(max_threads);
  for (std::size_t c = 0; c < graphs.size(); ++c)
    m.configs.push_back({static_cast<int>(c), graphs[c].name});

  // Actor union by id. Sharing is opt-in by naming: same id must mean the
  // same kind, params and port structure.
  for (const auto& g : graphs) {
    for (const auto& a : g.actors) {
      const ActorSpec* seen = m.base.find_actor(a.id);
      if (!seen) {
        m.base.actors.push_back(a);
        continue;
      }
      if (seen->kind != a.kind)
        throw MergeConflict("actor \"" + a.id + "\" is kind \"" + seen->kind +
                            "\" in one graph and \"" + a.kind + "\" in another");
      if (seen->params != a.params)
        throw MergeConflict("actor \"" + a.id +
                            "\" has conflicting params across graphs");
      if (seen->inputs != a.inputs || seen->outputs != a.outputs)
        throw ArityConflict("actor \"" + a.id +
                            "\" has conflicting port structure across graphs");
    }
  }
  auto find_union_actor = [&](const std::string& id) -> const ActorSpec& {
    const ActorSpec* a = m.base.find_actor(id);
    if (!a) throw Error("internal: unknown actor " + id);
    return *a;
  };

  auto merged_inputs = detail::unify_boundaries(graphs, true);
  auto merged_outputs = detail::unify_boundaries(graphs, false);

  // Per-config connections into every destination input port.
  std::map<std::string, std::pair<Endpoint, std::vector<detail::Conn>>> by_dst;
  for (std::size_t c = 0; c < graphs.size(); ++c) {
    for (const auto& e : graphs[c].edges) {
      auto& entry = by_dst[e.dst.str()];
      entry.first = e.dst;
      entry.second.push_back({static_cast<int>(c), false, e.src, "", e.capacity});
    }
  }
  for (const auto& mb : merged_inputs) {
    auto& entry = by_dst[mb.port.attach.str()];
    entry.first = mb.port.attach;
    for (std::size_t c = 0; c < graphs.size(); ++c)
      if (mb.port.active_in(static_cast<int>(c)))
        entry.second.push_back(
            {static_cast<int>(c), true, {}, mb.port.name, mb.port.capacity});
  }

  auto unique_id = [&](std::string base) {
    std::string id = std::move(base);
    int n = 1;
    while (m.base.find_actor(id)) id += "_" + std::to_string(++n);
    return id;
  };

  struct Pending {
    Endpoint src, dst;
    std::set<int> configs;
    std::size_t capacity;
    std::string via_join;  // join id when this is a join output edge
  };
  std::vector<Pending> pending;
  auto set_input_attach = [&](const std::string& name, Endpoint ep) {
    for (auto& mb : merged_inputs)
      if (mb.port.name == name) mb.port.attach = std::move(ep);
  };

  for (auto& [dst_key, entry] : by_dst) {
    auto& [dst, conns] = entry;
    // Distinct sources in first-appearance order (conns are config-ordered).
    std::vector<std::string> order;
    std::map<std::string, std::vector<const detail::Conn*>> groups;
    for (const auto& conn : conns) {
      auto [it, inserted] = groups.try_emplace(conn.key());
      if (inserted) order.push_back(conn.key());
      it->second.push_back(&conn);
    }
    auto group_caps = [&](const std::vector<const detail::Conn*>& g) {
      std::size_t cap = 0;
      for (const auto* conn : g) cap = std::max(cap, conn->capacity);
      return cap;
    };
    if (order.size() == 1) {
      const auto& g = groups[order[0]];
      if (!g.front()->from_boundary) {
        Pending p{g.front()->src, dst, {}, group_caps(g), ""};
        for (const auto* conn : g) p.configs.insert(conn->config);
        pending.push_back(std::move(p));
      }
      continue;  // boundary attach already points at dst
    }

    const ActorSpec& dst_actor = find_union_actor(dst.actor);
    const PortSpec* dst_port = dst_actor.find_input(dst.port);
    const unsigned width = dst_port ? dst_port->width_bits : 0;

    SBoxSpec sb;
    sb.id = unique_id("sbj_" + dst.actor + "_" + dst.port);
    sb.kind = SBoxSpec::Kind::Join;
    ActorSpec actor;
    actor.id = sb.id;
    actor.kind = std::string(kJoinKind);
    actor.outputs = {{"out", width}};
    std::set<int> all_configs;
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto& g = groups[order[i]];
      actor.inputs.push_back({"in" + std::to_string(i), width});
      for (const auto* conn : g) {
        sb.routes[conn->config] = static_cast<int>(i);
        all_configs.insert(conn->config);
      }
      const Endpoint join_in{sb.id, "in" + std::to_string(i)};
      if (g.front()->from_boundary) {
        set_input_attach(g.front()->input_name, join_in);
      } else {
        Pending p{g.front()->src, join_in, {}, group_caps(g), ""};
        for (const auto* conn : g) p.configs.insert(conn->config);
        pending.push_back(std::move(p));
      }
    }
    std::size_t out_cap = 0;
    for (const auto& conn : conns) out_cap = std::max(out_cap, conn.capacity);
    pending.push_back({{sb.id, "out"}, dst, all_configs, out_cap, sb.id});
    m.base.actors.push_back(std::move(actor));
    m.sboxes.push_back(std::move(sb));
  }

  // Source side: where one output port drives different destinations per
  // config, insert a split. Destinations are grouped by config signature;
  // same-signature fanout stays parallel wiring behind one split port.
  std::map<std::string, std::vector<std::size_t>> by_src;
  std::vector<std::string> src_order;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto [it, inserted] = by_src.try_emplace(pending[i].src.str());
    if (inserted) src_order.push_back(pending[i].src.str());
    it->second.push_back(i);
  }

  for (const auto& src_key : src_order) {
    const auto& idxs = by_src[src_key];
    std::vector<std::set<int>> signatures;
    for (std::size_t i : idxs) {
      if (std::find(signatures.begin(), signatures.end(), pending[i].configs) ==
          signatures.end())
        signatures.push_back(pending[i].configs);
    }
    if (signatures.size() == 1) {
      for (std::size_t i : idxs)
        m.base.edges.push_back(
            {pending[i].src, pending[i].dst, pending[i].capacity});
      continue;
    }
    // Distinct signatures must partition the configs.
    std::set<int> seen_configs;
    for (const auto& sig : signatures)
      for (int c : sig)
        if (!seen_configs.insert(c).second)
          throw ArityConflict("output " + src_key +
                              " has an unmergeable fanout structure");

    const Endpoint src = pending[idxs.front()].src;
    const ActorSpec& src_actor = find_union_actor(src.actor);
    const PortSpec* src_port = src_actor.find_output(src.port);
    const unsigned width = src_port ? src_port->width_bits : 0;

    SBoxSpec sb;
    sb.id = unique_id("sbs_" + src.actor + "_" + src.port);
    sb.kind = SBoxSpec::Kind::Split;
    ActorSpec actor;
    actor.id = sb.id;
    actor.kind = std::string(kSplitKind);
    actor.inputs = {{"in", width}};
    std::size_t in_cap = 0;
    for (std::size_t sig_idx = 0; sig_idx < signatures.size(); ++sig_idx) {
      actor.outputs.push_back({"out" + std::to_string(sig_idx), width});
      for (int c : signatures[sig_idx]) sb.routes[c] = static_cast<int>(sig_idx);
      for (std::size_t i : idxs) {
        if (pending[i].configs != signatures[sig_idx]) continue;
        m.base.edges.push_back({{sb.id, "out" + std::to_string(sig_idx)},
                                pending[i].dst,
                                pending[i].capacity});
        in_cap = std::max(in_cap, pending[i].capacity);
      }
    }
    m.base.edges.push_back({src, {sb.id, "in"}, std::max(in_cap, opt.default_capacity)});
    m.base.actors.push_back(std::move(actor));
    m.sboxes.push_back(std::move(sb));
  }

  for (auto& mb : merged_inputs) m.base.inputs.push_back(std::move(mb.port));
  for (auto& mb : merged_outputs) m.base.outputs.push_back(std::move(mb.port));
  m.base.name = [&] {
    std::string n;
    for (const auto& g : graphs) n += (n.empty() ? "" : "+") + g.name;
    return n;
  }();

  if (opt.skew_safe_capacities) {
    std::vector<std::optional<std::map<std::string, std::uint64_t>>> depths;
    for (const auto& g : graphs) depths.push_back(detail::arrival_depths(g));
    for (const auto& sb : m.sboxes) {
      if (sb.kind != SBoxSpec::Kind::Join) continue;
      for (auto& e : m.base.edges) {
        if (e.src.actor != sb.id) continue;
        std::uint64_t lo = UINT64_MAX, hi = 0;
        for (const auto& [config, port] : sb.routes) {
          const auto& d = depths[static_cast<std::size_t>(config)];
          if (!d) continue;
          auto it = d->find(e.dst.actor);
          if (it == d->end()) continue;
          lo = std::min(lo, it->second);
          hi = std::max(hi, it->second);
        }
        if (hi > lo)
          e.capacity = std::max(e.capacity, opt.default_capacity + (hi - lo));
      }
    }
  }

  auto violations = validate_merged(m);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return m;
}

inline MergedGraph merge(const std::vector<DataflowGraph>& graphs,
                         unsigned max_threads, MergeOptions opt = {}) {
  return merge(std::span<const DataflowGraph>(graphs), max_threads, opt);
}

namespace detail {

// Follows an active connection forward through sboxes under one config,
// returning the final non-sbox destinations with the last hop's capacity.
inline void follow_active(const MergedGraph& m, int config, const Endpoint& from,
                          std::vector<std::pair<Endpoint, std::size_t>>& out) {
  for (const auto& e : m.base.edges) {
    if (!(e.src == from)) continue;
    const SBoxSpec* sb = m.find_sbox(e.dst.actor);
    if (!sb) {
      out.push_back({e.dst, e.capacity});
      continue;
    }
    auto r = sb->routes.find(config);
    if (r == sb->routes.end()) continue;  // sbox inactive under this config
    if (sb->kind == SBoxSpec::Kind::Join) {
      const ActorSpec* a = m.base.find_actor(sb->id);
      if (a->input_index(e.dst.port) != r->second) continue;  // dead input
      follow_active(m, config, {sb->id, "out"}, out);
    } else {
      follow_active(m, config, {sb->id, "out" + std::to_string(r->second)}, out);
    }
  }
}

}  // namespace detail

// Reconstructs the application graph a configuration executes: the active
// subgraph with sboxes collapsed to wires. Structurally isomorphic to the
// source graph of that config (capacities may differ where merge() resized
// join outputs).
inline DataflowGraph extract_config(const MergedGraph& m, int config_id) {
  const ConfigEntry* entry = m.find_config(config_id);
  if (!entry)
    throw UnknownConfig("no config with id " + std::to_string(config_id));

  DataflowGraph g;
  g.name = entry->source;

  // Active non-sbox actors: reachable from the config's inputs.
  std::set<std::string> active;
  std::vector<Endpoint> frontier;
  for (const auto& b : m.base.inputs) {
    if (!b.active_in(config_id)) continue;
    BoundaryPort in = b;
    in.name = b.original_name();
    in.source_name.clear();
    in.configs.clear();
    std::vector<std::pair<Endpoint, std::size_t>> dsts;
    const SBoxSpec* sb = m.find_sbox(b.attach.actor);
    if (!sb) {
      dsts.push_back({b.attach, b.capacity});
    } else if (auto r = sb->routes.find(config_id); r != sb->routes.end()) {
      if (sb->kind == SBoxSpec::Kind::Join)
        detail::follow_active(m, config_id, {sb->id, "out"}, dsts);
      else
        detail::follow_active(
            m, config_id, {sb->id, "out" + std::to_string(r->second)}, dsts);
    }
    if (dsts.size() != 1)
      throw Error("input " + b.name + " does not resolve to one port under config " +
                  std::to_string(config_id));
    in.attach = dsts.front().first;
    g.inputs.push_back(std::move(in));
    if (active.insert(dsts.front().first.actor).second)
      frontier.push_back(dsts.front().first);
  }

  while (!frontier.empty()) {
    const std::string id = frontier.back().actor;
    frontier.pop_back();
    const ActorSpec* a = m.base.find_actor(id);
    for (const auto& p : a->outputs) {
      std::vector<std::pair<Endpoint, std::size_t>> dsts;
      detail::follow_active(m, config_id, {id, p.name}, dsts);
      for (auto& [dst, cap] : dsts) {
        g.edges.push_back({{id, p.name}, dst, cap});
        if (active.insert(dst.actor).second) frontier.push_back({dst.actor, dst.port});
      }
    }
  }

  for (const auto& a : m.base.actors)
    if (active.count(a.id)) g.actors.push_back(a);

  for (const auto& b : m.base.outputs) {
    if (!b.active_in(config_id)) continue;
    BoundaryPort out = b;
    out.name = b.original_name();
    out.source_name.clear();
    out.configs.clear();
    g.outputs.push_back(std::move(out));
  }
  return g;
}

inline std::vector<Violation> validate_merged(const MergedGraph& m) {
  std::vector<Violation> out = validate(m.base);
  auto flag = [&](std::string element, std::string rule, std::string detail) {
    out.push_back({std::move(element), std::move(rule), std::move(detail)});
  };

  if (m.max_threads < 1)
    flag("max_threads", "invalid-threads", "must be >= 1");
  else if (m.tag_width != tag_width(m.max_threads))
    flag("tag_width", "tag-width",
         "tag_width " + std::to_string(m.tag_width) + " != max(1, ceil(log2 " +
             std::to_string(m.max_threads) + "))");

  for (std::size_t i = 0; i < m.configs.size(); ++i)
    if (m.configs[i].id != static_cast<int>(i))
      flag("configs", "config-table", "config ids must be 0..N-1 in order");

  std::set<std::string> sbox_ids;
  for (const auto& sb : m.sboxes) {
    if (!sbox_ids.insert(sb.id).second)
      flag(sb.id, "duplicate-sbox", "sbox id listed twice");
    const ActorSpec* a = m.base.find_actor(sb.id);
    if (!a) {
      flag(sb.id, "sbox-actor-missing", "sbox has no actor entry");
      continue;
    }
    const bool split = sb.kind == SBoxSpec::Kind::Split;
    if (a->kind != (split ? kSplitKind : kJoinKind))
      flag(sb.id, "sbox-kind", "actor kind does not match sbox kind");
    if (split && a->inputs.size() != 1)
      flag(sb.id, "sbox-kind", "split must have exactly one input");
    if (!split && a->outputs.size() != 1)
      flag(sb.id, "sbox-kind", "join must have exactly one output");
    const int ports = static_cast<int>(split ? a->outputs.size() : a->inputs.size());
    for (const auto& [config, port] : sb.routes) {
      if (!m.find_config(config))
        flag(sb.id, "route-config", "route for unknown config " + std::to_string(config));
      if (port < 0 || port >= ports)
        flag(sb.id, "route-range", "route port index " + std::to_string(port) +
                                       " out of range");
    }
  }
  for (const auto& a : m.base.actors)
    if (is_sbox_kind(a.kind) && !m.find_sbox(a.id))
      flag(a.id, "sbox-unlisted", "sbox actor has no sboxes[] entry");

  // Route totality: every sbox reachable under a config has a route for it.
  for (const auto& c : m.configs) {
    std::set<std::string> visited;
    std::vector<std::string> frontier;
    for (const auto& b : m.base.inputs)
      if (b.active_in(c.id) && visited.insert(b.attach.actor).second)
        frontier.push_back(b.attach.actor);
    while (!frontier.empty()) {
      const std::string id = frontier.back();
      frontier.pop_back();
      const ActorSpec* a = m.base.find_actor(id);
      if (!a) continue;
      const SBoxSpec* sb = m.find_sbox(id);
      std::vector<std::string> active_ports;
      if (sb) {
        auto r = sb->routes.find(c.id);
        if (r == sb->routes.end()) {
          flag(sb->id, "route-missing",
               "sbox reachable under config " + std::to_string(c.id) +
                   " but has no route for it");
          continue;
        }
        active_ports.push_back(sb->kind == SBoxSpec::Kind::Split
                                   ? "out" + std::to_string(r->second)
                                   : "out");
      } else {
        for (const auto& p : a->outputs) active_ports.push_back(p.name);
      }
      for (const auto& e : m.base.edges) {
        if (e.src.actor != id) continue;
        if (std::find(active_ports.begin(), active_ports.end(), e.src.port) ==
            active_ports.end())
          continue;
        if (visited.insert(e.dst.actor).second) frontier.push_back(e.dst.actor);
      }
    }
  }
  return out;
}

}  // namespace tdf
