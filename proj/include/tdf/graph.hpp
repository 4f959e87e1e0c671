#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tdf/errors.hpp"

namespace tdf {

inline constexpr std::size_t kDefaultFifoCapacity = 4;

using ParamValue = std::variant<std::int64_t, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

inline std::optional<std::int64_t> int_param(const ParamMap& params,
                                             std::string_view key) {
  auto it = params.find(std::string(key));
  if (it == params.end()) return std::nullopt;
  if (const auto* v = std::get_if<std::int64_t>(&it->second)) return *v;
  return std::nullopt;
}

// One data port of an actor. Port names are unique per direction within
// their actor; widths are in bits.
struct PortSpec {
  std::string name;
  unsigned width_bits = 0;

  friend bool operator==(const PortSpec&, const PortSpec&) = default;
};

// In-memory description of one library component instance: a computational
// kernel (resolved against the kernel registry at elaboration time) plus its
// static parameters and port lists.
struct ActorSpec {
  std::string id;
  std::string kind;
  ParamMap params;
  std::vector<PortSpec> inputs;
  std::vector<PortSpec> outputs;

  const PortSpec* find_input(std::string_view name) const {
    for (const auto& p : inputs)
      if (p.name == name) return &p;
    return nullptr;
  }
  const PortSpec* find_output(std::string_view name) const {
    for (const auto& p : outputs)
      if (p.name == name) return &p;
    return nullptr;
  }
  int output_index(std::string_view name) const {
    for (std::size_t i = 0; i < outputs.size(); ++i)
      if (outputs[i].name == name) return static_cast<int>(i);
    return -1;
  }
  int input_index(std::string_view name) const {
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (inputs[i].name == name) return static_cast<int>(i);
    return -1;
  }

  friend bool operator==(const ActorSpec&, const ActorSpec&) = default;
};

// Number of pipeline stages an actor occupies: the "stages" param, else 1.
// Multi-stage actors model inner pipelines with initiation interval 1 and
// latency equal to the stage count.
inline unsigned stage_count(const ActorSpec& a) {
  auto s = int_param(a.params, "stages");
  return s && *s >= 1 ? static_cast<unsigned>(*s) : 1u;
}

// "actorId.portName" reference, the endpoint form used by edges.
struct Endpoint {
  std::string actor;
  std::string port;

  std::string str() const { return actor + "." + port; }
  friend auto operator<=>(const Endpoint&, const Endpoint&) = default;
};

struct EdgeSpec {
  Endpoint src;  // (actor id, output port)
  Endpoint dst;  // (actor id, input port)
  std::size_t capacity = kDefaultFifoCapacity;  // FIFO depth in tokens

  friend auto operator<=>(const EdgeSpec&, const EdgeSpec&) = default;
};

// Named boundary port of a graph. Each boundary port connects to exactly one
// actor port (attach); for merged graphs, `configs` lists the configurations
// the port is active in (empty = all) and `source_name` keeps the name it had
// in its source graph.
struct BoundaryPort {
  std::string name;
  unsigned width_bits = 0;
  Endpoint attach;
  std::size_t capacity = kDefaultFifoCapacity;
  std::vector<int> configs;
  std::string source_name;

  bool active_in(int config) const {
    return configs.empty() ||
           std::find(configs.begin(), configs.end(), config) != configs.end();
  }
  const std::string& original_name() const {
    return source_name.empty() ? name : source_name;
  }

  friend bool operator==(const BoundaryPort&, const BoundaryPort&) = default;
};

struct DataflowGraph {
  std::string name;
  std::vector<ActorSpec> actors;
  std::vector<EdgeSpec> edges;
  std::vector<BoundaryPort> inputs;
  std::vector<BoundaryPort> outputs;

  const ActorSpec* find_actor(std::string_view id) const {
    for (const auto& a : actors)
      if (a.id == id) return &a;
    return nullptr;
  }
  const BoundaryPort* find_input(std::string_view name) const {
    for (const auto& b : inputs)
      if (b.name == name) return &b;
    return nullptr;
  }
  const BoundaryPort* find_output(std::string_view name) const {
    for (const auto& b : outputs)
      if (b.name == name) return &b;
    return nullptr;
  }
};

namespace detail {

inline bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '_' || c == '-';
    if (!ok) return false;
  }
  return true;
}

}  // namespace detail

// Checks every DataflowGraph invariant and returns the violations found
// (empty list iff the graph is valid). Violations are data, not failures.
inline std::vector<Violation> validate(const DataflowGraph& g) {
  std::vector<Violation> out;
  auto flag = [&](std::string element, std::string rule, std::string detail) {
    out.push_back({std::move(element), std::move(rule), std::move(detail)});
  };

  std::set<std::string> actor_ids;
  for (const auto& a : g.actors) {
    if (!detail::valid_identifier(a.id))
      flag(a.id, "invalid-identifier", "actor id must be [A-Za-z0-9_-]+");
    if (!actor_ids.insert(a.id).second)
      flag(a.id, "duplicate-actor-id", "actor id used more than once");
    if (a.kind.empty()) flag(a.id, "missing-kind", "actor has no kernel kind");
    for (const auto* ports : {&a.inputs, &a.outputs}) {
      std::set<std::string> names;
      for (const auto& p : *ports) {
        if (!detail::valid_identifier(p.name))
          flag(a.id + "." + p.name, "invalid-identifier",
               "port name must be [A-Za-z0-9_-]+");
        if (!names.insert(p.name).second)
          flag(a.id + "." + p.name, "duplicate-port",
               "port name used more than once on this side");
        if (p.width_bits < 1)
          flag(a.id + "." + p.name, "invalid-width", "width_bits must be >= 1");
      }
    }
  }

  // Resolve an endpoint to its port spec, flagging dangling references.
  auto resolve = [&](const Endpoint& e, bool want_output,
                     const std::string& what) -> const PortSpec* {
    const ActorSpec* a = g.find_actor(e.actor);
    if (!a) {
      flag(e.actor, "unknown-actor", what + " references absent actor \"" +
                                         e.actor + "\"");
      return nullptr;
    }
    const PortSpec* p = want_output ? a->find_output(e.port) : a->find_input(e.port);
    if (!p)
      flag(e.str(), "unknown-port",
           what + " references absent " +
               (want_output ? std::string("output") : std::string("input")) +
               " port \"" + e.str() + "\"");
    return p;
  };

  // Each actor input port accepts at most one incoming edge (boundary
  // attachments count as writers too).
  std::map<std::string, int> writers;
  for (const auto& e : g.edges) {
    const PortSpec* src = resolve(e.src, true, "edge " + e.src.str());
    const PortSpec* dst = resolve(e.dst, false, "edge " + e.dst.str());
    if (src && dst && src->width_bits != dst->width_bits)
      flag(e.src.str() + " -> " + e.dst.str(), "width-mismatch",
           std::to_string(src->width_bits) + "-bit " + e.src.str() +
               " drives " + std::to_string(dst->width_bits) + "-bit " +
               e.dst.str());
    if (e.capacity < 1)
      flag(e.src.str() + " -> " + e.dst.str(), "invalid-capacity",
           "capacity must be >= 1");
    if (dst) ++writers[e.dst.str()];
  }

  std::set<std::string> boundary_names;
  for (const auto* side : {&g.inputs, &g.outputs}) {
    const bool is_input = side == &g.inputs;
    for (const auto& b : *side) {
      if (!boundary_names.insert(b.name).second)
        flag(b.name, "duplicate-boundary", "boundary port name reused");
      if (b.width_bits < 1)
        flag(b.name, "invalid-width", "width_bits must be >= 1");
      if (b.capacity < 1)
        flag(b.name, "invalid-capacity", "capacity must be >= 1");
      // An input boundary feeds an actor input; an output boundary reads an
      // actor output. Exactly one attachment each.
      const PortSpec* p = resolve(b.attach, !is_input,
                                  (is_input ? "input " : "output ") + b.name);
      if (p && p->width_bits != b.width_bits)
        flag(b.name, "width-mismatch",
             "boundary is " + std::to_string(b.width_bits) + "-bit but " +
                 b.attach.str() + " is " + std::to_string(p->width_bits) +
                 "-bit");
      if (is_input && p) ++writers[b.attach.str()];
    }
  }

  for (const auto& [port, n] : writers)
    if (n > 1)
      flag(port, "multiple-writers",
           "input port has " + std::to_string(n) + " incoming connections");

  return out;
}

// Structural equality: same actor set, same edge set, same boundary set and
// same params; ordering of the actor/edge lists is ignored. Port lists stay
// order-significant (switching-box routes are port-index based).
inline bool structurally_equal(const DataflowGraph& a, const DataflowGraph& b,
                               bool ignore_capacity = false) {
  if (a.name != b.name) return false;
  if (a.actors.size() != b.actors.size() || a.edges.size() != b.edges.size() ||
      a.inputs.size() != b.inputs.size() || a.outputs.size() != b.outputs.size())
    return false;
  for (const auto& actor : a.actors) {
    const ActorSpec* other = b.find_actor(actor.id);
    if (!other || !(actor == *other)) return false;
  }
  auto edge_set = [&](const DataflowGraph& g) {
    std::set<EdgeSpec> s;
    for (EdgeSpec e : g.edges) {
      if (ignore_capacity) e.capacity = 0;
      s.insert(std::move(e));
    }
    return s;
  };
  if (edge_set(a) != edge_set(b)) return false;
  auto boundary_eq = [&](const std::vector<BoundaryPort>& xs,
                         const std::vector<BoundaryPort>& ys) {
    for (const auto& x : xs) {
      auto it = std::find_if(ys.begin(), ys.end(),
                             [&](const BoundaryPort& y) { return y.name == x.name; });
      if (it == ys.end()) return false;
      BoundaryPort lhs = x, rhs = *it;
      if (ignore_capacity) lhs.capacity = rhs.capacity = 0;
      if (!(lhs == rhs)) return false;
    }
    return true;
  };
  return boundary_eq(a.inputs, b.inputs) && boundary_eq(a.outputs, b.outputs);
}

}  // namespace tdf
