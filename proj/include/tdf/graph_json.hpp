#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "tdf/composer.hpp"
#include "tdf/graph.hpp"

namespace tdf {

namespace detail {

using nlohmann::json;

inline const json& require(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end())
    throw SchemaError(where + ": missing required key \"" + key + "\"");
  return *it;
}

inline std::string require_string(const json& j, const char* key,
                                  const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_string())
    throw SchemaError(where + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

inline std::int64_t require_int(const json& j, const char* key,
                                const std::string& where) {
  const json& v = require(j, key, where);
  if (!v.is_number_integer())
    throw SchemaError(where + ": \"" + key + "\" must be an integer");
  return v.get<std::int64_t>();
}

inline Endpoint parse_endpoint(const std::string& text, const std::string& where) {
  const auto dot = text.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == text.size() ||
      text.find('.', dot + 1) != std::string::npos)
    throw SchemaError(where + ": \"" + text + "\" is not of the form actor.port");
  return {text.substr(0, dot), text.substr(dot + 1)};
}

inline std::vector<PortSpec> parse_ports(const json& j, const char* key,
                                         const std::string& where) {
  const json& arr = require(j, key, where);
  if (!arr.is_array()) throw SchemaError(where + ": \"" + key + "\" must be an array");
  std::vector<PortSpec> out;
  for (const auto& p : arr) {
    const std::string pw = where + "." + key;
    out.push_back({require_string(p, "name", pw),
                   static_cast<unsigned>(require_int(p, "width_bits", pw))});
  }
  return out;
}

inline ParamMap parse_params(const json& j, const std::string& where) {
  ParamMap params;
  auto it = j.find("params");
  if (it == j.end()) return params;
  if (!it->is_object()) throw SchemaError(where + ": \"params\" must be an object");
  for (const auto& [key, value] : it->items()) {
    if (value.is_number_integer())
      params.emplace(key, value.get<std::int64_t>());
    else if (value.is_string())
      params.emplace(key, value.get<std::string>());
    else
      throw SchemaError(where + ": param \"" + key +
                        "\" must be an integer or a string");
  }
  return params;
}

inline std::vector<BoundaryPort> parse_boundary(const json& j, const char* key,
                                                bool inputs_side,
                                                const std::string& where) {
  const json& arr = require(j, key, where);
  if (!arr.is_array()) throw SchemaError(where + ": \"" + key + "\" must be an array");
  std::vector<BoundaryPort> out;
  for (const auto& b : arr) {
    const std::string bw = where + "." + key;
    BoundaryPort port;
    port.name = require_string(b, "name", bw);
    port.width_bits = static_cast<unsigned>(require_int(b, "width_bits", bw));
    port.attach = parse_endpoint(
        require_string(b, inputs_side ? "dst" : "src", bw + "." + port.name),
        bw + "." + port.name);
    if (auto it = b.find("capacity"); it != b.end())
      port.capacity = it->get<std::size_t>();
    if (auto it = b.find("configs"); it != b.end()) {
      if (!it->is_array()) throw SchemaError(bw + ": \"configs\" must be an array");
      for (const auto& c : *it) port.configs.push_back(c.get<int>());
    }
    if (auto it = b.find("source_name"); it != b.end())
      port.source_name = it->get<std::string>();
    out.push_back(std::move(port));
  }
  return out;
}

inline DataflowGraph parse_base(const json& j) {
  if (!j.is_object()) throw SchemaError("document root must be an object");
  DataflowGraph g;
  g.name = require_string(j, "name", "document");

  const json& actors = require(j, "actors", "document");
  if (!actors.is_array()) throw SchemaError("\"actors\" must be an array");
  for (const auto& a : actors) {
    ActorSpec actor;
    actor.id = require_string(a, "id", "actors[]");
    const std::string where = "actor " + actor.id;
    actor.kind = require_string(a, "kind", where);
    actor.params = parse_params(a, where);
    actor.inputs = parse_ports(a, "inputs", where);
    actor.outputs = parse_ports(a, "outputs", where);
    g.actors.push_back(std::move(actor));
  }

  const json& edges = require(j, "edges", "document");
  if (!edges.is_array()) throw SchemaError("\"edges\" must be an array");
  for (const auto& e : edges) {
    EdgeSpec edge;
    edge.src = parse_endpoint(require_string(e, "src", "edges[]"), "edge src");
    edge.dst = parse_endpoint(require_string(e, "dst", "edges[]"), "edge dst");
    if (auto it = e.find("capacity"); it != e.end()) {
      if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
        throw SchemaError("edge " + edge.src.str() +
                          ": \"capacity\" must be a non-negative integer");
      edge.capacity = it->get<std::size_t>();
    }
    g.edges.push_back(std::move(edge));
  }

  g.inputs = parse_boundary(j, "inputs", true, "document");
  g.outputs = parse_boundary(j, "outputs", false, "document");
  return g;
}

inline json boundary_to_json(const BoundaryPort& b, bool inputs_side) {
  json out{{"name", b.name},
           {"width_bits", b.width_bits},
           {inputs_side ? "dst" : "src", b.attach.str()},
           {"capacity", b.capacity}};
  if (!b.configs.empty()) out["configs"] = b.configs;
  if (!b.source_name.empty()) out["source_name"] = b.source_name;
  return out;
}

inline json base_to_json(const DataflowGraph& g) {
  json j;
  j["name"] = g.name;
  j["actors"] = json::array();
  for (const auto& a : g.actors) {
    json actor{{"id", a.id}, {"kind", a.kind}};
    json params = json::object();
    for (const auto& [key, value] : a.params) {
      if (const auto* i = std::get_if<std::int64_t>(&value))
        params[key] = *i;
      else
        params[key] = std::get<std::string>(value);
    }
    if (!params.empty()) actor["params"] = params;
    auto ports_to_json = [](const std::vector<PortSpec>& ports) {
      json arr = json::array();
      for (const auto& p : ports)
        arr.push_back({{"name", p.name}, {"width_bits", p.width_bits}});
      return arr;
    };
    actor["inputs"] = ports_to_json(a.inputs);
    actor["outputs"] = ports_to_json(a.outputs);
    j["actors"].push_back(std::move(actor));
  }
  j["edges"] = json::array();
  for (const auto& e : g.edges)
    j["edges"].push_back(
        {{"src", e.src.str()}, {"dst", e.dst.str()}, {"capacity", e.capacity}});
  j["inputs"] = json::array();
  for (const auto& b : g.inputs) j["inputs"].push_back(boundary_to_json(b, true));
  j["outputs"] = json::array();
  for (const auto& b : g.outputs) j["outputs"].push_back(boundary_to_json(b, false));
  return j;
}

inline json parse_document(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("document is not valid JSON: ") + e.what());
  }
}

inline bool has_merged_sections(const json& j) {
  return j.is_object() && (j.contains("configs") || j.contains("sboxes") ||
                           j.contains("max_threads"));
}

}  // namespace detail

// Parses a single-application .df.json document. Throws SchemaError for
// malformed documents and ValidationError when a graph invariant is broken.
inline DataflowGraph parse_graph(std::string_view text) {
  const auto j = detail::parse_document(text);
  if (detail::has_merged_sections(j))
    throw SchemaError("document has merged-graph sections; use parse_merged_graph");
  DataflowGraph g = detail::parse_base(j);
  if (auto violations = validate(g); !violations.empty())
    throw ValidationError(std::move(violations));
  return g;
}

// Parses any .df.json document. Plain documents come back with an empty
// config table.
inline MergedGraph parse_merged_graph(std::string_view text) {
  const auto j = detail::parse_document(text);
  MergedGraph m;
  m.base = detail::parse_base(j);
  if (!detail::has_merged_sections(j)) {
    if (auto violations = validate(m.base); !violations.empty())
      throw ValidationError(std::move(violations));
    return m;
  }

  const auto& configs = detail::require(j, "configs", "document");
  if (!configs.is_array()) throw SchemaError("\"configs\" must be an array");
  for (const auto& c : configs)
    m.configs.push_back({static_cast<int>(detail::require_int(c, "id", "configs[]")),
                         detail::require_string(c, "source", "configs[]")});

  const auto& sboxes = detail::require(j, "sboxes", "document");
  if (!sboxes.is_array()) throw SchemaError("\"sboxes\" must be an array");
  for (const auto& s : sboxes) {
    SBoxSpec sb;
    sb.id = detail::require_string(s, "id", "sboxes[]");
    const std::string kind = detail::require_string(s, "kind", "sbox " + sb.id);
    if (kind == "split")
      sb.kind = SBoxSpec::Kind::Split;
    else if (kind == "join")
      sb.kind = SBoxSpec::Kind::Join;
    else
      throw SchemaError("sbox " + sb.id + ": kind must be \"split\" or \"join\"");
    const auto& routes = detail::require(s, "routes", "sbox " + sb.id);
    if (!routes.is_object())
      throw SchemaError("sbox " + sb.id + ": \"routes\" must be an object");
    for (const auto& [key, value] : routes.items()) {
      try {
        sb.routes[std::stoi(key)] = value.get<int>();
      } catch (const std::exception&) {
        throw SchemaError("sbox " + sb.id + ": route key \"" + key +
                          "\" must be a config id");
      }
    }
    m.sboxes.push_back(std::move(sb));
  }

  m.max_threads =
      static_cast<unsigned>(detail::require_int(j, "max_threads", "document"));
  m.tag_width =
      static_cast<unsigned>(detail::require_int(j, "tag_width", "document"));

  if (auto violations = validate_merged(m); !violations.empty())
    throw ValidationError(std::move(violations));
  return m;
}

// Serializes to the canonical .df.json form; parse_graph(serialize_graph(g))
// is structurally equal to g.
inline std::string serialize_graph(const DataflowGraph& g) {
  return detail::base_to_json(g).dump(2) + "\n";
}

inline std::string serialize_merged_graph(const MergedGraph& m) {
  auto j = detail::base_to_json(m.base);
  j["configs"] = nlohmann::json::array();
  for (const auto& c : m.configs)
    j["configs"].push_back({{"id", c.id}, {"source", c.source}});
  j["sboxes"] = nlohmann::json::array();
  for (const auto& sb : m.sboxes) {
    nlohmann::json routes = nlohmann::json::object();
    for (const auto& [config, port] : sb.routes)
      routes[std::to_string(config)] = port;
    j["sboxes"].push_back(
        {{"id", sb.id},
         {"kind", sb.kind == SBoxSpec::Kind::Split ? "split" : "join"},
         {"routes", std::move(routes)}});
  }
  j["max_threads"] = m.max_threads;
  j["tag_width"] = m.tag_width;
  return j.dump(2) + "\n";
}

}  // namespace tdf
