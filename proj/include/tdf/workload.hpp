#pragma once

#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tdf/errors.hpp"
#include "tdf/hex.hpp"

namespace tdf {

// Token stream of one logical thread: the blocks to inject, plus optional
// per-tag directives (configuration id and fixed side inputs such as the
// key, re-injected with every block).
struct TagWorkload {
  unsigned tag = 0;
  std::optional<int> config;
  std::map<std::string, Payload> fixed_inputs;
  std::vector<Payload> blocks;
};

struct Workload {
  std::vector<TagWorkload> tags;

  TagWorkload& tag(unsigned t) {
    for (auto& tw : tags)
      if (tw.tag == t) return tw;
    tags.push_back({.tag = t});
    return tags.back();
  }
  const TagWorkload* find(unsigned t) const {
    for (const auto& tw : tags)
      if (tw.tag == t) return &tw;
    return nullptr;
  }
  std::size_t total_blocks() const {
    std::size_t n = 0;
    for (const auto& tw : tags) n += tw.blocks.size();
    return n;
  }
};

// Parses the workload file format: sections headed by `[tag N]`, one hex
// block per line, `#` comments, and the per-tag directives
// `config <id>` and `key <hex>` (shorthand for `set key <hex>`).
inline Workload parse_workload(std::string_view text) {
  Workload w;
  TagWorkload* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string word;
    if (!(ls >> word)) continue;

    if (word.front() == '[') {
      std::string rest;
      std::getline(ls, rest);
      std::string header = word + rest;
      if (header.size() < 3 || header.back() != ']')
        throw WorkloadError("malformed section header \"" + header + "\"", lineno);
      std::istringstream hs(header.substr(1, header.size() - 2));
      std::string kw;
      long tag = -1;
      hs >> kw >> tag;
      if (kw != "tag" || tag < 0)
        throw WorkloadError("expected [tag N] section header", lineno);
      for (const auto& tw : w.tags)
        if (tw.tag == static_cast<unsigned>(tag))
          throw WorkloadError("duplicate section for tag " + std::to_string(tag),
                              lineno);
      current = &w.tag(static_cast<unsigned>(tag));
      continue;
    }
    if (!current)
      throw WorkloadError("content before the first [tag N] section", lineno);

    if (word == "config") {
      long id = -1;
      if (!(ls >> id) || id < 0)
        throw WorkloadError("config directive needs a non-negative id", lineno);
      current->config = static_cast<int>(id);
      continue;
    }
    if (word == "key" || word == "set") {
      std::string name = "key", hex;
      if (word == "set" && !(ls >> name))
        throw WorkloadError("set directive needs an input name", lineno);
      if (!(ls >> hex)) throw WorkloadError("missing hex payload", lineno);
      try {
        current->fixed_inputs[name] = from_hex(hex);
      } catch (const Error& e) {
        throw WorkloadError(e.what(), lineno);
      }
      continue;
    }
    // Anything else is a block line.
    std::string extra;
    if (ls >> extra)
      throw WorkloadError("unexpected token \"" + extra + "\" after block", lineno);
    try {
      current->blocks.push_back(from_hex(word));
    } catch (const Error& e) {
      throw WorkloadError(e.what(), lineno);
    }
  }
  return w;
}

}  // namespace tdf
