#pragma once

#include <map>
#include <optional>
#include <string>

#include "tdf/errors.hpp"
#include "tdf/token.hpp"

namespace tdf {

// Per-thread configuration registers: each tag maps to the id of the
// configuration its tokens follow through a merged graph. Written through
// the engine API or a workload directive, memory-mapped-register style.
class ConfigRegisterFile {
 public:
  void write(TagId tag, int config_id) { regs_[tag.value] = config_id; }

  std::optional<int> read(TagId tag) const {
    auto it = regs_.find(tag.value);
    if (it == regs_.end()) return std::nullopt;
    return it->second;
  }

  int require(TagId tag) const {
    auto c = read(tag);
    if (!c)
      throw ConfigError("tag " + std::to_string(tag.value) +
                        " has no configuration set");
    return *c;
  }

  const std::map<std::uint32_t, int>& all() const { return regs_; }

 private:
  std::map<std::uint32_t, int> regs_;
};

}  // namespace tdf
