#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tdf/composer.hpp"
#include "tdf/config_registers.hpp"
#include "tdf/errors.hpp"
#include "tdf/graph.hpp"
#include "tdf/kernels.hpp"
#include "tdf/tagged_fifo.hpp"
#include "tdf/token.hpp"
#include "tdf/workload.hpp"

namespace tdf {

struct EngineOptions {
  // Logical threads for plain graphs; merged graphs carry their own count.
  unsigned max_threads = 1;
  // Test-only switch: replace the semi-out-of-order read discipline with
  // strict global FIFO order (readers may only take the overall head).
  bool strict_global_order = false;
};

struct TagMetrics {
  std::uint64_t blocks_in = 0;
  std::uint64_t blocks_out = 0;
  std::optional<std::uint64_t> first_output_cycle;
  std::optional<std::uint64_t> last_output_cycle;
  std::vector<std::uint64_t> latency_cycles;
};

struct EngineMetrics {
  std::uint64_t total_cycles = 0;
  bool deadlock = false;
  bool timed_out = false;
  std::map<unsigned, TagMetrics> per_tag;
};

struct RunResult {
  EngineMetrics metrics;
  // tag -> output name -> payloads in per-tag arrival order
  std::map<unsigned, std::map<std::string, std::vector<Payload>>> outputs;
};

// Executes a (possibly merged) dataflow graph cycle by cycle with tagged
// tokens. Firing rules are tag-matched: an actor fires for a thread only
// when every input offers a head token of that tag and its outputs have
// room, and it tags everything it produces with the consumed tag.
//
// Cycle semantics are two-phase: all firing decisions within a cycle observe
// the state at cycle start, and pushes become visible the next cycle. When
// an actor could fire for several tags in one cycle it serves them
// round-robin starting from (last served tag + 1). Multi-stage actors are
// internal pipelines with initiation interval 1 and latency equal to their
// stage count.
//
// Engine instances are single-threaded and deterministic; "thread" always
// means a tagged token stream, never a host execution thread.
class Engine {
 public:
  Engine(MergedGraph graph, KernelRegistry registry, EngineOptions opt = {})
      : graph_(std::move(graph)), registry_(std::move(registry)), options_(opt) {
    if (auto violations = validate_merged(graph_); !violations.empty())
      throw ValidationError(std::move(violations));
    max_threads_ = graph_.is_merged() ? graph_.max_threads
                                      : std::max(1u, options_.max_threads);
    elaborate();
  }

  Engine(const DataflowGraph& graph, KernelRegistry registry, EngineOptions opt = {})
      : Engine(MergedGraph{.base = graph}, std::move(registry), opt) {}

  unsigned max_threads() const { return max_threads_; }
  std::uint64_t cycle() const { return cycle_; }
  const MergedGraph& graph() const { return graph_; }
  const ConfigRegisterFile& config_registers() const { return registers_; }

  // Writes a thread's configuration register. Takes effect for routing
  // lookups immediately; change a tag's config only while that tag has no
  // tokens in flight.
  void set_config(TagId tag, int config_id) {
    require_tag(tag);
    if (!graph_.is_merged())
      throw ConfigError("graph has no configurations");
    if (!graph_.find_config(config_id))
      throw ConfigError("unknown config id " + std::to_string(config_id));
    registers_.write(tag, config_id);
  }

  // True iff every input of the actor offers a head token tagged t, every
  // output it would write has a free slot, the pipeline has a free entry
  // slot, and (for sboxes) the route for (t, config) is defined. No state
  // change.
  bool can_fire(const std::string& actor_id, TagId t) const {
    const ActorRt& a = actor_rt(actor_id);
    return a.inflight.size() < a.stages && can_fire_rt(a, t);
  }

  // Consumes one head token of tag t from each input, applies the kernel,
  // and enters the result into the actor's pipeline; outputs are pushed as
  // the pipeline drains on subsequent step() calls, tagged t.
  void fire(const std::string& actor_id, TagId t) {
    ActorRt& a = actors_[static_cast<std::size_t>(actor_index(actor_id))];
    if (a.inflight.size() >= a.stages || !can_fire_rt(a, t))
      throw Error("actor " + actor_id + " cannot fire for tag " +
                  std::to_string(t.value));
    do_fire(a, t);
  }

  // One simulated cycle: every actor that can fire for some tag fires at
  // most once, pipelines advance a stage, and completed tokens are pushed
  // (visible next cycle). Returns whether anything fired or advanced.
  //
  // Actors are processed consumers-first (reverse topological order), so a
  // slot freed by a consumer this cycle is writable by its producer in the
  // same cycle, like a combinational ready chain; token data still moves
  // with one-cycle latency because pushes commit at cycle end.
  bool step() {
    bool progress = false;

    for (int idx : processing_order_) {
      ActorRt& a = actors_[static_cast<std::size_t>(idx)];
      if (a.sbox) check_routable(a);

      // The pipeline head drains this cycle if its residence is complete and
      // all sinks have room; deciding this first lets a new firing take the
      // vacated slot in the same cycle (shift-register behaviour).
      const bool will_exit = !a.inflight.empty() &&
                             a.inflight.front().ready_cycle <= cycle_ &&
                             exit_space_ok(a, a.inflight.front());

      std::optional<TagId> pick;
      if (a.inflight.size() - (will_exit ? 1 : 0) < a.stages) {
        for (unsigned i = 1; i <= max_threads_; ++i) {
          const TagId t{(a.last_tag + i) % max_threads_};
          if (can_fire_rt(a, t)) {
            pick = t;
            break;
          }
        }
      }

      if (will_exit) {
        push_outputs(a, a.inflight.front());
        a.inflight.pop_front();
        progress = true;
      }
      if (pick) {
        do_fire(a, *pick);
        progress = true;
      }
      // A firing that completes its residence immediately (single-stage
      // actors) drains in the same cycle, like a register on the output.
      if (!will_exit && !a.inflight.empty()) {
        Flight& front = a.inflight.front();
        if (front.ready_cycle <= cycle_ && exit_space_ok(a, front)) {
          push_outputs(a, front);
          a.inflight.pop_front();
          progress = true;
        }
      }
      for (const Flight& f : a.inflight)
        if (f.ready_cycle > cycle_) {
          progress = true;
          break;
        }
    }

    for (auto& ch : channels_) {
      for (auto& tok : ch.staged) {
        if (!ch.fifo.push(std::move(tok)))
          throw Error("internal: staged push exceeded capacity");
      }
      ch.staged.clear();
    }
    ++cycle_;
    return progress;
  }

  // Pushes a token into a graph input FIFO (visible this cycle). Returns
  // false when the FIFO is full.
  bool offer_input(const std::string& name, Token tok) {
    require_tag(tok.tag);
    auto it = input_channel_.find(name);
    if (it == input_channel_.end()) throw Error("unknown graph input \"" + name + "\"");
    const BoundaryPort* b = graph_.base.find_input(name);
    if (tok.payload.size() != b->width_bits / 8)
      throw Error("input " + name + " takes " + std::to_string(b->width_bits / 8) +
                  "-byte payloads, got " + std::to_string(tok.payload.size()));
    return channels_[it->second].fifo.push(std::move(tok));
  }

  std::optional<Token> take_output(const std::string& name) {
    auto it = output_channel_.find(name);
    if (it == output_channel_.end())
      throw Error("unknown graph output \"" + name + "\"");
    auto& fifo = channels_[it->second].fifo;
    if (fifo.empty()) return std::nullopt;
    return fifo.pop_front();
  }

  FifoStatus input_fifo_status(const std::string& actor_id,
                               const std::string& port) const {
    const ActorRt& a = actor_rt(actor_id);
    const int idx = a.spec->input_index(port);
    if (idx < 0 || a.in_channel[static_cast<std::size_t>(idx)] < 0)
      throw Error("no FIFO feeds " + actor_id + "." + port);
    return channels_[static_cast<std::size_t>(
                         a.in_channel[static_cast<std::size_t>(idx)])]
        .fifo.status();
  }

  // Injects the workload (one block per graph input per cycle per tag while
  // FIFO space allows), steps until all expected outputs are collected, no
  // progress is possible (deadlock), or max_cycles elapse.
  RunResult run(const Workload& workload, std::uint64_t max_cycles = 1'000'000) {
    if (started_) throw Error("engine instance already ran");
    started_ = true;
    if (max_cycles == 0) throw Error("max_cycles must be > 0");

    for (const auto& tw : workload.tags) {
      if (tw.tag >= max_threads_)
        throw ConfigError("workload tag " + std::to_string(tw.tag) +
                          " exceeds max_threads " + std::to_string(max_threads_));
      if (tw.config) set_config(TagId{tw.tag}, *tw.config);
    }
    if (graph_.is_merged())
      for (const auto& tw : workload.tags)
        if (!tw.blocks.empty()) registers_.require(TagId{tw.tag});

    struct Plan {
      unsigned tag;
      std::vector<std::pair<int, const Payload*>> fixed;  // channel, payload
      int block_channel = -1;
      const std::vector<Payload>* blocks = nullptr;
      std::size_t next = 0;
      std::vector<std::uint64_t> inject_cycle;
      std::vector<std::string> active_outputs;
      std::map<std::string, std::size_t> collected;
    };
    std::vector<Plan> plans;
    for (const auto& tw : workload.tags) {
      if (tw.blocks.empty()) continue;
      Plan plan;
      plan.tag = tw.tag;
      plan.blocks = &tw.blocks;
      const int config =
          graph_.is_merged() ? registers_.require(TagId{tw.tag}) : 0;
      std::vector<const BoundaryPort*> open;
      for (const auto& b : graph_.base.inputs) {
        if (graph_.is_merged() && !b.active_in(config)) continue;
        auto fx = tw.fixed_inputs.find(b.name);
        if (fx == tw.fixed_inputs.end())
          fx = tw.fixed_inputs.find(b.original_name());
        if (fx != tw.fixed_inputs.end()) {
          if (fx->second.size() != b.width_bits / 8)
            throw WorkloadError("tag " + std::to_string(tw.tag) + ": input " +
                                b.name + " takes " +
                                std::to_string(b.width_bits / 8) +
                                "-byte payloads");
          plan.fixed.push_back({input_channel_.at(b.name), &fx->second});
        } else {
          open.push_back(&b);
        }
      }
      if (open.size() != 1)
        throw WorkloadError("tag " + std::to_string(tw.tag) + ": expected exactly " +
                            "one block input, found " + std::to_string(open.size()));
      plan.block_channel = input_channel_.at(open.front()->name);
      for (const auto& blk : tw.blocks)
        if (blk.size() != open.front()->width_bits / 8)
          throw WorkloadError("tag " + std::to_string(tw.tag) + ": block is " +
                              std::to_string(blk.size()) + " bytes, input " +
                              open.front()->name + " takes " +
                              std::to_string(open.front()->width_bits / 8));
      for (const auto& b : graph_.base.outputs)
        if (!graph_.is_merged() || b.active_in(config))
          plan.active_outputs.push_back(b.name);
      plans.push_back(std::move(plan));
    }

    RunResult result;
    for (auto& plan : plans) result.metrics.per_tag[plan.tag] = {};

    auto complete = [&] {
      for (const auto& plan : plans) {
        if (plan.next < plan.blocks->size()) return false;
        if (!plan.active_outputs.empty() &&
            result.metrics.per_tag.at(plan.tag).blocks_out < plan.blocks->size())
          return false;
      }
      return true;
    };

    while (true) {
      if (complete()) break;
      if (cycle_ >= max_cycles) {
        result.metrics.timed_out = true;
        break;
      }

      bool injected = false;
      for (auto& plan : plans) {
        if (plan.next >= plan.blocks->size()) continue;
        bool room = channels_[static_cast<std::size_t>(plan.block_channel)]
                        .fifo.free_slots() > 0;
        for (const auto& [ch, payload] : plan.fixed)
          room = room && channels_[static_cast<std::size_t>(ch)].fifo.free_slots() > 0;
        if (!room) continue;
        channels_[static_cast<std::size_t>(plan.block_channel)].fifo.push(
            {(*plan.blocks)[plan.next], TagId{plan.tag}});
        for (const auto& [ch, payload] : plan.fixed)
          channels_[static_cast<std::size_t>(ch)].fifo.push({*payload, TagId{plan.tag}});
        plan.inject_cycle.push_back(cycle_);
        ++plan.next;
        ++result.metrics.per_tag.at(plan.tag).blocks_in;
        injected = true;
      }

      bool collected = false;
      for (const auto& [name, ch] : output_channel_) {
        auto& fifo = channels_[static_cast<std::size_t>(ch)].fifo;
        while (!fifo.empty()) {
          Token tok = fifo.pop_front();
          collected = true;
          result.outputs[tok.tag.value][name].push_back(std::move(tok.payload));
          for (auto& plan : plans) {
            if (plan.tag != tok.tag.value) continue;
            ++plan.collected[name];
            std::size_t done = SIZE_MAX;
            for (const auto& out : plan.active_outputs)
              done = std::min(done, plan.collected.count(out) ? plan.collected[out] : 0);
            auto& tm = result.metrics.per_tag.at(plan.tag);
            while (tm.blocks_out < done && tm.blocks_out < plan.inject_cycle.size()) {
              tm.latency_cycles.push_back(cycle_ -
                                          plan.inject_cycle[tm.blocks_out]);
              ++tm.blocks_out;
              if (!tm.first_output_cycle) tm.first_output_cycle = cycle_;
              tm.last_output_cycle = cycle_;
            }
          }
        }
      }

      if (complete()) break;
      const bool progress = step();
      if (!injected && !collected && !progress) {
        result.metrics.deadlock = true;
        break;
      }
    }
    result.metrics.total_cycles = cycle_;
    return result;
  }

 private:
  static constexpr std::uint64_t kNeverFired = UINT64_MAX;

  struct Channel {
    TaggedFifo fifo;
    std::vector<Token> staged;
    Channel(std::size_t capacity) : fifo(capacity) {}
  };
  struct Sink {
    int channel = -1;
    const BoundaryPort* gate = nullptr;  // boundary output, config-gated
  };
  struct Flight {
    TagId tag;
    std::vector<Payload> outputs;  // per output port; split: routed only
    int routed_port = -1;
    std::uint64_t ready_cycle = 0;
  };
  struct ActorRt {
    const ActorSpec* spec = nullptr;
    const SBoxSpec* sbox = nullptr;
    const KernelFn* kernel = nullptr;
    unsigned stages = 1;
    std::vector<int> in_channel;            // -1 = unconnected
    std::vector<std::vector<Sink>> sinks;   // per output port
    std::deque<Flight> inflight;
    unsigned last_tag = 0;
    std::uint64_t last_fire_cycle = kNeverFired;
  };

  void require_tag(TagId t) const {
    if (t.value >= max_threads_)
      throw ConfigError("tag " + std::to_string(t.value) + " exceeds max_threads " +
                        std::to_string(max_threads_));
  }

  void elaborate() {
    const DataflowGraph& g = graph_.base;
    auto check_width = [](const std::string& what, unsigned bits) {
      if (bits % 8 != 0)
        throw Error(what + ": width " + std::to_string(bits) +
                    " is not byte-aligned; execution needs whole-byte payloads");
    };

    std::map<std::string, int> edge_channel;
    for (const auto& e : g.edges) {
      const ActorSpec* src = g.find_actor(e.src.actor);
      check_width(e.src.str(), src->find_output(e.src.port)->width_bits);
      edge_channel[e.src.str() + ">" + e.dst.str()] =
          static_cast<int>(channels_.size());
      channels_.emplace_back(e.capacity);
    }
    for (const auto& b : g.inputs) {
      check_width("input " + b.name, b.width_bits);
      input_channel_[b.name] = static_cast<int>(channels_.size());
      channels_.emplace_back(b.capacity);
    }
    for (const auto& b : g.outputs) {
      check_width("output " + b.name, b.width_bits);
      output_channel_[b.name] = static_cast<int>(channels_.size());
      channels_.emplace_back(b.capacity);
    }

    for (const auto& spec : g.actors) {
      ActorRt a;
      a.spec = &spec;
      a.sbox = graph_.find_sbox(spec.id);
      a.stages = tdf::stage_count(spec);
      a.last_tag = max_threads_ - 1;
      if (!a.sbox) {
        if (!registry_.contains(spec.kind))
          throw Error("actor " + spec.id + ": kernel kind \"" + spec.kind +
                      "\" is not in the registry");
        if (!is_sbox_kind(spec.kind)) a.kernel = &registry_.at(spec.kind);
      }
      a.in_channel.assign(spec.inputs.size(), -1);
      a.sinks.assign(spec.outputs.size(), {});
      actor_index_[spec.id] = static_cast<int>(actors_.size());
      actors_.push_back(std::move(a));
    }

    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      const auto& e = g.edges[i];
      ActorRt& dst = actors_[static_cast<std::size_t>(actor_index_.at(e.dst.actor))];
      dst.in_channel[static_cast<std::size_t>(dst.spec->input_index(e.dst.port))] =
          edge_channel.at(e.src.str() + ">" + e.dst.str());
      ActorRt& src = actors_[static_cast<std::size_t>(actor_index_.at(e.src.actor))];
      src.sinks[static_cast<std::size_t>(src.spec->output_index(e.src.port))]
          .push_back({edge_channel.at(e.src.str() + ">" + e.dst.str()), nullptr});
    }
    for (const auto& b : g.inputs) {
      ActorRt& dst = actors_[static_cast<std::size_t>(actor_index_.at(b.attach.actor))];
      const int idx = dst.spec->input_index(b.attach.port);
      if (idx < 0) throw Error("input " + b.name + " attaches to missing port");
      dst.in_channel[static_cast<std::size_t>(idx)] = input_channel_.at(b.name);
    }
    for (const auto& b : g.outputs) {
      ActorRt& src = actors_[static_cast<std::size_t>(actor_index_.at(b.attach.actor))];
      const int idx = src.spec->output_index(b.attach.port);
      if (idx < 0) throw Error("output " + b.name + " attaches to missing port");
      src.sinks[static_cast<std::size_t>(idx)].push_back(
          {output_channel_.at(b.name), &b});
    }

    // Consumers-first processing order (reverse topological). Cycles are
    // broken in declaration order; within a cycle those actors see the
    // conservative cycle-start view of their downstream FIFOs.
    std::map<int, std::vector<int>> preds;  // consumer -> producers
    std::map<int, std::size_t> unseen_succ;
    for (const auto& spec : g.actors) unseen_succ[actor_index_.at(spec.id)] = 0;
    for (const auto& e : g.edges) {
      preds[actor_index_.at(e.dst.actor)].push_back(actor_index_.at(e.src.actor));
      ++unseen_succ[actor_index_.at(e.src.actor)];
    }
    std::vector<int> ready;
    for (std::size_t i = 0; i < actors_.size(); ++i)
      if (unseen_succ[static_cast<int>(i)] == 0) ready.push_back(static_cast<int>(i));
    std::vector<bool> placed(actors_.size(), false);
    while (!ready.empty()) {
      std::sort(ready.begin(), ready.end(), std::greater<>());
      const int id = ready.back();
      ready.pop_back();
      if (placed[static_cast<std::size_t>(id)]) continue;
      placed[static_cast<std::size_t>(id)] = true;
      processing_order_.push_back(id);
      for (int p : preds[id])
        if (--unseen_succ[p] == 0) ready.push_back(p);
    }
    for (std::size_t i = 0; i < actors_.size(); ++i)
      if (!placed[i]) processing_order_.push_back(static_cast<int>(i));
  }

  int actor_index(const std::string& id) const {
    auto it = actor_index_.find(id);
    if (it == actor_index_.end()) throw Error("unknown actor \"" + id + "\"");
    return it->second;
  }
  const ActorRt& actor_rt(const std::string& id) const {
    return actors_[static_cast<std::size_t>(actor_index(id))];
  }

  // Ports an sbox uses for tag t under the live registers; nullopt when the
  // tag has no config or the sbox no route (callers treat as not fireable).
  std::optional<int> sbox_port(const ActorRt& a, TagId t) const {
    auto config = registers_.read(t);
    if (!config) return std::nullopt;
    auto it = a.sbox->routes.find(*config);
    if (it == a.sbox->routes.end()) return std::nullopt;
    return it->second;
  }

  // Halts with a diagnostic when a token sits in an sbox input without a
  // defined configuration or route; such tokens could otherwise only pile
  // up into a silent deadlock.
  void check_routable(const ActorRt& a) const {
    for (int ch : a.in_channel) {
      if (ch < 0) continue;
      for (const auto& [tag, n] : channels_[static_cast<std::size_t>(ch)].fifo.status().count) {
        auto config = registers_.read(TagId{tag});
        if (!config)
          throw ConfigError("token with tag " + std::to_string(tag) +
                            " reached sbox " + a.spec->id +
                            " but the tag has no configuration");
        if (!a.sbox->routes.count(*config))
          throw UnroutableToken("sbox " + a.spec->id + " has no route for config " +
                                std::to_string(*config) + " (tag " +
                                std::to_string(tag) + ")");
      }
    }
  }

  bool head_available(const Channel& ch, TagId t) const {
    if (options_.strict_global_order) {
      const Token* front = ch.fifo.front();
      return front && front->tag == t;
    }
    return ch.fifo.head(t) != nullptr;
  }

  // Room for a new firing's eventual output: a free slot in the FIFO itself.
  bool fire_space_ok_ch(const Channel& ch) const {
    return ch.fifo.free_slots() > 0;
  }

  // Room for a push this cycle: a free slot not already taken by a staged
  // push (at most one writer stages into a channel per cycle).
  bool exit_space_ok_ch(const Channel& ch) const {
    return ch.fifo.free_slots() > ch.staged.size();
  }

  bool sink_active(const Sink& sink, TagId t) const {
    if (!sink.gate || sink.gate->configs.empty()) return true;
    auto config = registers_.read(t);
    if (!config)
      throw ConfigError("token with tag " + std::to_string(t.value) +
                        " reached a config-gated output without a configuration");
    return sink.gate->active_in(*config);
  }

  // Conditions (a) input heads of tag t, (b) output room, (c) sbox route;
  // pipeline occupancy is gated by the caller.
  bool can_fire_rt(const ActorRt& a, TagId t) const {
    if (t.value >= max_threads_) return false;
    if (a.last_fire_cycle == cycle_ && a.last_fire_cycle != kNeverFired) return false;

    int join_port = -1, split_port = -1;
    if (a.sbox) {
      auto port = sbox_port(a, t);
      if (!port) return false;
      (a.sbox->kind == SBoxSpec::Kind::Join ? join_port : split_port) = *port;
    }

    if (a.spec->inputs.empty()) return false;
    for (std::size_t i = 0; i < a.in_channel.size(); ++i) {
      if (join_port >= 0 && static_cast<int>(i) != join_port) continue;
      const int ch = a.in_channel[i];
      if (ch < 0 || !head_available(channels_[static_cast<std::size_t>(ch)], t))
        return false;
    }
    for (std::size_t p = 0; p < a.sinks.size(); ++p) {
      if (split_port >= 0 && static_cast<int>(p) != split_port) continue;
      for (const auto& sink : a.sinks[p]) {
        if (!sink_active(sink, t)) continue;
        if (!fire_space_ok_ch(channels_[static_cast<std::size_t>(sink.channel)]))
          return false;
      }
    }
    return true;
  }

  void do_fire(ActorRt& a, TagId t) {
    int join_port = -1, split_port = -1;
    if (a.sbox) {
      auto port = sbox_port(a, t);
      (a.sbox->kind == SBoxSpec::Kind::Join ? join_port : split_port) = *port;
    }

    std::vector<Payload> consumed;
    for (std::size_t i = 0; i < a.in_channel.size(); ++i) {
      if (join_port >= 0 && static_cast<int>(i) != join_port) continue;
      auto& fifo = channels_[static_cast<std::size_t>(a.in_channel[i])].fifo;
      Token tok = options_.strict_global_order ? fifo.pop_front() : fifo.pop(t);
      consumed.push_back(std::move(tok.payload));
    }

    Flight flight;
    flight.tag = t;
    flight.ready_cycle = cycle_ + a.stages - 1;
    if (a.sbox) {
      if (split_port >= 0) {
        flight.outputs.assign(a.spec->outputs.size(), {});
        flight.outputs[static_cast<std::size_t>(split_port)] = std::move(consumed[0]);
        flight.routed_port = split_port;
      } else {
        flight.outputs.push_back(std::move(consumed[0]));
      }
    } else {
      std::vector<Payload> produced;
      try {
        produced = (*a.kernel)(*a.spec, consumed);
      } catch (const KernelError&) {
        throw;
      } catch (const std::exception& e) {
        throw KernelError(a.spec->id + ": " + e.what());
      }
      if (produced.size() != a.spec->outputs.size())
        throw KernelError(a.spec->id + ": kernel produced " +
                          std::to_string(produced.size()) + " payloads for " +
                          std::to_string(a.spec->outputs.size()) + " ports");
      for (std::size_t p = 0; p < produced.size(); ++p)
        if (produced[p].size() != a.spec->outputs[p].width_bits / 8)
          throw KernelError(a.spec->id + "." + a.spec->outputs[p].name +
                            ": kernel produced " + std::to_string(produced[p].size()) +
                            " bytes for a " +
                            std::to_string(a.spec->outputs[p].width_bits / 8) +
                            "-byte port");
      flight.outputs = std::move(produced);
    }
    a.inflight.push_back(std::move(flight));
    a.last_fire_cycle = cycle_;
    a.last_tag = t.value;
  }

  bool exit_space_ok(const ActorRt& a, const Flight& f) const {
    for (std::size_t p = 0; p < a.sinks.size(); ++p) {
      if (f.routed_port >= 0 && static_cast<int>(p) != f.routed_port) continue;
      for (const auto& sink : a.sinks[p]) {
        if (!sink_active(sink, f.tag)) continue;
        if (!exit_space_ok_ch(channels_[static_cast<std::size_t>(sink.channel)]))
          return false;
      }
    }
    return true;
  }

  void push_outputs(ActorRt& a, Flight& f) {
    for (std::size_t p = 0; p < a.sinks.size(); ++p) {
      if (f.routed_port >= 0 && static_cast<int>(p) != f.routed_port) continue;
      for (const auto& sink : a.sinks[p]) {
        if (!sink_active(sink, f.tag)) continue;
        channels_[static_cast<std::size_t>(sink.channel)].staged.push_back(
            {f.outputs[p], f.tag});
      }
    }
  }

  MergedGraph graph_;
  KernelRegistry registry_;
  EngineOptions options_;
  unsigned max_threads_ = 1;
  ConfigRegisterFile registers_;
  std::vector<Channel> channels_;
  std::vector<ActorRt> actors_;
  std::map<std::string, int> actor_index_;
  std::map<std::string, int> input_channel_;
  std::map<std::string, int> output_channel_;
  std::vector<int> processing_order_;
  std::uint64_t cycle_ = 0;
  bool started_ = false;
};

// JSON form of the metrics; supplying a clock period adds derived ns-scale
// figures next to the cycle counts.
inline nlohmann::json metrics_to_json(const EngineMetrics& m,
                                      std::optional<double> clock_period_ns = {}) {
  nlohmann::json j;
  j["total_cycles"] = m.total_cycles;
  j["deadlock"] = m.deadlock;
  j["timed_out"] = m.timed_out;
  if (clock_period_ns) {
    j["clock_period_ns"] = *clock_period_ns;
    j["total_ns"] = static_cast<double>(m.total_cycles) * *clock_period_ns;
  }
  j["per_tag"] = nlohmann::json::object();
  for (const auto& [tag, tm] : m.per_tag) {
    nlohmann::json t;
    t["blocks_in"] = tm.blocks_in;
    t["blocks_out"] = tm.blocks_out;
    if (tm.first_output_cycle) t["first_output_cycle"] = *tm.first_output_cycle;
    if (tm.last_output_cycle) t["last_output_cycle"] = *tm.last_output_cycle;
    t["latency_cycles"] = tm.latency_cycles;
    if (!tm.latency_cycles.empty()) {
      double sum = 0;
      for (auto c : tm.latency_cycles) sum += static_cast<double>(c);
      const double mean = sum / static_cast<double>(tm.latency_cycles.size());
      t["mean_latency_cycles"] = mean;
      if (clock_period_ns) {
        t["mean_latency_ns"] = mean * *clock_period_ns;
        t["first_block_latency_ns"] =
            static_cast<double>(tm.latency_cycles.front()) * *clock_period_ns;
      }
    }
    if (tm.blocks_out > 1 && tm.first_output_cycle && tm.last_output_cycle) {
      const double span = static_cast<double>(*tm.last_output_cycle -
                                              *tm.first_output_cycle);
      t["steady_blocks_per_cycle"] =
          span > 0 ? static_cast<double>(tm.blocks_out - 1) / span : 0.0;
    }
    j["per_tag"][std::to_string(tag)] = std::move(t);
  }
  return j;
}

}  // namespace tdf
