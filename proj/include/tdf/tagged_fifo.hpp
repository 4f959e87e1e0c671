#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>

#include "tdf/errors.hpp"
#include "tdf/token.hpp"

namespace tdf {

// Snapshot of a TaggedFifo: per-tag head availability and counts, plus the
// remaining free slots. counts sum + free_slots == capacity.
struct FifoStatus {
  std::map<std::uint32_t, bool> head_available;
  std::map<std::uint32_t, std::size_t> count;
  std::size_t free_slots = 0;

  std::size_t count_of(TagId t) const {
    auto it = count.find(t.value);
    return it == count.end() ? 0 : it->second;
  }
};

// Bounded channel holding tokens of several threads. Capacity is shared
// across tags; the store keeps arrival order, and reads are semi-out-of-order:
// a reader may take the oldest token of any chosen tag, which preserves
// per-tag FIFO order while letting threads overtake each other.
//
// Equivalent to the two-memory organization (token store + order record):
// the deque is the order record and carries the tokens inline.
class TaggedFifo {
 public:
  explicit TaggedFifo(std::size_t capacity) : capacity_(capacity) {}

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return store_.size(); }
  bool empty() const { return store_.empty(); }
  std::size_t free_slots() const { return capacity_ - store_.size(); }

  // Appends the token if a slot is free. Backpressure is a value: a full
  // FIFO returns false and leaves the state unchanged.
  bool push(Token tok) {
    if (store_.size() >= capacity_) return false;
    store_.push_back(std::move(tok));
    return true;
  }

  // Oldest token of tag t, if any.
  const Token* head(TagId t) const {
    for (const auto& tok : store_)
      if (tok.tag == t) return &tok;
    return nullptr;
  }

  // Oldest token overall (the strict global head).
  const Token* front() const { return store_.empty() ? nullptr : &store_.front(); }

  // Removes and returns the oldest token of tag t; the relative order of all
  // other tokens is unchanged. Throws EmptyForTag when no such token exists.
  Token pop(TagId t) {
    for (auto it = store_.begin(); it != store_.end(); ++it) {
      if (it->tag == t) {
        Token tok = std::move(*it);
        store_.erase(it);
        return tok;
      }
    }
    throw EmptyForTag("no token with tag " + std::to_string(t.value));
  }

  // Removes and returns the global head regardless of tag.
  Token pop_front() {
    if (store_.empty()) throw EmptyForTag("fifo is empty");
    Token tok = std::move(store_.front());
    store_.pop_front();
    return tok;
  }

  std::size_t count(TagId t) const {
    std::size_t n = 0;
    for (const auto& tok : store_) n += tok.tag == t;
    return n;
  }

  FifoStatus status() const {
    FifoStatus s;
    s.free_slots = free_slots();
    for (const auto& tok : store_) {
      auto [it, inserted] = s.count.try_emplace(tok.tag.value, 0);
      ++it->second;
      s.head_available[tok.tag.value] = true;
    }
    return s;
  }

 private:
  std::size_t capacity_;
  std::deque<Token> store_;
};

}  // namespace tdf
