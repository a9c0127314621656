#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace canon {

/// Append-only log of reversible mutations. Owners interpret the entries.
struct TrailEntry {
  enum class Kind : uint8_t {
    Suspend,     // a: meta whose waiting list grew by one
    CloseEq,     // a: equation id closed (Open -> Done)
    Assign,      // a: meta assigned
    OpenRemove,  // a: position in the open list, b: meta removed from it
    OpenPush,    // a: meta appended to the open list
  };
  Kind kind;
  uint32_t a = 0;
  uint32_t b = 0;
};

class TrailCorruption : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class Trail {
 public:
  void push(TrailEntry e) { log_.push_back(e); }
  size_t size() const { return log_.size(); }
  const TrailEntry& back() const { return log_.back(); }
  void pop() { log_.pop_back(); }
  bool empty() const { return log_.empty(); }

 private:
  std::vector<TrailEntry> log_;
};

}  // namespace canon
