#pragma once

#include <cstdint>
#include <queue>
#include <vector>

namespace chemnet {

// Time-ordered event queue. Equal timestamps dispatch in insertion order,
// which keeps trials deterministic for a given seed.
template <typename Payload>
class EventQueue {
 public:
  struct Entry {
    double at;
    std::uint64_t order;
    Payload payload;
  };

  void push(double at, Payload payload) {
    heap_.push_back(Entry{at, next_order_++, std::move(payload)});
    std::push_heap(heap_.begin(), heap_.end(), later);
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }
  double next_time() const { return heap_.front().at; }

  Entry pop() {
    std::pop_heap(heap_.begin(), heap_.end(), later);
    Entry e = std::move(heap_.back());
    heap_.pop_back();
    return e;
  }

 private:
  static bool later(const Entry& a, const Entry& b) {
    if (a.at != b.at) return a.at > b.at;
    return a.order > b.order;
  }

  std::vector<Entry> heap_;
  std::uint64_t next_order_ = 0;
};

}  // namespace chemnet
