#include "weft/sim/event_loop.hpp"

#include <algorithm>

#include "weft/common/status.hpp"

namespace weft::sim {

EventHandle EventLoop::schedule(Millis at, std::function<void()> fn) {
  if (at < now_)
    throw Error(Errc::PastTimestamp, "event at " + std::to_string(at) + " scheduled at " + std::to_string(now_));
  const auto seq = next_seq_++;
  heap_.push_back({at, seq, std::move(fn)});
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  return {seq};
}

void EventLoop::cancel(EventHandle h) {
  if (h.id != 0) cancelled_.insert(h.id);
}

bool EventLoop::pop(Event& out) {
  while (!heap_.empty()) {
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Event ev = std::move(heap_.back());
    heap_.pop_back();
    if (auto it = cancelled_.find(ev.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      continue;
    }
    out = std::move(ev);
    return true;
  }
  return false;
}

bool EventLoop::step() {
  Event ev;
  if (!pop(ev)) return false;
  now_ = ev.at;
  ++processed_;
  ev.fn();
  return true;
}

void EventLoop::run_until(Millis t) {
  while (!heap_.empty()) {
    const Event& head = heap_.front();
    if (auto it = cancelled_.find(head.seq); it != cancelled_.end()) {
      cancelled_.erase(it);
      std::pop_heap(heap_.begin(), heap_.end(), Later{});
      heap_.pop_back();
      continue;
    }
    if (head.at > t) break;
    step();
  }
  if (t > now_) now_ = t;
}

void EventLoop::run() {
  while (step()) {
  }
}

Millis EventLoop::uniform(Millis lo, Millis hi) {
  if (hi <= lo) return lo;
  std::uniform_int_distribution<Millis> dist(lo, hi);
  return dist(rng_);
}

}  // namespace weft::sim
