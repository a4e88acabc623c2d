#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <unordered_set>
#include <vector>

namespace weft::sim {

using Millis = std::int64_t;

struct EventHandle {
  std::uint64_t id = 0;
};

// Single-queue discrete-event core. Events fire in (time, insertion order);
// the clock only moves forward, and only when an event is processed.
class EventLoop {
 public:
  explicit EventLoop(std::uint64_t seed = 0) : rng_(seed) {}
  EventLoop(const EventLoop&) = delete;
  EventLoop& operator=(const EventLoop&) = delete;

  Millis now() const { return now_; }

  // Throws Error(PastTimestamp) when at < now().
  EventHandle schedule(Millis at, std::function<void()> fn);
  EventHandle after(Millis delay, std::function<void()> fn) { return schedule(now_ + delay, std::move(fn)); }
  void cancel(EventHandle h);

  // Processes the next event. Returns false when the queue is empty.
  bool step();
  // Processes every event with time <= t, then sets the clock to t.
  void run_until(Millis t);
  void run();

  bool empty() const { return heap_.size() == cancelled_.size(); }
  std::uint64_t processed() const { return processed_; }

  // The single source of randomness for everything running on this loop.
  std::mt19937_64& rng() { return rng_; }
  Millis uniform(Millis lo, Millis hi);  // inclusive

 private:
  struct Event {
    Millis at;
    std::uint64_t seq;
    std::function<void()> fn;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return a.at != b.at ? a.at > b.at : a.seq > b.seq;
    }
  };

  bool pop(Event& out);

  Millis now_ = 0;
  std::uint64_t next_seq_ = 1;
  std::uint64_t processed_ = 0;
  std::vector<Event> heap_;
  std::unordered_set<std::uint64_t> cancelled_;
  std::mt19937_64 rng_;
};

// Guards callbacks owned by an object that may be destroyed while events it
// scheduled are still queued.
class Lifetime {
 public:
  template <typename F>
  auto guard(F fn) const {
    return [w = std::weak_ptr<int>(token_), fn = std::move(fn)](auto&&... args) mutable {
      if (w.lock()) fn(std::forward<decltype(args)>(args)...);
    };
  }

 private:
  std::shared_ptr<int> token_ = std::make_shared<int>(0);
};

}  // namespace weft::sim
