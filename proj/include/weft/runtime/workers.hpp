#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <queue>
#include <string>
#include <vector>

#include "weft/common/status.hpp"
#include "weft/sim/event_loop.hpp"

namespace weft::runtime {

using Millis = std::int64_t;

// Slots for a function with a throughput floor: ceil(rps * service / 1000),
// at least one when rps > 0.
std::uint32_t reserved_slots(std::uint64_t rps, Millis mean_service_ms);

struct ReservationPlan {
  std::map<std::string, std::uint32_t> slots;
  std::uint64_t rps = 0;
  Millis mean_service_ms = 0;

  bool empty() const { return slots.empty(); }
};

// Worker slots available in one datacenter, shared by every class runtime
// placed there. Reserved slots are held exclusively; elastic grants fill
// whatever the reservations leave.
class CapacityLedger {
 public:
  explicit CapacityLedger(std::uint32_t capacity) : capacity_(capacity) {}

  std::uint32_t capacity() const { return capacity_; }
  std::uint32_t reserved_total() const;
  std::uint32_t elastic_total() const;
  std::uint32_t reserved(const std::string& owner) const;
  std::uint32_t elastic(const std::string& owner) const;

  // Sets `owner`'s reservation. Throws Error(InsufficientCapacity) when the
  // other reservations leave fewer than `slots`.
  void reserve(const std::string& owner, std::uint32_t slots);
  // Sets `owner`'s elastic share to as much of `want` as is left over by the
  // reservations and the other owners' elastic shares.
  std::uint32_t grant_elastic(const std::string& owner, std::uint32_t want);
  void release(const std::string& owner);

 private:
  std::uint32_t capacity_;
  std::map<std::string, std::uint32_t> reserved_;
  std::map<std::string, std::uint32_t> elastic_;
};

struct Grant {
  std::uint64_t slot = 0;
  bool reserved = false;  // a slot reserved for this function
  Millis submitted = 0;
  Millis start = 0;
  Millis cold_ms = 0;
  Millis end = 0;  // slot released
};

// Demand seen since the previous take_window().
struct PoolWindow {
  std::uint64_t arrivals = 0;  // jobs that needed an elastic slot
  Millis work_ms = 0;          // their summed service time
  std::uint64_t rejected = 0;
};

// Worker slots of one class runtime on the virtual clock. A job holds its slot
// for cold start (first use of a non-pre-warmed slot) plus service time.
// Reserved functions use their own slots first, then elastic ones; other
// functions only elastic ones. Jobs that cannot start wait in FIFO order; the
// best-effort queue holds at most 10 x max(1, elastic slots) jobs.
class WorkerPool {
 public:
  using Start = std::function<void(const Grant&)>;

  WorkerPool(sim::EventLoop& loop, Millis cold_start_ms) : loop_(loop), cold_start_(cold_start_ms) {}
  ~WorkerPool();
  WorkerPool(const WorkerPool&) = delete;
  WorkerPool& operator=(const WorkerPool&) = delete;

  void set_reserved(const std::string& fn, std::uint32_t slots);
  std::uint32_t reserved(const std::string& fn) const;
  std::uint32_t reserved_total() const;
  void set_elastic(std::uint32_t slots);
  std::uint32_t elastic() const { return elastic_live_; }
  std::size_t queue_bound() const { return 10 * std::max<std::size_t>(1, elastic_live_); }
  std::size_t queued() const;
  std::size_t busy() const { return busy_.size(); }

  // `start` runs when the job gets a slot, possibly immediately. NoCapacity
  // when the queue it would join is full.
  Status submit(const std::string& fn, Millis service_ms, Start start);

  PoolWindow take_window();

  // Called when the best-effort queue is full, before rejecting; may grow
  // the elastic slots.
  std::function<void()> on_pressure;

  // Every grant, for slot accounting audits.
  std::function<void(const std::string& fn, const Grant&)> on_grant;

 private:
  struct Slot {
    std::string owner;  // empty: elastic
    bool warm = false;
    bool busy = false;
    bool retired = false;
  };
  struct Job {
    std::string fn;
    Millis service = 0;
    Millis submitted = 0;
    Start start;
  };
  struct Busy {
    Millis until;
    std::uint64_t slot;
    bool operator>(const Busy& o) const { return until != o.until ? until > o.until : slot > o.slot; }
  };

  void reap();
  void run(std::uint64_t slot, Job job);
  void dispatch_elastic(std::uint64_t slot);
  bool take_free_elastic(std::uint64_t& slot);
  void free_slot(std::uint64_t slot);
  void retire_idle(std::uint32_t count);

  sim::EventLoop& loop_;
  Millis cold_start_;
  std::map<std::uint64_t, Slot> slots_;
  std::uint64_t next_slot_ = 1;
  std::map<std::string, std::vector<std::uint64_t>> free_reserved_;
  std::vector<std::uint64_t> free_warm_;
  std::vector<std::uint64_t> free_cold_;
  std::uint32_t elastic_live_ = 0;
  std::uint32_t to_retire_ = 0;  // busy elastic slots to drop when released
  std::priority_queue<Busy, std::vector<Busy>, std::greater<>> busy_;
  std::map<std::string, std::deque<Job>> reserved_queue_;
  std::deque<Job> queue_;
  PoolWindow window_;
  sim::Lifetime life_;
};

}  // namespace weft::runtime
