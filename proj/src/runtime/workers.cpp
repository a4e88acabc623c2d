#include "weft/runtime/workers.hpp"

#include <algorithm>

namespace weft::runtime {

std::uint32_t reserved_slots(std::uint64_t rps, Millis mean_service_ms) {
  if (rps == 0) return 0;
  const auto svc = static_cast<std::uint64_t>(std::max<Millis>(mean_service_ms, 0));
  return static_cast<std::uint32_t>(std::max<std::uint64_t>(1, (rps * svc + 999) / 1000));
}

namespace {

std::uint32_t sum(const std::map<std::string, std::uint32_t>& m, const std::string& skip = {}) {
  std::uint32_t n = 0;
  for (const auto& [k, v] : m)
    if (k != skip) n += v;
  return n;
}

std::uint32_t get(const std::map<std::string, std::uint32_t>& m, const std::string& k) {
  auto it = m.find(k);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

std::uint32_t CapacityLedger::reserved_total() const { return sum(reserved_); }
std::uint32_t CapacityLedger::elastic_total() const { return sum(elastic_); }
std::uint32_t CapacityLedger::reserved(const std::string& owner) const { return get(reserved_, owner); }
std::uint32_t CapacityLedger::elastic(const std::string& owner) const { return get(elastic_, owner); }

void CapacityLedger::reserve(const std::string& owner, std::uint32_t slots) {
  const auto others = sum(reserved_, owner);
  if (others + slots > capacity_)
    throw Error(Errc::InsufficientCapacity, owner + " needs " + std::to_string(slots) + " slots, " +
                                                std::to_string(capacity_ - others) + " left");
  if (slots == 0) {
    reserved_.erase(owner);
  } else {
    reserved_[owner] = slots;
  }
}

std::uint32_t CapacityLedger::grant_elastic(const std::string& owner, std::uint32_t want) {
  const auto used = sum(reserved_) + sum(elastic_, owner);
  const std::uint32_t left = used >= capacity_ ? 0 : capacity_ - used;
  const auto g = std::min(want, left);
  elastic_[owner] = g;
  return g;
}

void CapacityLedger::release(const std::string& owner) {
  elastic_.erase(owner);
  for (auto it = reserved_.begin(); it != reserved_.end();) {
    if (it->first == owner || it->first.rfind(owner + "/", 0) == 0) {
      it = reserved_.erase(it);
    } else {
      ++it;
    }
  }
}

WorkerPool::~WorkerPool() = default;

std::uint32_t WorkerPool::reserved(const std::string& fn) const {
  std::uint32_t n = 0;
  for (const auto& [_, s] : slots_)
    if (s.owner == fn && !s.retired && !fn.empty()) ++n;
  return n;
}

std::uint32_t WorkerPool::reserved_total() const {
  std::uint32_t n = 0;
  for (const auto& [_, s] : slots_)
    if (!s.owner.empty() && !s.retired) ++n;
  return n;
}

std::size_t WorkerPool::queued() const {
  std::size_t n = queue_.size();
  for (const auto& [_, q] : reserved_queue_) n += q.size();
  return n;
}

void WorkerPool::set_reserved(const std::string& fn, std::uint32_t slots) {
  reap();
  const auto have = reserved(fn);
  if (slots > have) {
    for (auto i = have; i < slots; ++i) {
      const auto id = next_slot_++;
      slots_[id] = Slot{fn, true, false, false};
      free_slot(id);
    }
    return;
  }
  auto drop = have - slots;
  auto& free = free_reserved_[fn];
  while (drop > 0 && !free.empty()) {
    slots_.erase(free.back());
    free.pop_back();
    --drop;
  }
  for (auto& [_, s] : slots_) {
    if (drop == 0) break;
    if (s.owner == fn && s.busy && !s.retired) {
      s.retired = true;
      --drop;
    }
  }
}

void WorkerPool::set_elastic(std::uint32_t slots) {
  reap();
  if (slots < elastic_live_) {
    retire_idle(elastic_live_ - slots);
    elastic_live_ = slots;
    return;
  }
  auto add = slots - elastic_live_;
  elastic_live_ = slots;
  const auto keep = std::min(add, to_retire_);
  to_retire_ -= keep;
  add -= keep;
  for (std::uint32_t i = 0; i < add; ++i) {
    const auto id = next_slot_++;
    slots_[id] = Slot{};
    dispatch_elastic(id);
  }
}

void WorkerPool::retire_idle(std::uint32_t count) {
  while (count > 0 && !free_cold_.empty()) {
    slots_.erase(free_cold_.back());
    free_cold_.pop_back();
    --count;
  }
  while (count > 0 && !free_warm_.empty()) {
    slots_.erase(free_warm_.back());
    free_warm_.pop_back();
    --count;
  }
  to_retire_ += count;
}

bool WorkerPool::take_free_elastic(std::uint64_t& slot) {
  auto& from = !free_warm_.empty() ? free_warm_ : free_cold_;
  if (from.empty()) return false;
  slot = from.back();
  from.pop_back();
  return true;
}

void WorkerPool::reap() {
  const Millis now = loop_.now();
  while (!busy_.empty() && busy_.top().until <= now) {
    const auto id = busy_.top().slot;
    busy_.pop();
    free_slot(id);
  }
}

void WorkerPool::free_slot(std::uint64_t id) {
  auto it = slots_.find(id);
  if (it == slots_.end()) return;
  Slot& s = it->second;
  s.busy = false;
  if (!s.owner.empty()) {
    if (s.retired) {
      slots_.erase(it);
      return;
    }
    auto& q = reserved_queue_[s.owner];
    if (!q.empty()) {
      Job job = std::move(q.front());
      q.pop_front();
      run(id, std::move(job));
    } else {
      free_reserved_[s.owner].push_back(id);
    }
    return;
  }
  if (to_retire_ > 0) {
    --to_retire_;
    slots_.erase(it);
    return;
  }
  dispatch_elastic(id);
}

void WorkerPool::dispatch_elastic(std::uint64_t id) {
  std::deque<Job>* best = queue_.empty() ? nullptr : &queue_;
  for (auto& [_, q] : reserved_queue_) {
    if (q.empty()) continue;
    if (!best || q.front().submitted < best->front().submitted) best = &q;
  }
  if (best) {
    Job job = std::move(best->front());
    best->pop_front();
    run(id, std::move(job));
    return;
  }
  (slots_.at(id).warm ? free_warm_ : free_cold_).push_back(id);
}

void WorkerPool::run(std::uint64_t id, Job job) {
  Slot& s = slots_.at(id);
  s.busy = true;
  Grant g;
  g.slot = id;
  g.reserved = !s.owner.empty();
  g.submitted = job.submitted;
  g.start = loop_.now();
  g.cold_ms = s.warm ? 0 : cold_start_;
  g.end = g.start + g.cold_ms + job.service;
  s.warm = true;
  busy_.push({g.end, id});
  loop_.schedule(g.end, life_.guard([this] { reap(); }));
  if (on_grant) on_grant(job.fn, g);
  job.start(g);
}

Status WorkerPool::submit(const std::string& fn, Millis service_ms, Start start) {
  reap();
  Job job{fn, service_ms, loop_.now(), std::move(start)};
  std::uint64_t slot = 0;
  auto rf = free_reserved_.find(fn);
  const auto rsv = rf != free_reserved_.end() ? reserved(fn) : 0;
  if (rsv > 0) {
    auto& q = reserved_queue_[fn];
    if (q.empty() && !rf->second.empty()) {
      slot = rf->second.back();
      rf->second.pop_back();
      run(slot, std::move(job));
      return {};
    }
    ++window_.arrivals;
    window_.work_ms += service_ms;
    if (q.empty() && take_free_elastic(slot)) {
      run(slot, std::move(job));
      return {};
    }
    if (q.size() >= 10 * static_cast<std::size_t>(rsv)) {
      ++window_.rejected;
      return Status(Errc::NoCapacity, "reserved queue full for " + fn);
    }
    q.push_back(std::move(job));
    return {};
  }
  ++window_.arrivals;
  window_.work_ms += service_ms;
  if (queue_.empty() && take_free_elastic(slot)) {
    run(slot, std::move(job));
    return {};
  }
  if (queue_.size() >= queue_bound() && on_pressure) on_pressure();
  if (queue_.empty() && take_free_elastic(slot)) {
    run(slot, std::move(job));
    return {};
  }
  if (queue_.size() >= queue_bound()) {
    ++window_.rejected;
    return Status(Errc::NoCapacity, "best-effort queue full");
  }
  queue_.push_back(std::move(job));
  return {};
}

PoolWindow WorkerPool::take_window() {
  PoolWindow w = window_;
  window_ = {};
  return w;
}

}  // namespace weft::runtime
