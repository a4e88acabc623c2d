#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "weft/common/bytes.hpp"
#include "weft/sim/event_loop.hpp"

namespace weft::sim {

using DcId = std::string;

struct Envelope {
  DcId src;
  DcId dst;
  std::string topic;
  Bytes payload;
  Millis send_time = 0;
};

struct PartitionEvent {
  std::set<DcId> group_a;
  std::set<DcId> group_b;
  Millis start = 0;
  Millis duration = 0;

  Millis end() const { return start + duration; }
  bool separates(const DcId& a, const DcId& b) const {
    return (group_a.count(a) && group_b.count(b)) || (group_a.count(b) && group_b.count(a));
  }
};

struct Outage {
  DcId dc;
  Millis start = 0;
  Millis duration = 0;
};

struct NetworkStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

// Message delivery between datacenters on a shared virtual clock.
//
// A message sent at t over a link with one-way latency L (plus jitter, plus
// any queueing on a rate-limited link) is delivered at its arrival time d
// unless a partition separates the endpoints at any instant of [t, d], or
// the destination is down at d. Delivery between a fixed (src, dst) pair is
// FIFO.
class Network {
 public:
  using Handler = std::function<void(const Envelope&)>;

  explicit Network(EventLoop& loop) : loop_(loop) {}
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  EventLoop& loop() { return loop_; }
  Millis now() const { return loop_.now(); }

  void add_datacenter(const DcId& dc);
  bool has(const DcId& dc) const { return index_.count(dc) != 0; }
  const std::vector<DcId>& datacenters() const { return names_; }

  void set_latency(const DcId& a, const DcId& b, Millis one_way);  // symmetric
  Millis latency(const DcId& a, const DcId& b) const;
  void set_intra_latency(Millis ms) { intra_latency_ = ms; }
  // Uniform extra delay in [0, max_ms] per message; cross-DC links only unless
  // include_intra is set.
  void set_jitter(Millis max_ms, bool include_intra = false);
  // Serialises messages on the a<->b link at msgs_per_sec in each direction.
  void set_link_rate(const DcId& a, const DcId& b, std::uint64_t msgs_per_sec);

  // Throws Error(InvalidPartition) for empty/overlapping groups, unknown
  // datacenters, duration <= 0 or a start in the past; throws
  // Error(OverlapWithExistingPartition) when an existing partition already
  // cuts one of the same links during an overlapping window.
  void inject_partition(const PartitionEvent& p);
  const std::vector<PartitionEvent>& partitions() const { return partitions_; }
  bool separated(const DcId& a, const DcId& b, Millis t) const;
  bool link_up_during(const DcId& a, const DcId& b, Millis from, Millis to) const;
  // True while any partition is active at t.
  bool partition_active(Millis t) const;

  // Crash-stop with recovery: a down datacenter neither sends nor receives.
  void set_up(const DcId& dc, bool up);
  void schedule_outage(const Outage& o);
  const std::vector<Outage>& outages() const { return outages_; }
  bool is_up(const DcId& dc) const;
  // Ground-truth reachability right now.
  bool reachable(const DcId& a, const DcId& b) const;

  std::uint64_t subscribe(const DcId& dc, std::string topic_prefix, Handler handler);
  void unsubscribe(std::uint64_t id);

  // Throws Error(UnknownDatacenter) for unregistered endpoints.
  void send(Envelope env);

  const NetworkStats& stats() const { return stats_; }
  // Order-sensitive digest over every delivered envelope.
  std::uint64_t trace_digest() const { return digest_; }

  // Observes every delivered envelope before the subscribers see it.
  std::function<void(const Envelope&, Millis)> on_deliver;

 private:
  struct Subscription {
    std::uint64_t id;
    std::size_t dc;
    std::string prefix;
    Handler handler;
  };
  struct Link {
    Millis latency = 0;
    std::uint64_t cost_us = 0;  // 0 = unlimited rate
    std::int64_t free_at_us = 0;
    Millis last_delivery = 0;
  };

  std::size_t idx(const DcId& dc) const;
  Link& link(std::size_t a, std::size_t b) { return links_[a * names_.size() + b]; }
  const Link& link(std::size_t a, std::size_t b) const { return links_[a * names_.size() + b]; }
  void deliver(const Envelope& env, Millis deliver_at);
  void mix(std::string_view bytes);

  EventLoop& loop_;
  std::vector<DcId> names_;
  std::map<DcId, std::size_t> index_;
  std::vector<Link> links_;
  std::vector<bool> up_;
  Millis intra_latency_ = 0;
  Millis jitter_ = 0;
  bool jitter_intra_ = false;
  std::vector<PartitionEvent> partitions_;
  std::vector<Outage> outages_;
  std::vector<Subscription> subs_;
  std::uint64_t next_sub_ = 1;
  NetworkStats stats_;
  std::uint64_t digest_ = 1469598103934665603ull;
};

}  // namespace weft::sim
