#include "weft/sim/network.hpp"

#include <algorithm>

#include "weft/common/status.hpp"

namespace weft::sim {

void Network::add_datacenter(const DcId& dc) {
  if (has(dc)) return;
  const auto n = names_.size();
  std::vector<Link> grown((n + 1) * (n + 1));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) grown[a * (n + 1) + b] = links_[a * n + b];
  links_ = std::move(grown);
  names_.push_back(dc);
  index_[dc] = n;
  up_.push_back(true);
  link(n, n).latency = intra_latency_;
}

std::size_t Network::idx(const DcId& dc) const {
  auto it = index_.find(dc);
  if (it == index_.end()) throw Error(Errc::UnknownDatacenter, dc);
  return it->second;
}

void Network::set_latency(const DcId& a, const DcId& b, Millis one_way) {
  if (one_way < 0) throw Error(Errc::InvalidArgument, "negative latency");
  const auto ia = idx(a), ib = idx(b);
  link(ia, ib).latency = one_way;
  link(ib, ia).latency = one_way;
}

Millis Network::latency(const DcId& a, const DcId& b) const {
  const auto ia = idx(a), ib = idx(b);
  if (ia == ib) return intra_latency_;
  return link(ia, ib).latency;
}

void Network::set_jitter(Millis max_ms, bool include_intra) {
  jitter_ = std::max<Millis>(0, max_ms);
  jitter_intra_ = include_intra;
}

void Network::set_link_rate(const DcId& a, const DcId& b, std::uint64_t msgs_per_sec) {
  const auto ia = idx(a), ib = idx(b);
  const std::uint64_t cost = msgs_per_sec == 0 ? 0 : (1'000'000 + msgs_per_sec - 1) / msgs_per_sec;
  link(ia, ib).cost_us = cost;
  link(ib, ia).cost_us = cost;
}

void Network::inject_partition(const PartitionEvent& p) {
  if (p.group_a.empty() || p.group_b.empty()) throw Error(Errc::InvalidPartition, "empty partition group");
  if (p.duration <= 0) throw Error(Errc::InvalidPartition, "partition duration must be positive");
  if (p.start < loop_.now()) throw Error(Errc::InvalidPartition, "partition starts in the past");
  for (const auto& dc : p.group_a) {
    idx(dc);
    if (p.group_b.count(dc)) throw Error(Errc::InvalidPartition, "partition groups overlap on " + dc);
  }
  for (const auto& dc : p.group_b) idx(dc);
  for (const auto& q : partitions_) {
    if (p.start >= q.end() || q.start >= p.end()) continue;
    for (const auto& a : p.group_a)
      for (const auto& b : p.group_b)
        if (q.separates(a, b))
          throw Error(Errc::OverlapWithExistingPartition, "link " + a + "<->" + b + " already partitioned");
  }
  partitions_.push_back(p);
}

bool Network::separated(const DcId& a, const DcId& b, Millis t) const {
  if (a == b) return false;
  for (const auto& p : partitions_)
    if (t >= p.start && t < p.end() && p.separates(a, b)) return true;
  return false;
}

bool Network::link_up_during(const DcId& a, const DcId& b, Millis from, Millis to) const {
  if (a == b) return true;
  for (const auto& p : partitions_)
    if (p.start <= to && from < p.end() && p.separates(a, b)) return false;
  return true;
}

bool Network::partition_active(Millis t) const {
  return std::any_of(partitions_.begin(), partitions_.end(),
                     [t](const auto& p) { return t >= p.start && t < p.end(); });
}

void Network::set_up(const DcId& dc, bool up) { up_[idx(dc)] = up; }

void Network::schedule_outage(const Outage& o) {
  idx(o.dc);
  if (o.duration <= 0) throw Error(Errc::InvalidArgument, "outage duration must be positive");
  outages_.push_back(o);
  loop_.schedule(o.start, [this, dc = o.dc] { set_up(dc, false); });
  loop_.schedule(o.start + o.duration, [this, dc = o.dc] { set_up(dc, true); });
}

bool Network::is_up(const DcId& dc) const { return up_[idx(dc)]; }

bool Network::reachable(const DcId& a, const DcId& b) const {
  return is_up(a) && is_up(b) && !separated(a, b, loop_.now());
}

std::uint64_t Network::subscribe(const DcId& dc, std::string topic_prefix, Handler handler) {
  const auto id = next_sub_++;
  subs_.push_back({id, idx(dc), std::move(topic_prefix), std::move(handler)});
  return id;
}

void Network::unsubscribe(std::uint64_t id) {
  for (auto& s : subs_)
    if (s.id == id) s.handler = nullptr;
}

void Network::send(Envelope env) {
  const auto is = idx(env.src), id = idx(env.dst);
  env.send_time = loop_.now();
  ++stats_.sent;
  if (!up_[is] || separated(env.src, env.dst, env.send_time)) {
    ++stats_.dropped;
    return;
  }
  Link& l = link(is, id);
  Millis depart = env.send_time;
  if (l.cost_us > 0) {
    const std::int64_t now_us = env.send_time * 1000;
    const std::int64_t start_us = std::max(now_us, l.free_at_us);
    l.free_at_us = start_us + static_cast<std::int64_t>(l.cost_us);
    depart = (l.free_at_us + 999) / 1000;
  }
  Millis arrive = depart + (is == id ? intra_latency_ : l.latency);
  if (jitter_ > 0 && (is != id || jitter_intra_)) arrive += loop_.uniform(0, jitter_);
  arrive = std::max(arrive, l.last_delivery);
  l.last_delivery = arrive;
  loop_.schedule(arrive, [this, env = std::move(env), arrive]() { deliver(env, arrive); });
}

void Network::mix(std::string_view bytes) {
  for (unsigned char c : bytes) {
    digest_ ^= c;
    digest_ *= 1099511628211ull;
  }
}

void Network::deliver(const Envelope& env, Millis deliver_at) {
  const auto id = idx(env.dst);
  if (!up_[id] || !link_up_during(env.src, env.dst, env.send_time, deliver_at)) {
    ++stats_.dropped;
    return;
  }
  ++stats_.delivered;
  mix(std::to_string(deliver_at));
  mix(env.src);
  mix(env.dst);
  mix(env.topic);
  mix(env.payload);
  if (on_deliver) on_deliver(env, deliver_at);
  // Handlers may subscribe while we dispatch; walk by index.
  for (std::size_t i = 0; i < subs_.size(); ++i) {
    if (subs_[i].dc != id || !subs_[i].handler) continue;
    if (env.topic.compare(0, subs_[i].prefix.size(), subs_[i].prefix) != 0) continue;
    auto h = subs_[i].handler;  // the handler may unsubscribe itself
    h(env);
  }
}

}  // namespace weft::sim
