#include "weft/harness/staleness.hpp"

#include <algorithm>

namespace weft::harness {

using runtime::DataEvent;
using runtime::DataOp;

namespace {

struct Write {
  Millis at;
  ae::Stamp version;
};

std::string attr_of(const std::string& key) {
  const auto slash = key.find('/');
  return slash == std::string::npos ? key : key.substr(slash + 1);
}

}  // namespace

std::vector<StalenessSample> staleness_samples(const std::vector<DataEvent>& trace) {
  std::map<std::pair<std::string, std::string>, std::vector<Write>> writes;
  for (const auto& e : trace)
    if (e.op == DataOp::Apply && e.version != ae::Stamp{}) writes[{e.cls, e.key}].push_back({e.at, e.version});
  for (auto& [_, w] : writes)
    std::stable_sort(w.begin(), w.end(), [](const Write& a, const Write& b) { return a.at < b.at; });

  std::vector<StalenessSample> out;
  for (const auto& e : trace) {
    if (e.op != DataOp::Serve) continue;
    StalenessSample s{e.cls, e.key, e.mode, e.dc, e.issued, -1, 0};
    auto it = writes.find({e.cls, e.key});
    if (it != writes.end()) {
      for (const auto& w : it->second) {
        if (w.at > e.issued) break;
        if (w.version > e.version) {
          s.write_at = w.at;
          s.staleness = e.issued - w.at;
          break;
        }
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::map<ConsistencyKind, StalenessStats> summarize(const std::vector<StalenessSample>& samples) {
  std::map<ConsistencyKind, StalenessStats> out;
  std::map<ConsistencyKind, double> sum;
  for (const auto& s : samples) {
    auto& st = out[s.mode];
    st.max = std::max(st.max, s.staleness);
    ++st.samples;
    sum[s.mode] += static_cast<double>(s.staleness);
  }
  for (auto& [m, st] : out) st.mean = sum[m] / static_cast<double>(st.samples);
  return out;
}

std::vector<RywViolation> check_ryw(const std::vector<DataEvent>& trace, const std::map<std::uint64_t, CallWindow>& calls) {
  struct W {
    Millis completed;
    ae::Stamp version;
    std::uint64_t req;
  };
  struct R {
    Millis issued;
    ae::Stamp version;
    std::uint64_t req;
  };
  std::map<std::pair<std::uint64_t, std::string>, std::pair<std::vector<W>, std::vector<R>>> by;
  for (const auto& e : trace) {
    if (e.session == 0) continue;
    auto c = calls.find(e.corr);
    if (c == calls.end()) continue;
    if (e.op == DataOp::SessionWrite && c->second.ok) {
      by[{e.session, e.key}].first.push_back({c->second.completed, e.version, e.corr});
    } else if (e.op == DataOp::SessionRead) {
      by[{e.session, e.key}].second.push_back({c->second.issued, e.version, e.corr});
    }
  }
  std::vector<RywViolation> out;
  for (auto& [sk, wr] : by) {
    auto& [ws, rs] = wr;
    std::stable_sort(ws.begin(), ws.end(), [](const W& a, const W& b) { return a.completed < b.completed; });
    // prefix maximum of versions by completion time
    std::vector<std::size_t> best(ws.size());
    for (std::size_t i = 0; i < ws.size(); ++i)
      best[i] = (i == 0 || ws[i].version > ws[best[i - 1]].version) ? i : best[i - 1];
    for (const auto& r : rs) {
      auto end = std::upper_bound(ws.begin(), ws.end(), r.issued,
                                  [](Millis t, const W& w) { return t < w.completed; });
      if (end == ws.begin()) continue;
      const W& w = ws[best[static_cast<std::size_t>(end - ws.begin()) - 1]];
      if (r.version < w.version) out.push_back({sk.first, sk.second, r.req, w.req});
    }
  }
  return out;
}

std::vector<GateViolation> check_gate(const std::vector<DataEvent>& trace,
                                      const std::vector<model::FlattenedClass>& classes,
                                      const std::map<std::string, std::vector<DcId>>& replicas,
                                      const std::vector<sim::PartitionEvent>& partitions) {
  std::vector<GateViolation> out;
  for (const auto& e : trace) {
    if (e.mode != ConsistencyKind::BoundedStaleness) continue;
    if (e.op != DataOp::Serve && e.op != DataOp::Apply) continue;
    auto c = std::find_if(classes.begin(), classes.end(), [&](const auto& k) { return k.name == e.cls; });
    if (c == classes.end()) continue;
    const auto* a = c->attribute(attr_of(e.key));
    if (!a) continue;
    const Millis delta = a->sla.consistency.delta_ms;
    auto rs = replicas.find(e.cls);
    if (rs == replicas.end()) continue;
    bool cut = false;
    for (const auto& p : partitions) {
      if (e.at < p.start + delta || e.at >= p.end()) continue;
      for (const auto& peer : rs->second)
        if (peer != e.dc && p.separates(e.dc, peer)) cut = true;
    }
    if (cut) out.push_back({e.cls, e.key, e.dc, e.at});
  }
  return out;
}

}  // namespace weft::harness
