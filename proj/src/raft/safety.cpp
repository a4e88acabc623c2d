#include "weft/raft/safety.hpp"

#include <algorithm>

namespace weft::raft {

bool logs_match(const std::vector<LogEntry>& a, const std::vector<LogEntry>& b) {
  const std::size_t n = std::min(a.size(), b.size());
  std::size_t last_same_term = 0;
  for (std::size_t i = n; i > 0; --i) {
    if (a[i - 1].term == b[i - 1].term) {
      last_same_term = i;
      break;
    }
  }
  for (std::size_t i = 0; i < last_same_term; ++i)
    if (!(a[i] == b[i])) return false;
  return true;
}

void SafetyChecker::on_leader(const NodeId& node, Term term, const std::vector<LogEntry>& log) {
  leaders_[term].insert(node);
  elections_.push_back({node, term, log});
}

void SafetyChecker::on_commit(Term leader_term, const LogEntry& entry) {
  auto [it, inserted] = committed_.try_emplace(entry.index, entry.term, leader_term);
  if (!inserted) {
    if (it->second.first != entry.term) {
      ++sm_violations_;
      details_.push_back("index " + std::to_string(entry.index) + " committed with two terms");
    }
    it->second.second = std::min(it->second.second, leader_term);
  }
}

void SafetyChecker::on_apply(const NodeId& node, const LogEntry& entry) {
  auto [it, inserted] = applied_.try_emplace(entry.index, entry);
  if (!inserted && !(it->second == entry)) {
    ++sm_violations_;
    details_.push_back(node + " applied a different command at index " + std::to_string(entry.index));
  }
}

void SafetyChecker::on_logs(const std::map<NodeId, std::vector<LogEntry>>& logs) {
  for (auto a = logs.begin(); a != logs.end(); ++a)
    for (auto b = std::next(a); b != logs.end(); ++b)
      if (!logs_match(a->second, b->second)) {
        ++lm_violations_;
        details_.push_back("logs of " + a->first + " and " + b->first + " diverge below a matching entry");
      }
}

SafetyReport SafetyChecker::report() const {
  SafetyReport r;
  r.details = details_;
  r.state_machine_safety = sm_violations_;
  r.log_matching = lm_violations_;
  for (const auto& [term, nodes] : leaders_)
    if (nodes.size() > 1) {
      ++r.election_safety;
      r.details.push_back("term " + std::to_string(term) + " has " + std::to_string(nodes.size()) + " leaders");
    }
  for (std::size_t i = 0; i < elections_.size(); ++i)
    for (std::size_t j = i + 1; j < elections_.size(); ++j)
      if (!logs_match(elections_[i].log, elections_[j].log)) {
        ++r.log_matching;
        r.details.push_back("leader logs of terms " + std::to_string(elections_[i].term) + " and " +
                            std::to_string(elections_[j].term) + " diverge");
      }
  for (const auto& e : elections_)
    for (const auto& [index, terms] : committed_) {
      if (terms.second >= e.term) continue;
      if (index > e.log.size() || e.log[index - 1].term != terms.first) {
        ++r.leader_completeness;
        r.details.push_back("leader " + e.node + " of term " + std::to_string(e.term) + " misses committed index " +
                            std::to_string(index));
      }
    }
  return r;
}

}  // namespace weft::raft
