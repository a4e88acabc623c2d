#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "weft/raft/messages.hpp"

namespace weft::raft {

struct SafetyReport {
  std::size_t election_safety = 0;
  std::size_t log_matching = 0;
  std::size_t leader_completeness = 0;
  std::size_t state_machine_safety = 0;
  std::vector<std::string> details;

  bool ok() const { return election_safety + log_matching + leader_completeness + state_machine_safety == 0; }
};

// Collects a run's Raft history and checks the four safety properties on it.
class SafetyChecker {
 public:
  void on_leader(const NodeId& node, Term term, const std::vector<LogEntry>& log);
  void on_commit(Term leader_term, const LogEntry& entry);
  void on_apply(const NodeId& node, const LogEntry& entry);
  // Log snapshots taken at the same instant, one per node.
  void on_logs(const std::map<NodeId, std::vector<LogEntry>>& logs);

  SafetyReport report() const;
  std::size_t elections() const { return elections_.size(); }
  std::size_t commits() const { return committed_.size(); }

 private:
  struct Election {
    NodeId node;
    Term term;
    std::vector<LogEntry> log;
  };

  std::map<Term, std::set<NodeId>> leaders_;
  std::vector<Election> elections_;
  std::map<Index, std::pair<Term, Term>> committed_;  // index -> (entry term, commit term)
  std::map<Index, LogEntry> applied_;
  std::size_t sm_violations_ = 0;
  std::size_t lm_violations_ = 0;
  std::vector<std::string> details_;
};

// True when the two logs satisfy Log Matching.
bool logs_match(const std::vector<LogEntry>& a, const std::vector<LogEntry>& b);

}  // namespace weft::raft
