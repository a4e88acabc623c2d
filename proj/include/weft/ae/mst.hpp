#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "weft/common/bytes.hpp"
#include "weft/common/status.hpp"

namespace weft::ae {

using Hash = std::array<std::uint8_t, 32>;

Hash sha256(std::string_view data);
std::string to_hex(const Hash& h);
// Number of leading zero hex digits of sha256(key).
int key_level(std::string_view key);

struct MstEntry {
  std::string key;
  Hash value_hash{};

  friend bool operator==(const MstEntry&, const MstEntry&) = default;
};

// One tree node: keys of a single level, with a (possibly empty) subtree in
// front of each key and one after the last. An all-zero hash marks an empty
// subtree.
struct MstNode {
  int level = 0;
  std::vector<MstEntry> entries;
  std::vector<Hash> children;  // entries.size() + 1

  Hash hash() const;
  friend bool operator==(const MstNode&, const MstNode&) = default;
};

void encode(ByteWriter& w, const MstNode& n);
MstNode decode_mst_node(ByteReader& r);

// Merkle search tree over a key -> value-hash set. The shape depends only on
// the set contents, so equal contents give equal root hashes.
class MerkleSearchTree {
 public:
  MerkleSearchTree();
  explicit MerkleSearchTree(std::map<std::string, Hash> entries);

  const Hash& root() const { return root_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, Hash>& entries() const { return entries_; }
  const MstNode* node(const Hash& h) const;
  bool contains_node(const Hash& h) const { return nodes_.count(h) != 0; }
  std::size_t node_count() const { return nodes_.size(); }

  static Hash empty_root();

 private:
  Hash build(std::vector<std::pair<const std::string*, int>>::const_iterator first,
             std::vector<std::pair<const std::string*, int>>::const_iterator last);

  std::map<std::string, Hash> entries_;
  std::map<Hash, MstNode> nodes_;
  Hash root_{};
};

// Divergence detection against a remote tree known only by its root hash.
// Remote nodes are requested level by level; any remote subtree whose hash
// also appears in the local tree is identical and is never fetched.
//
//   MstDiff d(local, remote_root);
//   while (!d.done()) d.supply(fetch(d.wanted()));
class MstDiff {
 public:
  MstDiff(const MerkleSearchTree& local, const Hash& remote_root);

  bool done() const { return wanted_.empty(); }
  const std::vector<Hash>& wanted() const { return wanted_; }
  // Accepts the nodes for wanted(). Throws Error(DecodeError) if a node is
  // missing or its hash does not match.
  void supply(const std::vector<MstNode>& nodes);

  // Keys whose value hash differs or that exist on one side only.
  std::set<std::string> divergent() const;
  std::size_t fetches() const { return fetches_; }

 private:
  const MerkleSearchTree& local_;
  Hash remote_root_;
  std::vector<Hash> wanted_;
  std::set<Hash> seen_remote_;
  std::map<std::string, Hash> remote_entries_;
  std::size_t fetches_ = 0;
};

struct DiffResult {
  std::set<std::string> keys;
  std::size_t fetches = 0;
};

// Synchronous form. `fetch` returns nullopt when the peer cannot be reached,
// which aborts the diff with FetchFailed.
using NodeFetcher = std::function<std::optional<MstNode>(const Hash&)>;
StatusOr<DiffResult> mst_diff(const MerkleSearchTree& local, const Hash& remote_root, const NodeFetcher& fetch);

}  // namespace weft::ae
