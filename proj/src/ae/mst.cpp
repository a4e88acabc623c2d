#include "weft/ae/mst.hpp"

#include <openssl/evp.h>

namespace weft::ae {

namespace {

bool is_zero(const Hash& h) {
  for (auto b : h)
    if (b) return false;
  return true;
}

void collect_local(const MerkleSearchTree& t, const Hash& h, const std::set<Hash>& shared,
                   std::map<std::string, Hash>& out) {
  if (is_zero(h) || shared.count(h)) return;
  const MstNode* n = t.node(h);
  if (!n) return;
  for (const auto& e : n->entries) out.emplace(e.key, e.value_hash);
  for (const auto& c : n->children) collect_local(t, c, shared, out);
}

}  // namespace

Hash sha256(std::string_view data) {
  Hash out{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr);
  return out;
}

std::string to_hex(const Hash& h) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (auto b : h) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 15]);
  }
  return s;
}

int key_level(std::string_view key) {
  const Hash h = sha256(key);
  int level = 0;
  for (auto b : h) {
    if (b >> 4) return level;
    ++level;
    if (b & 15) return level;
    ++level;
  }
  return level;
}

void encode(ByteWriter& w, const MstNode& n) {
  w.u32(static_cast<std::uint32_t>(n.level)).u32(static_cast<std::uint32_t>(n.entries.size()));
  for (const auto& e : n.entries) {
    w.bytes(e.key);
    w.raw({reinterpret_cast<const char*>(e.value_hash.data()), e.value_hash.size()});
  }
  for (const auto& c : n.children) w.raw({reinterpret_cast<const char*>(c.data()), c.size()});
}

MstNode decode_mst_node(ByteReader& r) {
  auto read_hash = [&r] {
    Hash h{};
    auto raw = r.raw(h.size());
    std::copy(raw.begin(), raw.end(), h.begin());
    return h;
  };
  MstNode n;
  n.level = static_cast<int>(r.u32());
  const auto count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) {
    MstEntry e;
    e.key = r.bytes();
    e.value_hash = read_hash();
    n.entries.push_back(std::move(e));
  }
  for (std::uint32_t i = 0; i <= count; ++i) n.children.push_back(read_hash());
  return n;
}

Hash MstNode::hash() const {
  ByteWriter w;
  encode(w, *this);
  return sha256(w.data());
}

Hash MerkleSearchTree::empty_root() { return sha256(""); }

MerkleSearchTree::MerkleSearchTree() : root_(empty_root()) {}

MerkleSearchTree::MerkleSearchTree(std::map<std::string, Hash> entries) : entries_(std::move(entries)) {
  std::vector<std::pair<const std::string*, int>> keyed;
  keyed.reserve(entries_.size());
  for (const auto& [k, _] : entries_) keyed.emplace_back(&k, key_level(k));
  root_ = keyed.empty() ? empty_root() : build(keyed.cbegin(), keyed.cend());
}

Hash MerkleSearchTree::build(std::vector<std::pair<const std::string*, int>>::const_iterator first,
                             std::vector<std::pair<const std::string*, int>>::const_iterator last) {
  if (first == last) return Hash{};
  int top = 0;
  for (auto it = first; it != last; ++it) top = std::max(top, it->second);
  MstNode n;
  n.level = top;
  auto gap = first;
  for (auto it = first; it != last; ++it) {
    if (it->second != top) continue;
    n.children.push_back(build(gap, it));
    n.entries.push_back({*it->first, entries_.at(*it->first)});
    gap = it + 1;
  }
  n.children.push_back(build(gap, last));
  Hash h = n.hash();
  nodes_.emplace(h, std::move(n));
  return h;
}

const MstNode* MerkleSearchTree::node(const Hash& h) const {
  auto it = nodes_.find(h);
  return it == nodes_.end() ? nullptr : &it->second;
}

MstDiff::MstDiff(const MerkleSearchTree& local, const Hash& remote_root) : local_(local), remote_root_(remote_root) {
  seen_remote_.insert(remote_root);
  if (remote_root != MerkleSearchTree::empty_root() && !local.contains_node(remote_root)) wanted_.push_back(remote_root);
}

void MstDiff::supply(const std::vector<MstNode>& nodes) {
  std::map<Hash, const MstNode*> by_hash;
  for (const auto& n : nodes) by_hash[n.hash()] = &n;
  std::vector<Hash> next;
  for (const auto& h : wanted_) {
    auto it = by_hash.find(h);
    if (it == by_hash.end()) throw Error(Errc::DecodeError, "missing MST node " + to_hex(h));
    ++fetches_;
    const MstNode& n = *it->second;
    for (const auto& e : n.entries) remote_entries_.emplace(e.key, e.value_hash);
    for (const auto& c : n.children) {
      if (is_zero(c) || !seen_remote_.insert(c).second) continue;
      if (!local_.contains_node(c)) next.push_back(c);
    }
  }
  wanted_ = std::move(next);
}

std::set<std::string> MstDiff::divergent() const {
  std::set<std::string> out;
  if (remote_root_ == local_.root()) return out;
  std::map<std::string, Hash> mine;
  collect_local(local_, local_.root(), seen_remote_, mine);
  for (const auto& [k, h] : mine) {
    auto it = remote_entries_.find(k);
    if (it == remote_entries_.end() || it->second != h) out.insert(k);
  }
  for (const auto& [k, h] : remote_entries_)
    if (!mine.count(k)) out.insert(k);
  return out;
}

StatusOr<DiffResult> mst_diff(const MerkleSearchTree& local, const Hash& remote_root, const NodeFetcher& fetch) {
  MstDiff d(local, remote_root);
  while (!d.done()) {
    std::vector<MstNode> got;
    for (const auto& h : d.wanted()) {
      auto n = fetch(h);
      if (!n) return Status(Errc::FetchFailed, "peer unreachable during diff");
      got.push_back(std::move(*n));
    }
    d.supply(got);
  }
  return DiffResult{d.divergent(), d.fetches()};
}

}  // namespace weft::ae
