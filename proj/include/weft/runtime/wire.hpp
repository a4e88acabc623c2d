#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weft/ae/crdt.hpp"
#include "weft/model/class_def.hpp"
#include "weft/raft/node.hpp"
#include "weft/session/session.hpp"

// Runtime and control messages. Every payload starts with a one-byte kind
// followed by ByteWriter fields in declaration order. Object traffic rides
// obj/<class>/<instance>, control traffic ctl/<dc>.
namespace weft::runtime {

using model::DcId;
using model::Millis;

enum class Kind : std::uint8_t {
  Invoke = 0x10,
  InvokeReply = 0x11,
  Create = 0x12,
  Delete = 0x13,
  ObjectReply = 0x14,
  Tombstone = 0x15,
  Describe = 0x16,
  ObjectSync = 0x17,
  ObjectList = 0x18,
  Deploy = 0x60,
  Ack = 0x61,
  Undeploy = 0x62,
  SetReplicas = 0x63,
  Reserve = 0x64,
  Heartbeat = 0x66,
};

// First byte of a payload, or 0 for an empty one.
std::uint8_t kind_of(const Bytes& payload);

// What a datacenter agent needs to start one class runtime.
struct RuntimeSpec {
  model::FlattenedClass cls;
  std::vector<DcId> replicas;      // current replica set, in placement order
  std::vector<DcId> raft_members;  // voting members, fixed at first deployment
  ae::ReplicaId replica_id = 0;
  bool joining = false;  // deployed after the class was already running
  std::map<std::string, std::uint32_t> reserved;  // function -> slots here
  Millis ryw_sync_ms = 1000;
  Millis cold_start_ms = 200;
  std::uint32_t initial_elastic = 1;
  raft::Timings timings;
};

struct InvokeRequest {
  std::uint64_t req = 0;
  std::string reply_topic;
  std::uint64_t instance = 0;
  std::string function;
  Bytes payload;
  std::optional<session::SessionToken> token;
  Millis issued = 0;
};

struct InvokeReply {
  std::uint64_t req = 0;
  Errc code = Errc::Ok;
  std::string message;
  Bytes result;
  std::optional<session::SessionToken> token;
  DcId executed_at;
  Millis arrival = 0;
  Millis start = 0;
  Millis end = 0;
};

// Create, Delete, Tombstone and Describe all carry this body.
struct ObjectOp {
  std::uint64_t req = 0;
  std::string reply_topic;
  std::uint64_t instance = 0;
};

// Object registry handed to a runtime that joins a running class.
struct ObjectList {
  std::vector<std::pair<std::uint64_t, bool>> objects;  // instance, deleted
};

struct ObjectReply {
  std::uint64_t req = 0;
  Errc code = Errc::Ok;
  std::vector<DcId> replicas;
};

struct FunctionStats {
  std::uint64_t arrivals = 0;
  std::uint64_t ok = 0;
  std::uint64_t failed = 0;
  std::uint64_t rejected = 0;

  friend bool operator==(const FunctionStats&, const FunctionStats&) = default;
};

struct Heartbeat {
  std::string cls;
  DcId dc;
  Millis at = 0;
  std::map<std::string, FunctionStats> functions;  // since the previous heartbeat
  std::uint32_t elastic = 0;
  std::uint32_t reserved = 0;
};

struct DeployMsg {
  std::uint64_t seq = 0;
  DcId control;
  RuntimeSpec spec;
};

// Answer to Deploy and Reserve.
struct AckMsg {
  std::uint64_t seq = 0;
  std::string cls;
  DcId dc;
  Errc code = Errc::Ok;
  std::string message;
};

struct SetReplicasMsg {
  std::string cls;
  std::vector<DcId> replicas;
};

struct ReserveMsg {
  std::uint64_t seq = 0;
  DcId control;
  std::string cls;
  std::string function;
  std::uint32_t slots = 0;
};

Bytes encode(const InvokeRequest& m);
Bytes encode(const InvokeReply& m);
Bytes encode(Kind kind, const ObjectOp& m);
Bytes encode(const ObjectReply& m);
Bytes encode(const ObjectList& m);
Bytes encode(const Heartbeat& m);
Bytes encode(const DeployMsg& m);
Bytes encode(const AckMsg& m);
Bytes encode_undeploy(const std::string& cls);
Bytes encode(const SetReplicasMsg& m);
Bytes encode(const ReserveMsg& m);

// Decoders expect the kind byte to be consumed already. Malformed input
// throws Error(DecodeError).
InvokeRequest decode_invoke(ByteReader& r);
InvokeReply decode_invoke_reply(ByteReader& r);
ObjectOp decode_object_op(ByteReader& r);
ObjectReply decode_object_reply(ByteReader& r);
ObjectList decode_object_list(ByteReader& r);
Heartbeat decode_heartbeat(ByteReader& r);
DeployMsg decode_deploy(ByteReader& r);
AckMsg decode_ack(ByteReader& r);
std::string decode_undeploy(ByteReader& r);
SetReplicasMsg decode_set_replicas(ByteReader& r);
ReserveMsg decode_reserve(ByteReader& r);

void encode(ByteWriter& w, const RuntimeSpec& s);
RuntimeSpec decode_runtime_spec(ByteReader& r);

// Trigger event payload: source name, event kind name, object id.
Bytes encode_event(const std::string& source, model::TriggerEvent event, const model::ObjectId& obj);

}  // namespace weft::runtime
