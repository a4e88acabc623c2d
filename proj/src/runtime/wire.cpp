#include "weft/runtime/wire.hpp"

#include <json.hpp>

#include "weft/model/io.hpp"
#include "weft/model/validate.hpp"

namespace weft::runtime {

namespace {

void put_strings(ByteWriter& w, const std::vector<std::string>& v) {
  w.u32(static_cast<std::uint32_t>(v.size()));
  for (const auto& s : v) w.bytes(s);
}

std::vector<std::string> get_strings(ByteReader& r) {
  std::vector<std::string> v(r.u32());
  for (auto& s : v) s = r.bytes();
  return v;
}

void put_token(ByteWriter& w, const std::optional<session::SessionToken>& t) {
  w.boolean(t.has_value());
  if (t) session::encode(w, *t);
}

std::optional<session::SessionToken> get_token(ByteReader& r) {
  if (!r.boolean()) return std::nullopt;
  return session::decode_token(r);
}

Errc get_code(ByteReader& r) { return static_cast<Errc>(r.u32()); }
void put_code(ByteWriter& w, Errc c) { w.u32(static_cast<std::uint32_t>(c)); }

ByteWriter start(Kind k) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(k));
  return w;
}

}  // namespace

std::uint8_t kind_of(const Bytes& payload) { return payload.empty() ? 0 : static_cast<std::uint8_t>(payload[0]); }

Bytes encode(const InvokeRequest& m) {
  auto w = start(Kind::Invoke);
  w.u64(m.req).bytes(m.reply_topic).u64(m.instance).bytes(m.function).bytes(m.payload);
  put_token(w, m.token);
  w.i64(m.issued);
  return std::move(w).take();
}

InvokeRequest decode_invoke(ByteReader& r) {
  InvokeRequest m;
  m.req = r.u64();
  m.reply_topic = r.bytes();
  m.instance = r.u64();
  m.function = r.bytes();
  m.payload = r.bytes();
  m.token = get_token(r);
  m.issued = r.i64();
  return m;
}

Bytes encode(const InvokeReply& m) {
  auto w = start(Kind::InvokeReply);
  w.u64(m.req);
  put_code(w, m.code);
  w.bytes(m.message).bytes(m.result);
  put_token(w, m.token);
  w.bytes(m.executed_at).i64(m.arrival).i64(m.start).i64(m.end);
  return std::move(w).take();
}

InvokeReply decode_invoke_reply(ByteReader& r) {
  InvokeReply m;
  m.req = r.u64();
  m.code = get_code(r);
  m.message = r.bytes();
  m.result = r.bytes();
  m.token = get_token(r);
  m.executed_at = r.bytes();
  m.arrival = r.i64();
  m.start = r.i64();
  m.end = r.i64();
  return m;
}

Bytes encode(Kind kind, const ObjectOp& m) {
  auto w = start(kind);
  w.u64(m.req).bytes(m.reply_topic).u64(m.instance);
  return std::move(w).take();
}

ObjectOp decode_object_op(ByteReader& r) {
  ObjectOp m;
  m.req = r.u64();
  m.reply_topic = r.bytes();
  m.instance = r.u64();
  return m;
}

Bytes encode(const ObjectList& m) {
  auto w = start(Kind::ObjectList);
  w.u32(static_cast<std::uint32_t>(m.objects.size()));
  for (const auto& [n, deleted] : m.objects) w.u64(n).boolean(deleted);
  return std::move(w).take();
}

ObjectList decode_object_list(ByteReader& r) {
  ObjectList m;
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    const auto inst = r.u64();
    m.objects.emplace_back(inst, r.boolean());
  }
  return m;
}

Bytes encode(const ObjectReply& m) {
  auto w = start(Kind::ObjectReply);
  w.u64(m.req);
  put_code(w, m.code);
  put_strings(w, m.replicas);
  return std::move(w).take();
}

ObjectReply decode_object_reply(ByteReader& r) {
  ObjectReply m;
  m.req = r.u64();
  m.code = get_code(r);
  m.replicas = get_strings(r);
  return m;
}

Bytes encode(const Heartbeat& m) {
  auto w = start(Kind::Heartbeat);
  w.bytes(m.cls).bytes(m.dc).i64(m.at).u32(static_cast<std::uint32_t>(m.functions.size()));
  for (const auto& [f, s] : m.functions) w.bytes(f).u64(s.arrivals).u64(s.ok).u64(s.failed).u64(s.rejected);
  w.u32(m.elastic).u32(m.reserved);
  return std::move(w).take();
}

Heartbeat decode_heartbeat(ByteReader& r) {
  Heartbeat m;
  m.cls = r.bytes();
  m.dc = r.bytes();
  m.at = r.i64();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto f = r.bytes();
    FunctionStats s;
    s.arrivals = r.u64();
    s.ok = r.u64();
    s.failed = r.u64();
    s.rejected = r.u64();
    m.functions[std::move(f)] = s;
  }
  m.elastic = r.u32();
  m.reserved = r.u32();
  return m;
}

void encode(ByteWriter& w, const RuntimeSpec& s) {
  w.bytes(model::class_to_json(model::to_definition(s.cls)).dump());
  put_strings(w, s.replicas);
  put_strings(w, s.raft_members);
  w.u32(s.replica_id).boolean(s.joining).u32(static_cast<std::uint32_t>(s.reserved.size()));
  for (const auto& [f, n] : s.reserved) w.bytes(f).u32(n);
  w.i64(s.ryw_sync_ms).i64(s.cold_start_ms).u32(s.initial_elastic);
  w.i64(s.timings.election_min).i64(s.timings.election_max).i64(s.timings.heartbeat).i64(s.timings.read_timeout);
  w.u64(s.timings.max_batch);
}

RuntimeSpec decode_runtime_spec(ByteReader& r) {
  RuntimeSpec s;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(r.bytes());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::DecodeError, std::string("class document: ") + e.what());
  }
  const auto def = model::class_from_json(j);
  model::HandlerNames handlers;
  for (const auto& f : def.functions) handlers.insert(f.handler);
  s.cls = model::validate_class(def, handlers);
  s.replicas = get_strings(r);
  s.raft_members = get_strings(r);
  s.replica_id = r.u32();
  s.joining = r.boolean();
  const auto n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) {
    auto f = r.bytes();
    s.reserved[std::move(f)] = r.u32();
  }
  s.ryw_sync_ms = r.i64();
  s.cold_start_ms = r.i64();
  s.initial_elastic = r.u32();
  s.timings.election_min = r.i64();
  s.timings.election_max = r.i64();
  s.timings.heartbeat = r.i64();
  s.timings.read_timeout = r.i64();
  s.timings.max_batch = r.u64();
  return s;
}

Bytes encode(const DeployMsg& m) {
  auto w = start(Kind::Deploy);
  w.u64(m.seq).bytes(m.control);
  encode(w, m.spec);
  return std::move(w).take();
}

DeployMsg decode_deploy(ByteReader& r) {
  DeployMsg m;
  m.seq = r.u64();
  m.control = r.bytes();
  m.spec = decode_runtime_spec(r);
  return m;
}

Bytes encode(const AckMsg& m) {
  auto w = start(Kind::Ack);
  w.u64(m.seq).bytes(m.cls).bytes(m.dc);
  put_code(w, m.code);
  w.bytes(m.message);
  return std::move(w).take();
}

AckMsg decode_ack(ByteReader& r) {
  AckMsg m;
  m.seq = r.u64();
  m.cls = r.bytes();
  m.dc = r.bytes();
  m.code = get_code(r);
  m.message = r.bytes();
  return m;
}

Bytes encode_undeploy(const std::string& cls) {
  auto w = start(Kind::Undeploy);
  w.bytes(cls);
  return std::move(w).take();
}

std::string decode_undeploy(ByteReader& r) { return r.bytes(); }

Bytes encode(const SetReplicasMsg& m) {
  auto w = start(Kind::SetReplicas);
  w.bytes(m.cls);
  put_strings(w, m.replicas);
  return std::move(w).take();
}

SetReplicasMsg decode_set_replicas(ByteReader& r) {
  SetReplicasMsg m;
  m.cls = r.bytes();
  m.replicas = get_strings(r);
  return m;
}

Bytes encode(const ReserveMsg& m) {
  auto w = start(Kind::Reserve);
  w.u64(m.seq).bytes(m.control).bytes(m.cls).bytes(m.function).u32(m.slots);
  return std::move(w).take();
}

ReserveMsg decode_reserve(ByteReader& r) {
  ReserveMsg m;
  m.seq = r.u64();
  m.control = r.bytes();
  m.cls = r.bytes();
  m.function = r.bytes();
  m.slots = r.u32();
  return m;
}

Bytes encode_event(const std::string& source, model::TriggerEvent event, const model::ObjectId& obj) {
  ByteWriter w;
  w.bytes(source).bytes(model::trigger_event_name(event)).bytes(obj.to_string());
  return std::move(w).take();
}

}  // namespace weft::runtime
