#include "weft/model/io.hpp"

#include <fstream>

#include "weft/common/status.hpp"

namespace weft::model {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Errc::ScriptError, where + ": " + what);
}

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) bad(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

std::string str(const json& j, const std::string& where) {
  if (!j.is_string()) bad(where, "expected a string");
  return j.get<std::string>();
}

double num(const json& j, const std::string& where) {
  if (!j.is_number()) bad(where, "expected a number");
  return j.get<double>();
}

std::uint64_t uint(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(where, "expected an integer");
  auto v = j.get<std::int64_t>();
  if (v < 0) bad(where, "expected a non-negative integer");
  return static_cast<std::uint64_t>(v);
}

AttributeKind kind_from(const std::string& s, const std::string& where) {
  if (s == "scalar") return AttributeKind::Scalar;
  if (s == "counter") return AttributeKind::Counter;
  if (s == "map") return AttributeKind::Map;
  bad(where, "unknown attribute kind '" + s + "'");
}

TriggerEvent event_from(const std::string& s, const std::string& where) {
  if (s == "on_complete") return TriggerEvent::OnComplete;
  if (s == "on_failure") return TriggerEvent::OnFailure;
  if (s == "on_create") return TriggerEvent::OnCreate;
  if (s == "on_update") return TriggerEvent::OnUpdate;
  if (s == "on_delete") return TriggerEvent::OnDelete;
  bad(where, "unknown trigger event '" + s + "'");
}

}  // namespace

SlaOverride sla_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) bad(where, "SLA must be an object");
  SlaOverride o;
  if (j.contains("consistency")) {
    const auto c = str(j.at("consistency"), where + ".consistency");
    if (c == "strong") {
      o.consistency = Consistency::strong();
    } else if (c == "ryw") {
      o.consistency = Consistency::ryw();
    } else if (c == "bounded_staleness") {
      const double delta_s = num(field(j, "delta_s", where), where + ".delta_s");
      o.consistency = Consistency::bounded(static_cast<Millis>(delta_s * 1000.0 + 0.5));
      if (delta_s <= 0) o.consistency->delta_ms = 0;
    } else {
      bad(where + ".consistency", "unknown consistency '" + c + "'");
    }
  }
  if (j.contains("availability")) o.availability = num(j.at("availability"), where + ".availability");
  if (j.contains("throughput")) o.throughput = uint(j.at("throughput"), where + ".throughput");
  if (j.contains("locality")) {
    const auto& l = j.at("locality");
    if (!l.is_array()) bad(where + ".locality", "expected an array of datacenter ids");
    std::vector<DcId> sites;
    for (const auto& s : l) sites.push_back(str(s, where + ".locality"));
    o.locality = sites;
  }
  return o;
}

json sla_to_json(const SlaOverride& o) {
  json j = json::object();
  if (o.consistency) {
    j["consistency"] = consistency_name(o.consistency->kind);
    if (o.consistency->kind == ConsistencyKind::BoundedStaleness)
      j["delta_s"] = static_cast<double>(o.consistency->delta_ms) / 1000.0;
  }
  if (o.availability) j["availability"] = *o.availability;
  if (o.throughput) j["throughput"] = *o.throughput;
  if (o.locality) j["locality"] = *o.locality;
  return j;
}

json sla_to_json(const SlaSpec& s) { return sla_to_json(SlaOverride::full(s)); }

ClassDefinition class_from_json(const json& j) {
  ClassDefinition def;
  def.name = str(field(j, "name", "class"), "class.name");
  const std::string where = "class " + def.name;
  if (j.contains("parent") && !j.at("parent").is_null()) def.parent = str(j.at("parent"), where + ".parent");
  if (j.contains("sla")) def.class_sla = sla_from_json(j.at("sla"), where + ".sla");
  if (j.contains("attributes")) {
    for (const auto& a : j.at("attributes")) {
      AttributeDef attr;
      attr.name = str(field(a, "name", where + ".attributes"), where + ".attributes.name");
      const std::string aw = where + ".attributes." + attr.name;
      attr.kind = a.contains("kind") ? kind_from(str(a.at("kind"), aw + ".kind"), aw + ".kind") : AttributeKind::Scalar;
      if (a.contains("sla")) attr.sla = sla_from_json(a.at("sla"), aw + ".sla");
      def.attributes.push_back(std::move(attr));
    }
  }
  if (j.contains("functions")) {
    for (const auto& f : j.at("functions")) {
      FunctionDef fn;
      fn.name = str(field(f, "name", where + ".functions"), where + ".functions.name");
      const std::string fw = where + ".functions." + fn.name;
      fn.handler = str(field(f, "handler", fw), fw + ".handler");
      if (f.contains("service_ms")) fn.service_ms = static_cast<Millis>(uint(f.at("service_ms"), fw + ".service_ms"));
      if (f.contains("params")) {
        if (!f.at("params").is_object()) bad(fw + ".params", "expected an object");
        for (const auto& [k, v] : f.at("params").items()) fn.params[k] = str(v, fw + ".params." + k);
      }
      if (f.contains("sla")) fn.sla = sla_from_json(f.at("sla"), fw + ".sla");
      def.functions.push_back(std::move(fn));
    }
  }
  if (j.contains("member_slas")) {
    for (const auto& [member, s] : j.at("member_slas").items())
      def.member_slas[member] = sla_from_json(s, where + ".member_slas." + member);
  }
  if (j.contains("triggers")) {
    for (const auto& t : j.at("triggers")) {
      TriggerRule rule;
      rule.target_function = str(field(t, "function", where + ".triggers"), where + ".triggers.function");
      rule.source = str(field(t, "source", where + ".triggers"), where + ".triggers.source");
      rule.event = event_from(str(field(t, "event", where + ".triggers"), where + ".triggers.event"),
                              where + ".triggers.event");
      def.triggers.push_back(std::move(rule));
    }
  }
  return def;
}

json class_to_json(const ClassDefinition& def) {
  json j;
  j["name"] = def.name;
  if (def.parent) j["parent"] = *def.parent;
  j["sla"] = sla_to_json(def.class_sla);
  j["attributes"] = json::array();
  for (const auto& a : def.attributes) {
    json ja{{"name", a.name}, {"kind", attribute_kind_name(a.kind)}};
    if (!a.sla.empty()) ja["sla"] = sla_to_json(a.sla);
    j["attributes"].push_back(std::move(ja));
  }
  j["functions"] = json::array();
  for (const auto& f : def.functions) {
    json jf{{"name", f.name}, {"handler", f.handler}, {"service_ms", f.service_ms}};
    if (!f.params.empty()) jf["params"] = f.params;
    if (!f.sla.empty()) jf["sla"] = sla_to_json(f.sla);
    j["functions"].push_back(std::move(jf));
  }
  if (!def.member_slas.empty()) {
    j["member_slas"] = json::object();
    for (const auto& [m, o] : def.member_slas) j["member_slas"][m] = sla_to_json(o);
  }
  j["triggers"] = json::array();
  for (const auto& t : def.triggers)
    j["triggers"].push_back({{"function", t.target_function}, {"source", t.source}, {"event", trigger_event_name(t.event)}});
  return j;
}

DatacenterProfile profile_from_json(const json& j) {
  DatacenterProfile p;
  p.id = str(field(j, "id", "datacenter"), "datacenter.id");
  const std::string where = "datacenter " + p.id;
  const auto tier = j.contains("tier") ? str(j.at("tier"), where + ".tier") : std::string("edge");
  if (tier == "edge") {
    p.tier = Tier::Edge;
  } else if (tier == "cloud") {
    p.tier = Tier::Cloud;
  } else {
    bad(where + ".tier", "unknown tier '" + tier + "'");
  }
  p.capacity = static_cast<std::uint32_t>(uint(field(j, "capacity", where), where + ".capacity"));
  p.failure_prob = num(field(j, "failure_prob", where), where + ".failure_prob");
  if (j.contains("latency_ms")) {
    for (const auto& [peer, ms] : j.at("latency_ms").items())
      p.region_latency[peer] = static_cast<Millis>(num(ms, where + ".latency_ms." + peer));
  }
  try {
    check_profile(p);
  } catch (const Error& e) {
    bad(where, e.what());
  }
  return p;
}

json profile_to_json(const DatacenterProfile& p) {
  json j{{"id", p.id},
         {"tier", p.tier == Tier::Edge ? "edge" : "cloud"},
         {"capacity", p.capacity},
         {"failure_prob", p.failure_prob}};
  if (!p.region_latency.empty()) j["latency_ms"] = p.region_latency;
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(Errc::ScriptError, path.string() + ": " + e.what());
  }
}

ClassDefinition load_class_file(const std::filesystem::path& path) {
  try {
    return class_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.code() == Errc::ScriptError && std::string(e.what()).rfind(path.string(), 0) != 0)
      throw Error(Errc::ScriptError, path.string() + ": " + e.what());
    throw;
  }
}

ClassCatalog load_catalog_near(const std::filesystem::path& path) {
  ClassCatalog catalog;
  const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    json j;
    try {
      j = read_json_file(f);
    } catch (const Error&) {
      continue;
    }
    if (!j.is_object() || !j.contains("name") || !(j.contains("functions") || j.contains("attributes"))) continue;
    try {
      auto def = class_from_json(j);
      catalog.emplace(def.name, std::move(def));
    } catch (const Error&) {
      // unrelated or broken neighbours do not block the class being loaded
    }
  }
  return catalog;
}

std::vector<DatacenterProfile> profiles_from_json(const json& j) {
  const json& arr = j.is_object() ? field(j, "datacenters", "profiles") : j;
  if (!arr.is_array()) bad("profiles", "expected an array of datacenters");
  std::vector<DatacenterProfile> out;
  for (const auto& p : arr) out.push_back(profile_from_json(p));
  try {
    check_symmetric(out);
  } catch (const Error& e) {
    bad("profiles", e.what());
  }
  return out;
}

std::vector<DatacenterProfile> load_profiles_file(const std::filesystem::path& path) {
  return profiles_from_json(read_json_file(path));
}

}  // namespace weft::model
