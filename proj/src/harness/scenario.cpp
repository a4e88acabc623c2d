#include "weft/harness/scenario.hpp"

#include <cmath>

#include "weft/model/io.hpp"
#include "weft/model/validate.hpp"
#include "weft/runtime/handlers.hpp"

namespace weft::harness {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
  throw Error(Errc::ScriptError, where + ": " + what);
}

const json& need(const json& j, const char* key, const std::string& where) {
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

std::uint64_t count(const json& j, const std::string& where) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) bad(where, "expected an integer");
  if (j.get<std::int64_t>() < 0) bad(where, "expected a non-negative integer");
  return j.get<std::uint64_t>();
}

Millis secs(const json& j, const std::string& where) {
  const double s = num(j, where);
  if (s < 0) bad(where, "must not be negative");
  return static_cast<Millis>(std::llround(s * 1000.0));
}

Millis positive_secs(const json& j, const std::string& where) {
  const Millis ms = secs(j, where);
  if (ms <= 0) bad(where, "must be positive");
  return ms;
}

std::set<DcId> dc_set(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) bad(where, "expected a non-empty list of datacenters");
  std::set<DcId> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.insert(str(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

const json& array_field(const json& j, const char* key, const std::string& where) {
  const json& a = need(j, key, where);
  if (!a.is_array()) bad(where + "." + key, "expected a list");
  return a;
}

}  // namespace

model::FlattenedClass load_class(const std::filesystem::path& path) {
  const auto def = model::load_class_file(path);
  return model::validate_class(def, runtime::builtin_handlers().names(), model::load_catalog_near(path));
}

Scenario parse_scenario(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) bad("scenario", "expected an object");
  Scenario s;
  s.name = j.contains("name") ? str(j["name"], "scenario.name") : "scenario";
  s.seed = count(need(j, "seed", "scenario"), "scenario.seed");
  s.duration = positive_secs(need(j, "duration_s", "scenario"), "scenario.duration_s");

  const json& dcs = array_field(j, "datacenters", "scenario");
  if (dcs.empty()) bad("scenario.datacenters", "at least one datacenter is required");
  for (std::size_t i = 0; i < dcs.size(); ++i) {
    try {
      s.datacenters.push_back(model::profile_from_json(dcs[i]));
    } catch (const Error& e) {
      bad("scenario.datacenters[" + std::to_string(i) + "]", e.what());
    }
  }
  try {
    for (const auto& p : s.datacenters) model::check_profile(p);
    model::check_symmetric(s.datacenters);
  } catch (const Error& e) {
    bad("scenario.datacenters", e.what());
  }
  std::set<DcId> known;
  for (const auto& p : s.datacenters)
    if (!known.insert(p.id).second) bad("scenario.datacenters", "duplicate datacenter " + p.id);
  auto check_dc = [&](const DcId& dc, const std::string& where) {
    if (!known.count(dc)) bad(where, "unknown datacenter '" + dc + "'");
  };

  s.control = j.contains("control") ? str(j["control"], "scenario.control") : s.datacenters.front().id;
  for (const auto& p : s.datacenters)
    if (!j.contains("control") && p.tier == model::Tier::Cloud) {
      s.control = p.id;
      break;
    }
  check_dc(s.control, "scenario.control");
  if (j.contains("jitter_ms")) s.jitter_ms = static_cast<Millis>(count(j["jitter_ms"], "scenario.jitter_ms"));

  if (j.contains("link_rates")) {
    const json& lr = array_field(j, "link_rates", "scenario");
    for (std::size_t i = 0; i < lr.size(); ++i) {
      const std::string w = "scenario.link_rates[" + std::to_string(i) + "]";
      LinkRate r{str(need(lr[i], "a", w), w + ".a"), str(need(lr[i], "b", w), w + ".b"),
                 count(need(lr[i], "msgs_per_sec", w), w + ".msgs_per_sec")};
      check_dc(r.a, w + ".a");
      check_dc(r.b, w + ".b");
      if (r.msgs_per_sec == 0) bad(w + ".msgs_per_sec", "must be positive");
      s.link_rates.push_back(r);
    }
  }

  const json& classes = array_field(j, "classes", "scenario");
  const auto handlers = runtime::builtin_handlers().names();
  model::ClassCatalog inline_catalog;
  for (const auto& c : classes)
    if (c.is_object()) {
      try {
        auto def = model::class_from_json(c);
        inline_catalog.emplace(def.name, std::move(def));
      } catch (const Error&) {
        // reported below with its position
      }
    }
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const std::string w = "scenario.classes[" + std::to_string(i) + "]";
    if (classes[i].is_string()) {
      const auto path = base_dir / classes[i].get<std::string>();
      if (!std::filesystem::exists(path)) bad(w, "class file " + path.string() + " not found");
      s.classes.push_back(load_class(path));
    } else if (classes[i].is_object()) {
      model::ClassDefinition def;
      try {
        def = model::class_from_json(classes[i]);
      } catch (const Error& e) {
        bad(w, e.what());
      }
      s.classes.push_back(model::validate_class(def, handlers, inline_catalog));
    } else {
      bad(w, "expected a file name or a class document");
    }
  }
  std::set<std::string> class_names;
  for (const auto& c : s.classes)
    if (!class_names.insert(c.name).second) bad("scenario.classes", "class " + c.name + " listed twice");
  auto find_class = [&](const std::string& n) -> const model::FlattenedClass* {
    for (const auto& c : s.classes)
      if (c.name == n) return &c;
    return nullptr;
  };

  const json& wl = array_field(j, "workloads", "scenario");
  for (std::size_t i = 0; i < wl.size(); ++i) {
    const std::string w = "scenario.workloads[" + std::to_string(i) + "]";
    WorkloadSpec ws;
    ws.cls = str(need(wl[i], "class", w), w + ".class");
    const auto* cls = find_class(ws.cls);
    if (!cls) bad(w + ".class", "unknown class '" + ws.cls + "'");
    const json& fns = array_field(wl[i], "functions", w);
    if (fns.empty()) bad(w + ".functions", "at least one function is required");
    for (std::size_t k = 0; k < fns.size(); ++k) {
      auto f = str(fns[k], w + ".functions[" + std::to_string(k) + "]");
      if (!cls->function(f)) bad(w + ".functions[" + std::to_string(k) + "]", ws.cls + " has no function '" + f + "'");
      ws.functions.push_back(std::move(f));
    }
    const bool open = wl[i].contains("rate");
    const bool closed = wl[i].contains("concurrency");
    if (open == closed) bad(w, "exactly one of 'rate' and 'concurrency' is required");
    if (open) {
      ws.rate = num(wl[i]["rate"], w + ".rate");
      if (!(ws.rate > 0)) bad(w + ".rate", "must be positive");
    } else {
      ws.concurrency = static_cast<std::uint32_t>(count(wl[i]["concurrency"], w + ".concurrency"));
      if (ws.concurrency == 0) bad(w + ".concurrency", "must be positive");
    }
    if (wl[i].contains("objects")) ws.objects = static_cast<std::uint32_t>(count(wl[i]["objects"], w + ".objects"));
    if (ws.objects == 0) bad(w + ".objects", "must be positive");
    if (wl[i].contains("sessions")) ws.sessions = static_cast<std::uint32_t>(count(wl[i]["sessions"], w + ".sessions"));
    ws.client_dc = str(need(wl[i], "client_dc", w), w + ".client_dc");
    check_dc(ws.client_dc, w + ".client_dc");
    if (wl[i].contains("start_s")) ws.start = secs(wl[i]["start_s"], w + ".start_s");
    if (wl[i].contains("duration_s")) ws.duration = positive_secs(wl[i]["duration_s"], w + ".duration_s");
    s.workloads.push_back(std::move(ws));
  }

  if (j.contains("partitions")) {
    const json& ps = array_field(j, "partitions", "scenario");
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const std::string w = "scenario.partitions[" + std::to_string(i) + "]";
      sim::PartitionEvent p;
      p.group_a = dc_set(need(ps[i], "a", w), w + ".a");
      p.group_b = dc_set(need(ps[i], "b", w), w + ".b");
      for (const auto& dc : p.group_a) check_dc(dc, w + ".a");
      for (const auto& dc : p.group_b) check_dc(dc, w + ".b");
      for (const auto& dc : p.group_a)
        if (p.group_b.count(dc)) bad(w, dc + " is on both sides");
      p.start = secs(need(ps[i], "start_s", w), w + ".start_s");
      p.duration = positive_secs(need(ps[i], "duration_s", w), w + ".duration_s");
      s.partitions.push_back(std::move(p));
    }
  }
  if (j.contains("outages")) {
    const json& os = array_field(j, "outages", "scenario");
    for (std::size_t i = 0; i < os.size(); ++i) {
      const std::string w = "scenario.outages[" + std::to_string(i) + "]";
      sim::Outage o;
      o.dc = str(need(os[i], "dc", w), w + ".dc");
      check_dc(o.dc, w + ".dc");
      o.start = secs(need(os[i], "start_s", w), w + ".start_s");
      o.duration = positive_secs(need(os[i], "duration_s", w), w + ".duration_s");
      s.outages.push_back(std::move(o));
    }
  }
  if (j.contains("kills")) {
    const json& ks = array_field(j, "kills", "scenario");
    for (std::size_t i = 0; i < ks.size(); ++i) {
      const std::string w = "scenario.kills[" + std::to_string(i) + "]";
      KillSpec k{str(need(ks[i], "class", w), w + ".class"), str(need(ks[i], "dc", w), w + ".dc"),
                 secs(need(ks[i], "at_s", w), w + ".at_s")};
      if (!find_class(k.cls)) bad(w + ".class", "unknown class '" + k.cls + "'");
      check_dc(k.dc, w + ".dc");
      s.kills.push_back(std::move(k));
    }
  }
  if (j.contains("measurement")) {
    const json& m = j["measurement"];
    if (!m.is_object()) bad("scenario.measurement", "expected an object");
    if (m.contains("staleness")) {
      if (!m["staleness"].is_boolean()) bad("scenario.measurement.staleness", "expected true or false");
      s.measurement.staleness = m["staleness"].get<bool>();
    }
    if (m.contains("sample_period_s"))
      s.measurement.sample_period = positive_secs(m["sample_period_s"], "scenario.measurement.sample_period_s");
  }
  if (j.contains("runtime")) {
    const json& r = j["runtime"];
    if (!r.is_object()) bad("scenario.runtime", "expected an object");
    if (r.contains("ryw_sync_s")) s.control_cfg.ryw_sync_ms = positive_secs(r["ryw_sync_s"], "scenario.runtime.ryw_sync_s");
    if (r.contains("cold_start_ms"))
      s.control_cfg.cold_start_ms = static_cast<Millis>(count(r["cold_start_ms"], "scenario.runtime.cold_start_ms"));
    if (r.contains("initial_elastic"))
      s.control_cfg.initial_elastic =
          static_cast<std::uint32_t>(count(r["initial_elastic"], "scenario.runtime.initial_elastic"));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  const json j = model::read_json_file(path);
  try {
    return parse_scenario(j, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
  } catch (const Error& e) {
    if (e.code() == Errc::ScriptError) throw Error(Errc::ScriptError, path.string() + ": " + e.what());
    throw;
  }
}

}  // namespace weft::harness
