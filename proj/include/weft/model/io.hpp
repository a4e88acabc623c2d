#pragma once

#include <filesystem>
#include <vector>

#include <json.hpp>

#include "weft/model/class_def.hpp"
#include "weft/model/validate.hpp"

namespace weft::model {

// Class documents:
//   {"name", "parent"?, "sla": {...}, "attributes": [{"name","kind","sla"?}],
//    "functions": [{"name","handler","service_ms","params"?,"sla"?}],
//    "member_slas"?: {member: sla}, "triggers"?: [{"function","source","event"}]}
// SLA objects: {"consistency": "strong"|"bounded_staleness"|"ryw", "delta_s"?,
//               "availability"?, "throughput"?, "locality"?: [dc...]}
// Malformed documents throw Error(ScriptError) naming the offending field.
ClassDefinition class_from_json(const nlohmann::json& j);
nlohmann::json class_to_json(const ClassDefinition& def);

SlaOverride sla_from_json(const nlohmann::json& j, const std::string& where);
nlohmann::json sla_to_json(const SlaOverride& o);
nlohmann::json sla_to_json(const SlaSpec& s);

// {"id","tier":"edge"|"cloud","capacity","failure_prob","latency_ms"?: {peer: ms}}
DatacenterProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const DatacenterProfile& p);

nlohmann::json read_json_file(const std::filesystem::path& path);
ClassDefinition load_class_file(const std::filesystem::path& path);
// Every class document in the file's directory, keyed by class name; used to
// resolve parents of a class loaded from that directory.
ClassCatalog load_catalog_near(const std::filesystem::path& path);
// {"datacenters": [profile...]} or a bare array of profiles.
std::vector<DatacenterProfile> load_profiles_file(const std::filesystem::path& path);
std::vector<DatacenterProfile> profiles_from_json(const nlohmann::json& j);

}  // namespace weft::model
