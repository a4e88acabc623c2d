#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "weft/model/sla.hpp"

namespace weft::model {

enum class AttributeKind { Scalar, Counter, Map };

enum class TriggerEvent { OnComplete, OnFailure, OnCreate, OnUpdate, OnDelete };

std::string attribute_kind_name(AttributeKind kind);
std::string trigger_event_name(TriggerEvent event);
bool is_function_event(TriggerEvent event);

struct AttributeDef {
  std::string name;
  AttributeKind kind = AttributeKind::Scalar;
  SlaOverride sla;

  friend bool operator==(const AttributeDef&, const AttributeDef&) = default;
};

struct FunctionDef {
  std::string name;
  std::string handler;
  Millis service_ms = 1;
  std::map<std::string, std::string> params;  // handler configuration, e.g. {"attr": "cache"}
  SlaOverride sla;

  friend bool operator==(const FunctionDef&, const FunctionDef&) = default;
};

struct TriggerRule {
  std::string target_function;
  std::string source;
  TriggerEvent event = TriggerEvent::OnComplete;

  friend bool operator==(const TriggerRule&, const TriggerRule&) = default;
  friend auto operator<=>(const TriggerRule&, const TriggerRule&) = default;
};

struct ClassDefinition {
  std::string name;
  std::optional<std::string> parent;
  std::vector<AttributeDef> attributes;
  std::vector<FunctionDef> functions;
  SlaOverride class_sla;  // a root class must state consistency and availability
  std::map<std::string, SlaOverride> member_slas;  // overrides for own or inherited members
  std::vector<TriggerRule> triggers;

  friend bool operator==(const ClassDefinition&, const ClassDefinition&) = default;
};

struct ResolvedAttribute {
  std::string name;
  AttributeKind kind = AttributeKind::Scalar;
  SlaSpec sla;

  friend bool operator==(const ResolvedAttribute&, const ResolvedAttribute&) = default;
};

struct ResolvedFunction {
  std::string name;
  std::string handler;
  Millis service_ms = 1;
  std::map<std::string, std::string> params;
  SlaSpec sla;

  friend bool operator==(const ResolvedFunction&, const ResolvedFunction&) = default;
};

// Inheritance-flattened class with every member's effective SLA resolved.
struct FlattenedClass {
  std::string name;
  SlaSpec class_sla;
  std::vector<ResolvedAttribute> attributes;
  std::vector<ResolvedFunction> functions;
  std::vector<TriggerRule> triggers;

  const ResolvedAttribute* attribute(const std::string& n) const;
  const ResolvedFunction* function(const std::string& n) const;

  friend bool operator==(const FlattenedClass&, const FlattenedClass&) = default;
};

enum class Tier { Edge, Cloud };

struct DatacenterProfile {
  DcId id;
  Tier tier = Tier::Edge;
  std::uint32_t capacity = 1;
  double failure_prob = 0.01;
  std::map<DcId, Millis> region_latency;  // one-way, to peers

  friend bool operator==(const DatacenterProfile&, const DatacenterProfile&) = default;
};

// Throws Error(InvalidArgument) on capacity < 1, failure_prob outside (0,1) or
// negative latency.
void check_profile(const DatacenterProfile& p);
// Latency entries must agree in both directions where both are given.
void check_symmetric(const std::vector<DatacenterProfile>& profiles);

struct ObjectId {
  std::string cls;
  std::uint64_t instance = 0;

  std::string to_string() const { return cls + "#" + std::to_string(instance); }

  friend bool operator==(const ObjectId&, const ObjectId&) = default;
  friend auto operator<=>(const ObjectId&, const ObjectId&) = default;
};

}  // namespace weft::model
