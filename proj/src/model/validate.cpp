#include "weft/model/validate.hpp"

#include <algorithm>

#include "weft/common/status.hpp"

namespace weft::model {

namespace {

std::vector<const ClassDefinition*> resolve_chain(const ClassDefinition& def, const ClassCatalog& catalog) {
  std::vector<const ClassDefinition*> chain{&def};
  std::set<std::string> seen{def.name};
  const ClassDefinition* cur = &def;
  while (cur->parent) {
    const auto& pname = *cur->parent;
    if (seen.count(pname)) throw Error(Errc::UnknownParent, "inheritance cycle through " + pname);
    auto it = catalog.find(pname);
    if (it == catalog.end()) throw Error(Errc::UnknownParent, "unknown parent class " + pname);
    seen.insert(pname);
    cur = &it->second;
    chain.push_back(cur);
  }
  std::reverse(chain.begin(), chain.end());  // root first
  return chain;
}

}  // namespace

FlattenedClass validate_class(const ClassDefinition& def, const HandlerNames& handlers,
                              const ClassCatalog& catalog) {
  if (def.name.empty()) throw Error(Errc::InvalidArgument, "class name is empty");
  const auto chain = resolve_chain(def, catalog);

  SlaOverride class_override;
  std::map<std::string, SlaOverride> member_slas;
  std::vector<AttributeDef> attrs;
  std::vector<FunctionDef> funcs;
  std::vector<TriggerRule> triggers;
  std::set<std::string> names;

  for (const auto* cls : chain) {
    check_override(cls->class_sla);
    class_override = combine(class_override, cls->class_sla);
    for (const auto& a : cls->attributes) {
      if (!names.insert(a.name).second) throw Error(Errc::DuplicateMember, cls->name + "." + a.name);
      check_override(a.sla);
      attrs.push_back(a);
    }
    for (const auto& f : cls->functions) {
      if (!names.insert(f.name).second) throw Error(Errc::DuplicateMember, cls->name + "." + f.name);
      check_override(f.sla);
      if (!handlers.count(f.handler))
        throw Error(Errc::UnknownHandler, cls->name + "." + f.name + " uses handler " + f.handler);
      if (f.service_ms < 0) throw Error(Errc::InvalidArgument, cls->name + "." + f.name + ": negative service time");
      funcs.push_back(f);
    }
    for (const auto& [member, o] : cls->member_slas) {
      check_override(o);
      member_slas[member] = combine(member_slas[member], o);
    }
    for (const auto& t : cls->triggers) {
      if (std::find(triggers.begin(), triggers.end(), t) == triggers.end()) triggers.push_back(t);
    }
  }

  if (!class_override.consistency || !class_override.availability)
    throw Error(Errc::InvalidSla, def.name + ": class SLA must state consistency and availability");

  FlattenedClass flat;
  flat.name = def.name;
  flat.class_sla = apply_override(SlaSpec{}, class_override);
  check_sla(flat.class_sla);

  for (const auto& [member, o] : member_slas) {
    if (!names.count(member)) throw Error(Errc::UnknownMember, def.name + ": SLA override for undeclared " + member);
  }
  auto resolve = [&](const std::string& member, const SlaOverride& inline_o) {
    SlaSpec s = apply_override(flat.class_sla, inline_o);
    if (auto it = member_slas.find(member); it != member_slas.end()) s = apply_override(s, it->second);
    check_sla(s);
    return s;
  };
  for (const auto& a : attrs) flat.attributes.push_back({a.name, a.kind, resolve(a.name, a.sla)});
  for (const auto& f : funcs)
    flat.functions.push_back({f.name, f.handler, f.service_ms, f.params, resolve(f.name, f.sla)});

  for (const auto& t : triggers) {
    if (!flat.function(t.target_function))
      throw Error(Errc::UnknownMember, "trigger target " + t.target_function + " is not a function");
    const bool src_fn = flat.function(t.source) != nullptr;
    const bool src_attr = flat.attribute(t.source) != nullptr;
    if (!src_fn && !src_attr) throw Error(Errc::DanglingTriggerSource, "trigger source " + t.source);
    if (src_fn != is_function_event(t.event))
      throw Error(Errc::EventKindMismatch,
                  trigger_event_name(t.event) + " does not apply to " + (src_fn ? "function " : "attribute ") + t.source);
    if (t.source == t.target_function && t.event == TriggerEvent::OnComplete)
      throw Error(Errc::TriggerCycle, t.source + " triggers itself on completion");
  }
  flat.triggers = std::move(triggers);
  return flat;
}

SlaSpec effective_sla(const FlattenedClass& flat, const std::string& member) {
  if (const auto* a = flat.attribute(member)) return a->sla;
  if (const auto* f = flat.function(member)) return f->sla;
  throw Error(Errc::UnknownMember, flat.name + "." + member);
}

ClassDefinition to_definition(const FlattenedClass& flat) {
  ClassDefinition def;
  def.name = flat.name;
  def.class_sla = SlaOverride::full(flat.class_sla);
  for (const auto& a : flat.attributes) def.attributes.push_back({a.name, a.kind, SlaOverride::full(a.sla)});
  for (const auto& f : flat.functions)
    def.functions.push_back({f.name, f.handler, f.service_ms, f.params, SlaOverride::full(f.sla)});
  def.triggers = flat.triggers;
  return def;
}

}  // namespace weft::model
