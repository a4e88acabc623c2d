#pragma once

#include <map>
#include <set>
#include <string>

#include "weft/model/class_def.hpp"

namespace weft::model {

using HandlerNames = std::set<std::string>;
// Known class definitions by name, used to resolve parents.
using ClassCatalog = std::map<std::string, ClassDefinition>;

// Flattens the inheritance chain of `def` and resolves every member's
// effective SLA (member_slas > inline member override > class SLA, field by
// field, child over parent). Throws weft::Error with one of UnknownParent,
// DuplicateMember, UnknownHandler, DanglingTriggerSource, EventKindMismatch,
// TriggerCycle, UnknownMember or InvalidSla.
FlattenedClass validate_class(const ClassDefinition& def, const HandlerNames& handlers,
                              const ClassCatalog& catalog = {});

// Throws Error(UnknownMember) if `member` is neither an attribute nor a function.
SlaSpec effective_sla(const FlattenedClass& flat, const std::string& member);

// A parentless definition that validates back to `flat`.
ClassDefinition to_definition(const FlattenedClass& flat);

}  // namespace weft::model
