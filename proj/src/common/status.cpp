#include "weft/common/status.hpp"

namespace weft {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::Ok: return "Ok";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::UnknownParent: return "UnknownParent";
    case Errc::DuplicateMember: return "DuplicateMember";
    case Errc::UnknownHandler: return "UnknownHandler";
    case Errc::DanglingTriggerSource: return "DanglingTriggerSource";
    case Errc::EventKindMismatch: return "EventKindMismatch";
    case Errc::TriggerCycle: return "TriggerCycle";
    case Errc::InvalidSla: return "InvalidSla";
    case Errc::UnknownMember: return "UnknownMember";
    case Errc::PastTimestamp: return "PastTimestamp";
    case Errc::UnknownDatacenter: return "UnknownDatacenter";
    case Errc::InvalidPartition: return "InvalidPartition";
    case Errc::OverlapWithExistingPartition: return "OverlapWithExistingPartition";
    case Errc::NotLeader: return "NotLeader";
    case Errc::LeadershipLost: return "LeadershipLost";
    case Errc::FetchFailed: return "FetchFailed";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::StalenessExceeded: return "StalenessExceeded";
    case Errc::NoReplicaAvailable: return "NoReplicaAvailable";
    case Errc::ReplicaUnreachable: return "ReplicaUnreachable";
    case Errc::NoQualifiedReplica: return "NoQualifiedReplica";
    case Errc::UnknownClass: return "UnknownClass";
    case Errc::UnknownObject: return "UnknownObject";
    case Errc::AlreadyDeleted: return "AlreadyDeleted";
    case Errc::UnknownFunction: return "UnknownFunction";
    case Errc::UnknownRule: return "UnknownRule";
    case Errc::NoCapacity: return "NoCapacity";
    case Errc::HandlerError: return "HandlerError";
    case Errc::InsufficientCapacity: return "InsufficientCapacity";
    case Errc::Timeout: return "Timeout";
    case Errc::InsufficientSites: return "InsufficientSites";
    case Errc::InvalidTarget: return "InvalidTarget";
    case Errc::NoSamples: return "NoSamples";
    case Errc::DeployFailed: return "DeployFailed";
    case Errc::DecodeError: return "DecodeError";
    case Errc::ScriptError: return "ScriptError";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

std::string Status::to_string() const {
  std::string out(errc_name(code_));
  if (!message_.empty()) {
    out += ": ";
    out += message_;
  }
  return out;
}

}  // namespace weft
