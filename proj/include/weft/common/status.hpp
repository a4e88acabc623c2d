#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

namespace weft {

// Every failure the platform can report, synchronous or asynchronous.
enum class Errc {
  Ok,
  InvalidArgument,
  // class validation
  UnknownParent,
  DuplicateMember,
  UnknownHandler,
  DanglingTriggerSource,
  EventKindMismatch,
  TriggerCycle,
  InvalidSla,
  UnknownMember,
  // simulator
  PastTimestamp,
  UnknownDatacenter,
  InvalidPartition,
  OverlapWithExistingPartition,
  // consistency backends
  NotLeader,
  LeadershipLost,
  FetchFailed,
  KindMismatch,
  StalenessExceeded,
  NoReplicaAvailable,
  ReplicaUnreachable,
  NoQualifiedReplica,
  // runtime
  UnknownClass,
  UnknownObject,
  AlreadyDeleted,
  UnknownFunction,
  UnknownRule,
  NoCapacity,
  HandlerError,
  InsufficientCapacity,
  Timeout,
  // control plane
  InsufficientSites,
  InvalidTarget,
  NoSamples,
  DeployFailed,
  // io
  DecodeError,
  ScriptError,
  IoError,
};

std::string_view errc_name(Errc code);

class Status {
 public:
  Status() = default;
  Status(Errc code, std::string message) : code_(code), message_(std::move(message)) {}

  static Status ok_status() { return {}; }

  bool ok() const { return code_ == Errc::Ok; }
  Errc code() const { return code_; }
  const std::string& message() const { return message_; }
  std::string to_string() const;

  friend bool operator==(const Status& a, const Status& b) { return a.code_ == b.code_; }

 private:
  Errc code_ = Errc::Ok;
  std::string message_;
};

// Thrown for synchronous contract violations (bad class files, bad scripts,
// scheduling into the past). Asynchronous operation outcomes use Status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  explicit Error(const Status& s) : Error(s.code(), s.to_string()) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

template <typename T>
class StatusOr {
 public:
  StatusOr(T value) : v_(std::move(value)) {}  // NOLINT(google-explicit-constructor)
  StatusOr(Status status) : v_(std::move(status)) {  // NOLINT(google-explicit-constructor)
    if (std::get<Status>(v_).ok()) throw std::logic_error("StatusOr built from OK status");
  }

  bool ok() const { return std::holds_alternative<T>(v_); }
  Errc code() const { return ok() ? Errc::Ok : std::get<Status>(v_).code(); }
  Status status() const { return ok() ? Status{} : std::get<Status>(v_); }

  const T& value() const& {
    if (!ok()) throw Error(std::get<Status>(v_));
    return std::get<T>(v_);
  }
  T& value() & {
    if (!ok()) throw Error(std::get<Status>(v_));
    return std::get<T>(v_);
  }
  T&& value() && {
    if (!ok()) throw Error(std::get<Status>(v_));
    return std::get<T>(std::move(v_));
  }
  const T& operator*() const& { return value(); }
  const T* operator->() const { return &value(); }

 private:
  std::variant<Status, T> v_;
};

}  // namespace weft
