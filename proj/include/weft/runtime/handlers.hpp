#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "weft/common/bytes.hpp"
#include "weft/common/status.hpp"
#include "weft/model/class_def.hpp"
#include "weft/model/validate.hpp"

namespace weft::runtime {

using model::DcId;
using model::Millis;
using model::ObjectId;

// What refresh() returns. Scalars fill `value`, counters `counter`, maps
// `fields`; `found` is false for absent or deleted attributes.
struct AttrValue {
  bool found = false;
  Bytes value;
  std::uint64_t counter = 0;
  std::map<std::string, Bytes> fields;

  friend bool operator==(const AttrValue&, const AttrValue&) = default;
};

using StatusCb = std::function<void(Status)>;

// Storage and messaging operations a handler may use. Implemented by the
// class runtime that executes the invocation.
class ObjectAccess {
 public:
  virtual ~ObjectAccess() = default;
  virtual void commit(const ObjectId& obj, const std::string& attr, Bytes value, StatusCb done) = 0;
  virtual void increment(const ObjectId& obj, const std::string& attr, std::uint64_t by, StatusCb done) = 0;
  virtual void map_put(const ObjectId& obj, const std::string& attr, const std::string& field, Bytes value,
                       StatusCb done) = 0;
  virtual void refresh(const ObjectId& obj, const std::string& attr, std::function<void(StatusOr<AttrValue>)> done) = 0;
  virtual void invoke(const ObjectId& target, const std::string& function, Bytes payload,
                      std::function<void(StatusOr<Bytes>)> done) = 0;
};

// One running invocation as seen by its handler. A handler finishes by
// calling complete() or fail() exactly once; later calls are ignored.
class InvocationContext {
 public:
  InvocationContext(ObjectId obj, model::ResolvedFunction fn, Bytes payload, DcId dc,
                    std::shared_ptr<ObjectAccess> access, std::function<void(StatusOr<Bytes>)> finish)
      : obj_(std::move(obj)), fn_(std::move(fn)), payload_(std::move(payload)), dc_(std::move(dc)),
        access_(std::move(access)), finish_(std::move(finish)) {}

  const ObjectId& object() const { return obj_; }
  const model::ResolvedFunction& function() const { return fn_; }
  const Bytes& payload() const { return payload_; }
  const DcId& datacenter() const { return dc_; }
  // Handler parameter from the class file, or `fallback`.
  std::string param(const std::string& name, const std::string& fallback = {}) const;

  void commit(const std::string& attr, Bytes value, StatusCb done) { access_->commit(obj_, attr, std::move(value), std::move(done)); }
  void increment(const std::string& attr, std::uint64_t by, StatusCb done) { access_->increment(obj_, attr, by, std::move(done)); }
  void map_put(const std::string& attr, const std::string& field, Bytes value, StatusCb done) {
    access_->map_put(obj_, attr, field, std::move(value), std::move(done));
  }
  void refresh(const std::string& attr, std::function<void(StatusOr<AttrValue>)> done) {
    access_->refresh(obj_, attr, std::move(done));
  }
  void invoke(const ObjectId& target, const std::string& function, Bytes payload,
              std::function<void(StatusOr<Bytes>)> done) {
    access_->invoke(target, function, std::move(payload), std::move(done));
  }

  void complete(Bytes result);
  void fail(Status s);
  bool finished() const { return finished_; }

 private:
  ObjectId obj_;
  model::ResolvedFunction fn_;
  Bytes payload_;
  DcId dc_;
  std::shared_ptr<ObjectAccess> access_;
  std::function<void(StatusOr<Bytes>)> finish_;
  bool finished_ = false;
};

using Handler = std::function<void(std::shared_ptr<InvocationContext>)>;

class HandlerRegistry {
 public:
  // Replaces an existing handler of the same name.
  void add(const std::string& name, Handler h) { handlers_[name] = std::move(h); }
  const Handler* find(const std::string& name) const;
  model::HandlerNames names() const;

 private:
  std::map<std::string, Handler> handlers_;
};

// echo      -> payload
// put       -> commit(param attr, payload), returns payload
// get       -> refresh(param attr), returns the scalar value
// increment -> increment(param attr, payload as integer or 1), returns the new total
// map_put   -> payload "field=value" into map attribute (param attr)
// relay     -> invokes param function on the object named by the payload
//              "<class>#<instance>[|<payload>]", returns its result
// fail      -> fails with HandlerError
// `attr` defaults to "value".
HandlerRegistry builtin_handlers();

// "<class>#<instance>" -> ObjectId; nullopt when malformed.
std::optional<ObjectId> parse_object_id(const std::string& text);

}  // namespace weft::runtime
