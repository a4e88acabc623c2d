#include "weft/runtime/handlers.hpp"

#include <charconv>

namespace weft::runtime {

std::string InvocationContext::param(const std::string& name, const std::string& fallback) const {
  auto it = fn_.params.find(name);
  return it == fn_.params.end() ? fallback : it->second;
}

void InvocationContext::complete(Bytes result) {
  if (finished_) return;
  finished_ = true;
  finish_(std::move(result));
}

void InvocationContext::fail(Status s) {
  if (finished_) return;
  finished_ = true;
  finish_(std::move(s));
}

const Handler* HandlerRegistry::find(const std::string& name) const {
  auto it = handlers_.find(name);
  return it == handlers_.end() ? nullptr : &it->second;
}

model::HandlerNames HandlerRegistry::names() const {
  model::HandlerNames out;
  for (const auto& [n, _] : handlers_) out.insert(n);
  return out;
}

std::optional<ObjectId> parse_object_id(const std::string& text) {
  const auto hash = text.find('#');
  if (hash == std::string::npos || hash == 0 || hash + 1 == text.size()) return std::nullopt;
  std::uint64_t n = 0;
  const char* b = text.data() + hash + 1;
  const char* e = text.data() + text.size();
  auto [p, ec] = std::from_chars(b, e, n);
  if (ec != std::errc() || p != e) return std::nullopt;
  return ObjectId{text.substr(0, hash), n};
}

namespace {

using Ctx = std::shared_ptr<InvocationContext>;

void finish_with(const Ctx& ctx, const Status& s, Bytes out) {
  if (s.ok()) {
    ctx->complete(std::move(out));
  } else {
    ctx->fail(s);
  }
}

}  // namespace

HandlerRegistry builtin_handlers() {
  HandlerRegistry r;
  r.add("echo", [](Ctx ctx) { ctx->complete(ctx->payload()); });
  r.add("put", [](Ctx ctx) {
    ctx->commit(ctx->param("attr", "value"), ctx->payload(), [ctx](Status s) { finish_with(ctx, s, ctx->payload()); });
  });
  r.add("get", [](Ctx ctx) {
    ctx->refresh(ctx->param("attr", "value"), [ctx](StatusOr<AttrValue> v) {
      if (!v.ok()) {
        ctx->fail(v.status());
      } else {
        ctx->complete(v->value);
      }
    });
  });
  r.add("increment", [](Ctx ctx) {
    std::uint64_t by = 1;
    const auto& p = ctx->payload();
    if (!p.empty()) {
      auto [end, ec] = std::from_chars(p.data(), p.data() + p.size(), by);
      if (ec != std::errc() || end != p.data() + p.size()) {
        ctx->fail(Status(Errc::HandlerError, "increment payload is not an integer"));
        return;
      }
    }
    const auto attr = ctx->param("attr", "value");
    ctx->increment(attr, by, [ctx, attr](Status s) {
      if (!s.ok()) {
        ctx->fail(s);
        return;
      }
      ctx->refresh(attr, [ctx](StatusOr<AttrValue> v) {
        if (!v.ok()) {
          ctx->fail(v.status());
        } else {
          ctx->complete(std::to_string(v->counter));
        }
      });
    });
  });
  r.add("map_put", [](Ctx ctx) {
    const auto& p = ctx->payload();
    const auto eq = p.find('=');
    if (eq == std::string::npos) {
      ctx->fail(Status(Errc::HandlerError, "map_put payload must be field=value"));
      return;
    }
    ctx->map_put(ctx->param("attr", "value"), p.substr(0, eq), p.substr(eq + 1),
                 [ctx](Status s) { finish_with(ctx, s, ctx->payload()); });
  });
  r.add("relay", [](Ctx ctx) {
    const auto& p = ctx->payload();
    const auto bar = p.find('|');
    auto target = parse_object_id(p.substr(0, bar));
    if (!target) {
      ctx->fail(Status(Errc::HandlerError, "relay payload must name an object"));
      return;
    }
    Bytes inner = bar == std::string::npos ? Bytes{} : p.substr(bar + 1);
    ctx->invoke(*target, ctx->param("function", "echo"), std::move(inner), [ctx](StatusOr<Bytes> out) {
      if (!out.ok()) {
        ctx->fail(out.status());
      } else {
        ctx->complete(*out);
      }
    });
  });
  r.add("fail", [](Ctx ctx) { ctx->fail(Status(Errc::HandlerError, "handler failed")); });
  return r;
}

}  // namespace weft::runtime
