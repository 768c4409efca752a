#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "lazycore/ast.hpp"
#include "lazycore/span.hpp"

namespace lazycore {

// Heap address. Positive, assigned in allocation order; 0 means "none".
using Location = std::uint64_t;
using CallId = std::uint64_t;

// Chain of frame locations, innermost first. Environments are never empty at
// run time: the bottom of every chain is the global frame.
struct Env {
  std::vector<Location> frames;

  bool operator==(const Env&) const = default;
};

struct Value;

struct ClosureData {
  std::vector<Param> params;
  ExprPtr body;
  Env env;
  SourceSpan def_span;  // span of the function literal; identifies the closure
};

struct StrV {
  std::string s;
  bool operator==(const StrV&) const = default;
};
struct ClosureV {
  std::shared_ptr<const ClosureData> fn;
};
struct EnvV {
  Location loc;
  bool operator==(const EnvV&) const = default;
};
struct PromV {
  Location loc;
  bool operator==(const PromV&) const = default;
};

struct Value {
  std::variant<StrV, ClosureV, EnvV, PromV> v;
};

template <class T>
const T* value_as(const Value& val) {
  return std::get_if<T>(&val.v);
}

// How a promise came to exist.
enum class PromKind { Arg, Default, Delayed };

// Deterministic printable form: strings as quoted literals, closures as their
// source, environments and promises by heap location.
std::string render_value(const Value& v);

}  // namespace lazycore
