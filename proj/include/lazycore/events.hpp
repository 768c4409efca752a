#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lazycore/machine.hpp"
#include "lazycore/span.hpp"
#include "lazycore/value.hpp"

namespace lazycore {

// How a promise's suspended expression is shaped, for the creation-site
// breakdown tables.
enum class ExprClass { Sym, Const, Call, Other };

// Where a write landed relative to the innermost promise being forced:
// its top frame (Local), an outer frame of its chain (Lexical), any other
// frame (Other); None when nothing is being forced.
enum class Locality { None, Local, Lexical, Other };

struct ProgramStart {
  std::string name;
  bool operator==(const ProgramStart&) const = default;
};
struct CallEnter {
  CallId call_id = 0;
  SourceSpan closure_span{};
  std::uint32_t n_params = 0;
  std::uint32_t n_args = 0;
  bool operator==(const CallEnter&) const = default;
};
struct CallExit {
  CallId call_id = 0;
  bool operator==(const CallExit&) const = default;
};
struct PromCreate {
  std::uint64_t prom_id = 0;
  CallId creating_call = 0;  // 0 when created at top level
  std::string param;         // empty for delayed assignments
  PromKind kind = PromKind::Arg;
  ExprClass expr_class = ExprClass::Other;
  std::string deparsed_expr;
  bool operator==(const PromCreate&) const = default;
};
struct PromForceEnter {
  std::uint64_t prom_id = 0;
  CallId active_call = 0;
  std::uint32_t depth = 0;
  bool operator==(const PromForceEnter&) const = default;
};
struct PromForceExit {
  std::uint64_t prom_id = 0;
  bool operator==(const PromForceExit&) const = default;
};
struct PromRead {
  std::uint64_t prom_id = 0;
  CallId active_call = 0;
  bool operator==(const PromRead&) const = default;
};
struct PromMeta {
  std::uint64_t prom_id = 0;
  CallId active_call = 0;
  bool operator==(const PromMeta&) const = default;
};
struct EvalEnter {
  Location env_loc = 0;
  bool operator==(const EvalEnter&) const = default;
};
struct EvalExit {
  bool operator==(const EvalExit&) const = default;
};
struct VarDef {
  Location frame = 0;
  std::string name;
  Locality locality = Locality::None;
  std::uint64_t active_prom = 0;
  bool operator==(const VarDef&) const = default;
};
struct VarWrite {
  Location frame = 0;
  std::string name;
  Locality locality = Locality::None;
  std::uint64_t active_prom = 0;
  bool operator==(const VarWrite&) const = default;
};
struct VarRead {
  Location frame = 0;
  std::string name;
  bool operator==(const VarRead&) const = default;
};
struct ProgramEnd {
  std::uint64_t steps = 0;
  std::optional<ErrCode> error;  // empty = clean finish
  bool operator==(const ProgramEnd&) const = default;
};

using TraceEvent =
    std::variant<ProgramStart, CallEnter, CallExit, PromCreate, PromForceEnter,
                 PromForceExit, PromRead, PromMeta, EvalEnter, EvalExit, VarDef,
                 VarWrite, VarRead, ProgramEnd>;

// Consumes the strictly ordered event stream of one run.
class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void accept(const TraceEvent& ev) = 0;
};

class VectorSink : public EventSink {
 public:
  std::vector<TraceEvent> events;
  void accept(const TraceEvent& ev) override { events.push_back(ev); }
};

// Fixed uppercase wire tokens, and their inverses (nullopt on junk).
const char* prom_kind_token(PromKind k);
const char* expr_class_token(ExprClass c);
const char* locality_token(Locality l);
std::optional<PromKind> prom_kind_from_token(std::string_view t);
std::optional<ExprClass> expr_class_from_token(std::string_view t);
std::optional<Locality> locality_from_token(std::string_view t);
std::optional<ErrCode> err_code_from_token(std::string_view t);

ExprClass classify_expr(const ExprPtr& e);

}  // namespace lazycore
