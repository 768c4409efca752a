#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "lazycore/ast.hpp"
#include "lazycore/span.hpp"
#include "lazycore/value.hpp"

namespace lazycore {

// ---------------------------------------------------------------------------
// Heap

// Insertion-ordered binding map; frames are small, lookups are linear.
struct Frame {
  std::vector<std::pair<std::string, Value>> slots;

  const Value* find(const std::string& name) const;
  // Returns true if the name already existed (overwrite).
  bool bind(const std::string& name, Value v);
};

struct EnvRecord {
  Env env;
};

struct PromOrigin {
  PromKind kind = PromKind::Arg;
  CallId call = 0;       // 0 = created at top level
  std::string param;     // empty for Delayed promises
};

struct Promise {
  std::optional<Value> val;    // set once forced
  ExprPtr exp;                 // retained for substitute even after forcing
  std::optional<Env> env;      // cleared when the value is memoized
  bool forcing = false;
  PromOrigin origin;
};

// Cells are never deleted; locations stay valid for the whole run.
class Heap {
 public:
  Location alloc_frame();
  Location alloc_env(Env e);
  Location alloc_promise(Promise p);

  Frame& frame(Location l);
  const Frame& frame(Location l) const;
  EnvRecord& env_record(Location l);
  const EnvRecord& env_record(Location l) const;
  Promise& promise(Location l);
  const Promise& promise(Location l) const;

  bool is_env_record(Location l) const;
  bool is_promise(Location l) const;

  // Highest allocated location (locations run 1..size()).
  Location size() const { return cells_.size(); }

  template <class F>
  void for_each_promise(F&& f) const {
    for (Location l = 1; l <= size(); ++l)
      if (auto* p = std::get_if<Promise>(&cells_[l - 1])) f(l, *p);
  }

 private:
  using Cell = std::variant<Frame, EnvRecord, Promise>;
  std::vector<Cell> cells_;
};

struct FoundBinding {
  Value value;
  Location frame;
};

// Walks the chain innermost-out; nullopt when unbound.
std::optional<FoundBinding> lookup_get(const Heap& heap, const Env& env,
                                       const std::string& name);

// ---------------------------------------------------------------------------
// Machine state

// Pending context around the focus, innermost last. Each entry keeps the
// source span of the node it came from for diagnostics.
struct CtxConcatL {
  ExprPtr right;
  SourceSpan span;
};
struct CtxConcatR {
  Value left;
  SourceSpan span;
};
struct CtxAssignRhs {
  std::string name;
  SourceSpan span;
};
struct CtxCallHead {
  std::vector<ExprPtr> args;
  SourceSpan span;
};
struct CtxEvalCode {
  ExprPtr env_expr;
  SourceSpan span;
};
struct CtxEvalEnv {
  Value code;
  SourceSpan span;
};
struct CtxDelayEnv {
  std::string name;
  ExprPtr code;
  SourceSpan span;
};
struct CtxBlockRest {
  std::vector<ExprPtr> exprs;
  std::size_t next;
  SourceSpan span;
};

using CtxFrame =
    std::variant<CtxConcatL, CtxConcatR, CtxAssignRhs, CtxCallHead, CtxEvalCode,
                 CtxEvalEnv, CtxDelayEnv, CtxBlockRest>;

enum class FrameKind { Plain, PromiseForce, EvalCall, CallReturn };

using Focus = std::variant<ExprPtr, Value>;

struct StackFrame {
  FrameKind kind = FrameKind::Plain;
  Env env;
  Focus focus;
  std::vector<CtxFrame> ctx;
  CallId call_id = 0;    // CallReturn frames
  Location promise = 0;  // PromiseForce frames
};

struct MachineState {
  std::vector<StackFrame> stack;
  Heap heap;
  std::uint64_t steps = 0;
  CallId next_call_id = 1;
  std::optional<Value> result;  // set when the run reaches a terminal state
};

// Fresh state: one global frame on the heap, the program as the focus of the
// single bottom stack frame.
MachineState initial_state(ExprPtr program);

// ---------------------------------------------------------------------------
// Errors

enum class ErrCode {
  UnboundVariable,
  NotAClosure,
  TypeError,
  ArityError,
  MissingDefault,
  PromiseCycle,
  ParseErrorInEval,
  StepLimitExceeded,
};

const char* err_code_token(ErrCode c);  // e.g. "PROMISE_CYCLE"

struct RuntimeError : std::runtime_error {
  RuntimeError(ErrCode c, std::string msg, SourceSpan where)
      : std::runtime_error(std::move(msg)), code(c), span(where) {}
  ErrCode code;
  SourceSpan span;
};

// A broken machine invariant; never raised by well-formed programs.
struct InternalError : std::logic_error {
  using std::logic_error::logic_error;
};

// ---------------------------------------------------------------------------
// Stepping and hooks

enum class Rule {
  Fun,
  Concat,
  Assign,
  EnvCap,
  Delay,
  Subst,
  Eval,
  EvalRet,
  Invk,
  Ret,
  Lookup,
  Lookup2,
  Force,
  ReadVal,
  Memo,
  RetProm,
  Seq,
};

const char* rule_name(Rule r);

struct PromCreateRec {
  Location loc = 0;
  PromKind kind = PromKind::Arg;
  CallId creating_call = 0;
  std::string param;
  ExprPtr exp;
};

// What a single rule application did, for observers. Only the fields relevant
// to the fired rule are populated.
struct StepRecord {
  Rule rule{};
  CallId call_id = 0;                  // Invk, Ret
  SourceSpan closure_span{};           // Invk
  std::uint32_t n_params = 0;          // Invk
  std::uint32_t n_args = 0;            // Invk
  std::vector<PromCreateRec> created;  // Invk (one per param), Delay (one)
  Location promise = 0;                // Force, ReadVal, Memo, Subst
  std::vector<Location> promise_env;   // Force: frames of the promise's env
  Location frame = 0;                  // Assign, Lookup, Lookup2: frame touched
  std::string var;                     // Assign, Lookup, Lookup2
  bool var_existed = false;            // Assign: overwrite vs fresh binding
  Location eval_env = 0;               // Eval
};

class TracerHooks {
 public:
  virtual ~TracerHooks() = default;
  virtual void on_program_start(const std::string& name) { (void)name; }
  virtual void on_step(const StepRecord& rec) { (void)rec; }
  virtual void on_program_end(std::uint64_t steps,
                              const std::optional<ErrCode>& error) {
    (void)steps;
    (void)error;
  }
  // Called after each step when RunConfig::validate is set.
  virtual void on_debug_state(const MachineState& st) { (void)st; }
};

TracerHooks& null_hooks();

struct RunConfig {
  std::string name = "<program>";
  std::uint64_t max_steps = 1'000'000;
  bool validate = false;
};

struct RunError {
  ErrCode code;
  std::string message;
  SourceSpan span;
};

struct Outcome {
  std::optional<Value> value;
  std::optional<RunError> error;
  std::uint64_t steps = 0;

  bool ok() const { return value.has_value(); }
};

// Applies exactly one rule, or detects the terminal state (returns false and
// fills st.result without consuming a step). Throws RuntimeError, including
// StepLimitExceeded when a rule is pending at the step budget.
bool step(MachineState& st, const RunConfig& cfg, TracerHooks& hooks);

Outcome run(const ExprPtr& program, const RunConfig& cfg,
            TracerHooks& hooks = null_hooks());

// Full sweep of promise and stack invariants; throws InternalError.
void validate_state(const MachineState& st);

}  // namespace lazycore
