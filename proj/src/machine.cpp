// Small-step call-by-need machine.
//
// Each stack frame evaluates one expression. Within a frame the focus walks
// the unique strict position (concat operands left to right, assignment
// right-hand side, callee, both eval operands, the environment operand of
// delayedAssign, block elements in order); that walk is bookkeeping, not a
// step. A step is the application of exactly one rule:
//
//   Fun      function literal  -> closure capturing the current environment
//   Concat   "a" + "b"         -> "ab"            (both operands strings)
//   Assign   x <- v            -> v, binds x in the top frame
//   EnvCap   environment()     -> fresh environment value
//   Delay    delayedAssign     -> fresh promise bound in the target env
//   Subst    substitute(x)     -> source text of x's promise expression
//   Eval     eval(s, env)      -> pushes the parsed code in env
//   EvalRet  value of eval'd code replaces the eval form
//   Invk     call              -> fresh frame, one promise per parameter
//   Ret      body value replaces the call form
//   Lookup   variable bound to a plain value -> that value
//   Lookup2  variable bound to a promise -> promise frame pushed
//   Force    unevaluated promise: mark forcing, push its expression
//   ReadVal  memoized promise -> cached value
//   Memo     body value stored in the promise, env cleared, flag unset
//   RetProm  promise value replaces the variable occurrence
//   Seq      drop a finished non-final block element / collapse { v }
//
// Argument promises capture the caller environment, default-expression
// promises the callee environment, delayedAssign promises the environment
// current at the delay site. Memoization keeps the expression (substitute
// still works on forced promises) but drops the environment.

#include "lazycore/machine.hpp"

#include <cassert>
#include <utility>

#include "lazycore/deparse.hpp"
#include "lazycore/parser.hpp"

namespace lazycore {

// ---------------------------------------------------------------------------
// Heap

const Value* Frame::find(const std::string& name) const {
  for (const auto& [k, v] : slots)
    if (k == name) return &v;
  return nullptr;
}

bool Frame::bind(const std::string& name, Value v) {
  for (auto& [k, slot] : slots) {
    if (k == name) {
      slot = std::move(v);
      return true;
    }
  }
  slots.emplace_back(name, std::move(v));
  return false;
}

Location Heap::alloc_frame() {
  cells_.emplace_back(Frame{});
  return cells_.size();
}

Location Heap::alloc_env(Env e) {
  cells_.emplace_back(EnvRecord{std::move(e)});
  return cells_.size();
}

Location Heap::alloc_promise(Promise p) {
  cells_.emplace_back(std::move(p));
  return cells_.size();
}

namespace {

template <class T>
T& cell_as(std::vector<std::variant<Frame, EnvRecord, Promise>>& cells,
           Location l, const char* what) {
  if (l == 0 || l > cells.size())
    throw InternalError(std::string("bad heap location for ") + what);
  T* p = std::get_if<T>(&cells[l - 1]);
  if (!p) throw InternalError(std::string("heap cell is not a ") + what);
  return *p;
}

}  // namespace

Frame& Heap::frame(Location l) { return cell_as<Frame>(cells_, l, "frame"); }
const Frame& Heap::frame(Location l) const {
  return const_cast<Heap*>(this)->frame(l);
}
EnvRecord& Heap::env_record(Location l) {
  return cell_as<EnvRecord>(cells_, l, "environment record");
}
const EnvRecord& Heap::env_record(Location l) const {
  return const_cast<Heap*>(this)->env_record(l);
}
Promise& Heap::promise(Location l) {
  return cell_as<Promise>(cells_, l, "promise");
}
const Promise& Heap::promise(Location l) const {
  return const_cast<Heap*>(this)->promise(l);
}

bool Heap::is_env_record(Location l) const {
  return l >= 1 && l <= cells_.size() &&
         std::holds_alternative<EnvRecord>(cells_[l - 1]);
}

bool Heap::is_promise(Location l) const {
  return l >= 1 && l <= cells_.size() &&
         std::holds_alternative<Promise>(cells_[l - 1]);
}

std::optional<FoundBinding> lookup_get(const Heap& heap, const Env& env,
                                       const std::string& name) {
  for (Location l : env.frames)
    if (const Value* v = heap.frame(l).find(name))
      return FoundBinding{*v, l};
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Misc

const char* err_code_token(ErrCode c) {
  switch (c) {
    case ErrCode::UnboundVariable: return "UNBOUND_VARIABLE";
    case ErrCode::NotAClosure: return "NOT_A_CLOSURE";
    case ErrCode::TypeError: return "TYPE_ERROR";
    case ErrCode::ArityError: return "ARITY_ERROR";
    case ErrCode::MissingDefault: return "MISSING_DEFAULT";
    case ErrCode::PromiseCycle: return "PROMISE_CYCLE";
    case ErrCode::ParseErrorInEval: return "PARSE_ERROR_IN_EVAL";
    case ErrCode::StepLimitExceeded: return "STEP_LIMIT_EXCEEDED";
  }
  return "UNKNOWN";
}

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::Fun: return "Fun";
    case Rule::Concat: return "Concat";
    case Rule::Assign: return "Assign";
    case Rule::EnvCap: return "EnvCap";
    case Rule::Delay: return "Delay";
    case Rule::Subst: return "Subst";
    case Rule::Eval: return "Eval";
    case Rule::EvalRet: return "EvalRet";
    case Rule::Invk: return "Invk";
    case Rule::Ret: return "Ret";
    case Rule::Lookup: return "Lookup";
    case Rule::Lookup2: return "Lookup2";
    case Rule::Force: return "Force";
    case Rule::ReadVal: return "ReadVal";
    case Rule::Memo: return "Memo";
    case Rule::RetProm: return "RetProm";
    case Rule::Seq: return "Seq";
  }
  return "?";
}

std::string render_value(const Value& v) {
  if (const auto* s = value_as<StrV>(v)) return quote_string(s->s);
  if (const auto* c = value_as<ClosureV>(v)) {
    ExprPtr fn = make_expr(FunctionLit{c->fn->params, c->fn->body},
                           c->fn->def_span);
    return deparse(fn);
  }
  if (const auto* e = value_as<EnvV>(v))
    return "<environment " + std::to_string(e->loc) + ">";
  const auto* p = value_as<PromV>(v);
  return "<promise " + std::to_string(p->loc) + ">";
}

TracerHooks& null_hooks() {
  static TracerHooks hooks;
  return hooks;
}

MachineState initial_state(ExprPtr program) {
  MachineState st;
  Location global = st.heap.alloc_frame();
  st.stack.push_back(StackFrame{FrameKind::Plain, Env{{global}},
                                Focus{std::move(program)},
                                {}, 0, 0});
  return st;
}

// ---------------------------------------------------------------------------
// Stepping

namespace {

const Value& as_value(const Focus& f) { return std::get<Value>(f); }

// Innermost active call, for promise origins.
CallId current_call(const MachineState& st) {
  for (auto it = st.stack.rbegin(); it != st.stack.rend(); ++it)
    if (it->kind == FrameKind::CallReturn) return it->call_id;
  return 0;
}

void require_not_promise(const Value& v, const char* rule) {
  if (value_as<PromV>(v))
    throw InternalError(std::string("promise value surfaced as a result in ") +
                        rule);
}

// Moves the focus to the next redex without consuming steps. Returns false
// when the frame is fully evaluated (focus is a value, context empty).
bool descend(StackFrame& top) {
  for (;;) {
    if (const ExprPtr* pe = std::get_if<ExprPtr>(&top.focus)) {
      const ExprPtr& e = *pe;
      if (const auto* s = expr_as<StrLit>(e)) {
        top.focus = Value{StrV{s->text}};
        continue;
      }
      if (const auto* c = expr_as<Concat>(e)) {
        ExprPtr lhs = c->lhs;
        top.ctx.push_back(CtxConcatL{c->rhs, e->span});
        top.focus = std::move(lhs);
        continue;
      }
      if (const auto* a = expr_as<Assign>(e)) {
        ExprPtr rhs = a->rhs;
        top.ctx.push_back(CtxAssignRhs{a->name, e->span});
        top.focus = std::move(rhs);
        continue;
      }
      if (const auto* c = expr_as<CallExpr>(e)) {
        ExprPtr callee = c->callee;
        top.ctx.push_back(CtxCallHead{c->args, e->span});
        top.focus = std::move(callee);
        continue;
      }
      if (const auto* ev = expr_as<EvalExpr>(e)) {
        ExprPtr code = ev->code;
        top.ctx.push_back(CtxEvalCode{ev->env, e->span});
        top.focus = std::move(code);
        continue;
      }
      if (const auto* d = expr_as<DelayedAssignExpr>(e)) {
        ExprPtr env = d->env;
        top.ctx.push_back(CtxDelayEnv{d->name, d->code, e->span});
        top.focus = std::move(env);
        continue;
      }
      if (const auto* b = expr_as<Block>(e)) {
        ExprPtr first = b->exprs.front();
        top.ctx.push_back(CtxBlockRest{b->exprs, 1, e->span});
        top.focus = std::move(first);
        continue;
      }
      return true;  // Var, FunctionLit, EnvCapture, SubstituteExpr: redexes
    }
    // Focus is a value: shift through contexts that have more to evaluate.
    if (top.ctx.empty()) return false;
    CtxFrame& inner = top.ctx.back();
    if (auto* cl = std::get_if<CtxConcatL>(&inner)) {
      ExprPtr right = cl->right;
      CtxConcatR next{as_value(top.focus), cl->span};
      inner = std::move(next);
      top.focus = std::move(right);
      continue;
    }
    if (auto* ec = std::get_if<CtxEvalCode>(&inner)) {
      ExprPtr env_expr = ec->env_expr;
      CtxEvalEnv next{as_value(top.focus), ec->span};
      inner = std::move(next);
      top.focus = std::move(env_expr);
      continue;
    }
    return true;  // remaining contexts hold a redex
  }
}

}  // namespace

bool step(MachineState& st, const RunConfig& cfg, TracerHooks& hooks) {
  if (st.stack.empty()) throw InternalError("empty machine stack");

  const bool redex = descend(st.stack.back());

  // Terminal: the bottom frame is fully evaluated.
  if (!redex && st.stack.size() == 1) {
    const Value& v = as_value(st.stack.back().focus);
    require_not_promise(v, "Terminal");
    if (!st.stack.back().ctx.empty())
      throw InternalError("terminal frame has pending context");
    st.result = v;
    return false;
  }

  if (st.steps >= cfg.max_steps) {
    SourceSpan where{};
    const StackFrame& t = st.stack.back();
    if (const ExprPtr* pe = std::get_if<ExprPtr>(&t.focus))
      where = (*pe)->span;
    else if (!t.ctx.empty())
      where = std::visit([](const auto& c) { return c.span; }, t.ctx.back());
    throw RuntimeError(ErrCode::StepLimitExceeded, "step limit exceeded",
                       where);
  }

  StepRecord rec;
  StackFrame& top = st.stack.back();

  auto finish = [&](Rule rule) {
    rec.rule = rule;
    ++st.steps;
    hooks.on_step(rec);
  };

  if (!redex) {
    // Frame fully evaluated; return its value to the frame below.
    const Value v = as_value(top.focus);
    switch (top.kind) {
      case FrameKind::Plain: {
        // Pushed by Force: the frame below must be the promise being forced.
        StackFrame& below = st.stack[st.stack.size() - 2];
        if (below.kind != FrameKind::PromiseForce)
          throw InternalError("plain frame not above a promise frame");
        Promise& p = st.heap.promise(below.promise);
        if (!p.forcing || p.val.has_value())
          throw InternalError("memoizing a promise that is not being forced");
        require_not_promise(v, "Memo");
        p.val = v;
        p.env.reset();
        p.forcing = false;
        rec.promise = below.promise;
        below.focus = v;
        st.stack.pop_back();
        finish(Rule::Memo);
        return true;
      }
      case FrameKind::PromiseForce: {
        if (const auto* pv = value_as<PromV>(v)) {
          // The promise value itself is in focus: force or read it.
          Promise& p = st.heap.promise(pv->loc);
          if (p.val.has_value()) {
            top.focus = *p.val;
            rec.promise = pv->loc;
            finish(Rule::ReadVal);
            return true;
          }
          if (p.forcing)
            throw RuntimeError(ErrCode::PromiseCycle,
                               "promise depends on its own value",
                               p.exp ? p.exp->span : SourceSpan{});
          if (!p.env.has_value())
            throw InternalError("unforced promise lost its environment");
          p.forcing = true;
          rec.promise = pv->loc;
          rec.promise_env = p.env->frames;
          Env body_env = *p.env;
          ExprPtr body = p.exp;
          st.stack.push_back(StackFrame{FrameKind::Plain, std::move(body_env),
                                        Focus{std::move(body)}, {}, 0, 0});
          finish(Rule::Force);
          return true;
        }
        // Plain value: hand it back to the variable occurrence below.
        StackFrame& below = st.stack[st.stack.size() - 2];
        const ExprPtr* below_focus = std::get_if<ExprPtr>(&below.focus);
        if (!below_focus || !expr_as<Var>(*below_focus))
          throw InternalError("promise frame not above a variable occurrence");
        require_not_promise(v, "RetProm");
        below.focus = v;
        st.stack.pop_back();
        finish(Rule::RetProm);
        return true;
      }
      case FrameKind::CallReturn: {
        StackFrame& below = st.stack[st.stack.size() - 2];
        if (below.ctx.empty() ||
            !std::holds_alternative<CtxCallHead>(below.ctx.back()))
          throw InternalError("call frame not above a call site");
        rec.call_id = top.call_id;
        below.ctx.pop_back();
        below.focus = v;
        st.stack.pop_back();
        finish(Rule::Ret);
        return true;
      }
      case FrameKind::EvalCall: {
        StackFrame& below = st.stack[st.stack.size() - 2];
        if (below.ctx.empty() ||
            !std::holds_alternative<CtxEvalEnv>(below.ctx.back()))
          throw InternalError("eval frame not above an eval site");
        below.ctx.pop_back();
        below.focus = v;
        st.stack.pop_back();
        finish(Rule::EvalRet);
        return true;
      }
    }
    throw InternalError("unhandled frame kind");
  }

  // A redex is in focus.
  if (const ExprPtr* pe = std::get_if<ExprPtr>(&top.focus)) {
    const ExprPtr& e = *pe;

    if (const auto* var = expr_as<Var>(e)) {
      auto found = lookup_get(st.heap, top.env, var->name);
      if (!found)
        throw RuntimeError(ErrCode::UnboundVariable,
                           "unbound variable '" + var->name + "'", e->span);
      rec.frame = found->frame;
      rec.var = var->name;
      if (const auto* pv = value_as<PromV>(found->value)) {
        Env reader_env = top.env;
        st.stack.push_back(StackFrame{FrameKind::PromiseForce,
                                      std::move(reader_env),
                                      Focus{Value{PromV{pv->loc}}},
                                      {}, 0, pv->loc});
        finish(Rule::Lookup2);
        return true;
      }
      top.focus = found->value;
      finish(Rule::Lookup);
      return true;
    }

    if (const auto* fn = expr_as<FunctionLit>(e)) {
      auto data = std::make_shared<ClosureData>(
          ClosureData{fn->params, fn->body, top.env, e->span});
      top.focus = Value{ClosureV{std::move(data)}};
      finish(Rule::Fun);
      return true;
    }

    if (expr_as<EnvCapture>(e)) {
      Location l = st.heap.alloc_env(top.env);
      top.focus = Value{EnvV{l}};
      finish(Rule::EnvCap);
      return true;
    }

    if (const auto* sub = expr_as<SubstituteExpr>(e)) {
      auto found = lookup_get(st.heap, top.env, sub->name);
      if (!found)
        throw RuntimeError(ErrCode::UnboundVariable,
                           "unbound variable '" + sub->name + "'", e->span);
      const auto* pv = value_as<PromV>(found->value);
      if (!pv)
        throw RuntimeError(
            ErrCode::TypeError,
            "substitute target '" + sub->name + "' is not a promise", e->span);
      rec.promise = pv->loc;
      top.focus = Value{StrV{deparse(st.heap.promise(pv->loc).exp)}};
      finish(Rule::Subst);
      return true;
    }

    throw InternalError("descend stopped on a non-redex expression");
  }

  // Focus is a value under a context frame.
  const Value v = as_value(top.focus);
  CtxFrame& inner = top.ctx.back();

  if (auto* cr = std::get_if<CtxConcatR>(&inner)) {
    const auto* ls = value_as<StrV>(cr->left);
    const auto* rs = value_as<StrV>(v);
    if (!ls || !rs)
      throw RuntimeError(ErrCode::TypeError, "'+' needs string operands",
                         cr->span);
    top.focus = Value{StrV{ls->s + rs->s}};
    top.ctx.pop_back();
    finish(Rule::Concat);
    return true;
  }

  if (auto* ar = std::get_if<CtxAssignRhs>(&inner)) {
    Location frame_loc = top.env.frames.front();
    rec.frame = frame_loc;
    rec.var = ar->name;
    rec.var_existed = st.heap.frame(frame_loc).bind(ar->name, v);
    top.focus = v;
    top.ctx.pop_back();
    finish(Rule::Assign);
    return true;
  }

  if (auto* br = std::get_if<CtxBlockRest>(&inner)) {
    if (br->next < br->exprs.size()) {
      top.focus = br->exprs[br->next];
      ++br->next;
    } else {
      top.focus = v;
      top.ctx.pop_back();
    }
    finish(Rule::Seq);
    return true;
  }

  if (auto* dl = std::get_if<CtxDelayEnv>(&inner)) {
    const auto* target = value_as<EnvV>(v);
    if (!target || !st.heap.is_env_record(target->loc))
      throw RuntimeError(ErrCode::TypeError,
                         "delayedAssign target is not an environment",
                         dl->span);
    PromOrigin origin{PromKind::Delayed, current_call(st), ""};
    Location prom = st.heap.alloc_promise(
        Promise{std::nullopt, dl->code, top.env, false, origin});
    Env target_env = st.heap.env_record(target->loc).env;
    st.heap.frame(target_env.frames.front())
        .bind(dl->name, Value{PromV{prom}});
    rec.created.push_back(
        PromCreateRec{prom, PromKind::Delayed, origin.call, "", dl->code});
    top.focus = v;  // result is the environment value
    top.ctx.pop_back();
    finish(Rule::Delay);
    return true;
  }

  if (auto* ee = std::get_if<CtxEvalEnv>(&inner)) {
    const auto* code = value_as<StrV>(ee->code);
    if (!code)
      throw RuntimeError(ErrCode::TypeError, "eval code operand is not a string",
                         ee->span);
    const auto* envv = value_as<EnvV>(v);
    if (!envv || !st.heap.is_env_record(envv->loc))
      throw RuntimeError(ErrCode::TypeError,
                         "eval environment operand is not an environment",
                         ee->span);
    ExprPtr parsed;
    try {
      parsed = parse(code->s);
    } catch (const ParseError& pe) {
      throw RuntimeError(ErrCode::ParseErrorInEval,
                         std::string("parse error in eval: ") + pe.what(),
                         ee->span);
    }
    rec.eval_env = envv->loc;
    Env eval_env = st.heap.env_record(envv->loc).env;
    // The CtxEvalEnv entry stays on this frame; EvalRet pops it when the
    // pushed frame finishes, exactly as Ret pops the CtxCallHead entry.
    st.stack.push_back(StackFrame{FrameKind::EvalCall, std::move(eval_env),
                                  Focus{std::move(parsed)}, {}, 0, 0});
    finish(Rule::Eval);
    return true;
  }

  if (auto* ch = std::get_if<CtxCallHead>(&inner)) {
    const auto* clo = value_as<ClosureV>(v);
    if (!clo)
      throw RuntimeError(ErrCode::NotAClosure, "call target is not a function",
                         ch->span);
    const auto& fn = *clo->fn;
    const std::size_t n = fn.params.size();
    const std::size_t k = ch->args.size();
    if (k > n)
      throw RuntimeError(ErrCode::ArityError,
                         "too many arguments: got " + std::to_string(k) +
                             ", function takes " + std::to_string(n),
                         ch->span);
    for (std::size_t i = k; i < n; ++i)
      if (!fn.params[i].def)
        throw RuntimeError(ErrCode::MissingDefault,
                           "missing argument '" + fn.params[i].name +
                               "' and no default",
                           ch->span);

    const CallId call = st.next_call_id++;
    const Location frame_loc = st.heap.alloc_frame();
    Env callee_env = fn.env;
    callee_env.frames.insert(callee_env.frames.begin(), frame_loc);

    rec.call_id = call;
    rec.closure_span = fn.def_span;
    rec.n_params = static_cast<std::uint32_t>(n);
    rec.n_args = static_cast<std::uint32_t>(k);
    rec.frame = frame_loc;

    for (std::size_t i = 0; i < n; ++i) {
      const bool supplied = i < k;
      ExprPtr exp = supplied ? ch->args[i] : fn.params[i].def;
      Env prom_env = supplied ? top.env : callee_env;
      PromKind kind = supplied ? PromKind::Arg : PromKind::Default;
      PromOrigin origin{kind, call, fn.params[i].name};
      Location prom = st.heap.alloc_promise(
          Promise{std::nullopt, exp, std::move(prom_env), false, origin});
      st.heap.frame(frame_loc).bind(fn.params[i].name, Value{PromV{prom}});
      rec.created.push_back(
          PromCreateRec{prom, kind, call, fn.params[i].name, exp});
    }

    ExprPtr body = fn.body;
    st.stack.push_back(StackFrame{FrameKind::CallReturn, std::move(callee_env),
                                  Focus{std::move(body)}, {}, call, 0});
    finish(Rule::Invk);
    return true;
  }

  throw InternalError("no rule applies to the current state");
}

Outcome run(const ExprPtr& program, const RunConfig& cfg, TracerHooks& hooks) {
  MachineState st = initial_state(program);
  hooks.on_program_start(cfg.name);
  Outcome out;
  try {
    for (;;) {
      bool advanced = step(st, cfg, hooks);
      if (cfg.validate) {
        validate_state(st);
        hooks.on_debug_state(st);
      }
      if (!advanced) break;
    }
    out.value = st.result;
    out.steps = st.steps;
    hooks.on_program_end(st.steps, std::nullopt);
  } catch (const RuntimeError& err) {
    out.error = RunError{err.code, err.what(), err.span};
    out.steps = st.steps;
    hooks.on_program_end(st.steps, err.code);
  }
  return out;
}

void validate_state(const MachineState& st) {
  if (st.stack.empty()) throw InternalError("empty machine stack");
  if (st.stack.front().kind != FrameKind::Plain)
    throw InternalError("bottom frame is not plain");
  st.heap.for_each_promise([](Location l, const Promise& p) {
    if (p.val.has_value()) {
      if (p.env.has_value())
        throw InternalError("memoized promise " + std::to_string(l) +
                            " kept its environment");
      if (p.forcing)
        throw InternalError("memoized promise " + std::to_string(l) +
                            " still marked forcing");
      if (value_as<PromV>(*p.val))
        throw InternalError("promise " + std::to_string(l) +
                            " memoized a promise value");
    } else if (!p.forcing && !p.env.has_value()) {
      throw InternalError("unforced promise " + std::to_string(l) +
                          " lost its environment");
    }
  });
  for (std::size_t i = 0; i < st.stack.size(); ++i) {
    const StackFrame& f = st.stack[i];
    if (f.kind == FrameKind::PromiseForce && f.promise == 0)
      throw InternalError("promise frame without a promise location");
    if (f.env.frames.empty())
      throw InternalError("stack frame with an empty environment");
  }
}

}  // namespace lazycore
