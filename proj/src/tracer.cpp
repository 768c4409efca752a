#include "lazycore/tracer.hpp"

#include <algorithm>

#include "lazycore/deparse.hpp"

namespace lazycore {

void Tracer::on_program_start(const std::string& name) {
  emit(ProgramStart{name});
}

void Tracer::on_program_end(std::uint64_t steps,
                            const std::optional<ErrCode>& error) {
  emit(ProgramEnd{steps, error});
}

std::uint64_t Tracer::prom_id(Location loc) const {
  auto it = promises_.find(loc);
  if (it == promises_.end())
    throw InternalError("trace event for an unannounced promise");
  return it->second.id;
}

CallId Tracer::active_call() const {
  return shadow_.empty() ? 0 : shadow_.back();
}

std::uint64_t Tracer::active_prom() const {
  return forcing_.empty() ? 0 : forcing_.back().id;
}

Locality Tracer::locality_of_write(Location frame) const {
  if (forcing_.empty()) return Locality::None;
  const auto& env = forcing_.back().env;
  if (!env.empty() && frame == env.front()) return Locality::Local;
  if (std::find(env.begin() + 1, env.end(), frame) != env.end())
    return Locality::Lexical;
  return Locality::Other;
}

// Calls sitting strictly between the creating call and the innermost call.
// A promise forced straight in its own call reports 0; one created at the
// top level, or whose creating call already returned, reports the whole
// current stack depth.
std::uint32_t Tracer::force_depth(CallId creating_call) const {
  if (creating_call != 0) {
    for (std::size_t i = shadow_.size(); i-- > 0;)
      if (shadow_[i] == creating_call)
        return static_cast<std::uint32_t>(shadow_.size() - 1 - i);
  }
  return static_cast<std::uint32_t>(shadow_.size());
}

void Tracer::record_create(const PromCreateRec& c) {
  PromInfo info{next_prom_id_++, c.creating_call};
  promises_[c.loc] = info;
  emit(PromCreate{info.id, c.creating_call, c.param, c.kind,
                  classify_expr(c.exp), deparse(c.exp)});
}

void Tracer::on_step(const StepRecord& rec) {
  switch (rec.rule) {
    case Rule::Invk:
      emit(CallEnter{rec.call_id, rec.closure_span, rec.n_params, rec.n_args});
      for (const auto& c : rec.created) record_create(c);
      shadow_.push_back(rec.call_id);
      return;
    case Rule::Ret:
      if (shadow_.empty() || shadow_.back() != rec.call_id)
        throw InternalError("shadow stack out of sync on call return");
      shadow_.pop_back();
      emit(CallExit{rec.call_id});
      return;
    case Rule::Delay:
      record_create(rec.created.front());
      return;
    case Rule::Force: {
      auto it = promises_.find(rec.promise);
      if (it == promises_.end())
        throw InternalError("forcing an unannounced promise");
      emit(PromForceEnter{it->second.id, active_call(),
                          force_depth(it->second.creating_call)});
      forcing_.push_back(
          ForcingEntry{rec.promise, it->second.id, rec.promise_env});
      return;
    }
    case Rule::Memo:
      if (forcing_.empty() || forcing_.back().loc != rec.promise)
        throw InternalError("forcing stack out of sync on memoization");
      emit(PromForceExit{forcing_.back().id});
      forcing_.pop_back();
      return;
    case Rule::ReadVal:
      emit(PromRead{prom_id(rec.promise), active_call()});
      return;
    case Rule::Subst:
      emit(PromMeta{prom_id(rec.promise), active_call()});
      return;
    case Rule::Assign: {
      Locality loc = locality_of_write(rec.frame);
      if (rec.var_existed)
        emit(VarWrite{rec.frame, rec.var, loc, active_prom()});
      else
        emit(VarDef{rec.frame, rec.var, loc, active_prom()});
      return;
    }
    case Rule::Lookup:
    case Rule::Lookup2:
      emit(VarRead{rec.frame, rec.var});
      return;
    case Rule::Eval:
      emit(EvalEnter{rec.eval_env});
      return;
    case Rule::EvalRet:
      emit(EvalExit{});
      return;
    case Rule::Fun:
    case Rule::Concat:
    case Rule::EnvCap:
    case Rule::RetProm:
    case Rule::Seq:
      return;
  }
}

void Tracer::on_debug_state(const MachineState& st) {
  std::vector<CallId> machine_calls;
  std::vector<Location> machine_forcing;
  for (std::size_t i = 0; i < st.stack.size(); ++i) {
    const StackFrame& f = st.stack[i];
    if (f.kind == FrameKind::CallReturn) machine_calls.push_back(f.call_id);
    // A promise frame has dispatched its force only once the body frame sits
    // above it; a bare one on top may be about to read, force, or cycle.
    if (f.kind == FrameKind::PromiseForce && i + 1 < st.stack.size() &&
        st.heap.promise(f.promise).forcing)
      machine_forcing.push_back(f.promise);
  }
  if (machine_calls != shadow_)
    throw InternalError("shadow call stack diverged from the machine stack");
  std::vector<Location> tracer_forcing;
  for (const auto& e : forcing_) tracer_forcing.push_back(e.loc);
  if (machine_forcing != tracer_forcing)
    throw InternalError("forcing stack diverged from the machine stack");
}

}  // namespace lazycore
