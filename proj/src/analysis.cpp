#include "lazycore/analysis.hpp"

#include <algorithm>
#include <fstream>
#include <utility>

#include "lazycore/trace_io.hpp"

namespace lazycore {

namespace {

std::size_t kind_index(PromKind k) {
  switch (k) {
    case PromKind::Arg: return 0;
    case PromKind::Default: return 1;
    case PromKind::Delayed: return 2;
  }
  return 0;
}

std::size_t class_index(ExprClass c) {
  switch (c) {
    case ExprClass::Sym: return 0;
    case ExprClass::Const: return 1;
    case ExprClass::Call: return 2;
    case ExprClass::Other: return 3;
  }
  return 3;
}

std::size_t usage_index(MetaUsage u) {
  switch (u) {
    case MetaUsage::Unused: return 0;
    case MetaUsage::ValueOnly: return 1;
    case MetaUsage::MetaOnly: return 2;
    case MetaUsage::MetaAndValue: return 3;
  }
  return 0;
}

std::size_t strictness_index(ParamStrictness s) {
  switch (s) {
    case ParamStrictness::Always: return 0;
    case ParamStrictness::Sometimes: return 1;
    case ParamStrictness::Never: return 2;
  }
  return 0;
}

}  // namespace

bool lifecycle_ok(std::string_view lifecycle) {
  std::size_t i = 0;
  bool seen_e = false;
  while (i < lifecycle.size() && lifecycle[i] == 'M') ++i;
  if (i < lifecycle.size() && lifecycle[i] == 'E') {
    seen_e = true;
    ++i;
    while (i < lifecycle.size() && lifecycle[i] == 'M') ++i;
  }
  if (i == lifecycle.size()) return true;
  if (lifecycle[i] != 'F') return false;
  for (++i; i < lifecycle.size(); ++i) {
    char c = lifecycle[i];
    if (c == 'R' || c == 'M') continue;
    if (c == 'E' && !seen_e) {
      seen_e = true;
      continue;
    }
    return false;
  }
  return true;
}

MetaUsage meta_usage(const PromiseRecord& rec) {
  bool value = rec.lifecycle.find('F') != std::string::npos ||
               rec.lifecycle.find('R') != std::string::npos;
  bool meta = rec.lifecycle.find('M') != std::string::npos;
  if (value && meta) return MetaUsage::MetaAndValue;
  if (meta) return MetaUsage::MetaOnly;
  if (value) return MetaUsage::ValueOnly;
  return MetaUsage::Unused;
}

const char* meta_usage_token(MetaUsage u) {
  switch (u) {
    case MetaUsage::Unused: return "UNUSED";
    case MetaUsage::ValueOnly: return "VALUE_ONLY";
    case MetaUsage::MetaOnly: return "META_ONLY";
    case MetaUsage::MetaAndValue: return "META_AND_VALUE";
  }
  return "UNUSED";
}

const char* param_strictness_token(ParamStrictness s) {
  switch (s) {
    case ParamStrictness::Always: return "ALWAYS";
    case ParamStrictness::Sometimes: return "SOMETIMES";
    case ParamStrictness::Never: return "NEVER";
  }
  return "ALWAYS";
}

// ---------------------------------------------------------------------------
// Reducer

void Reducer::fail(const std::string& msg) const {
  throw TraceInvariantError("event " + std::to_string(events_seen_) + ": " + msg);
}

Reducer::PromState& Reducer::known_prom(std::uint64_t id, const char* who) {
  auto it = proms_.find(id);
  if (it == proms_.end())
    fail(std::string(who) + " for unknown promise " + std::to_string(id));
  return it->second;
}

// Append one lifecycle letter, slipping the escape marker in first if this is
// the promise's first touch since its creating call returned.
void Reducer::touch(PromState& p, char letter) {
  if (!p.rec.escaped && p.rec.creating_call_id != 0 &&
      exited_calls_.count(p.rec.creating_call_id) != 0) {
    p.rec.lifecycle += 'E';
    p.rec.escaped = true;
  }
  p.rec.lifecycle += letter;
}

// Calls sitting strictly between the creating call and the top of the
// reconstructed stack; the whole stack when the promise is top level or its
// creating call is gone.
std::uint32_t Reducer::depth_of(CallId creating) const {
  if (creating != 0)
    for (std::size_t i = stack_.size(); i-- > 0;)
      if (stack_[i] == creating)
        return static_cast<std::uint32_t>(stack_.size() - 1 - i);
  return static_cast<std::uint32_t>(stack_.size());
}

void Reducer::accept(const TraceEvent& ev) {
  ++events_seen_;
  if (!started_) {
    const auto* ps = std::get_if<ProgramStart>(&ev);
    if (ps == nullptr) fail("first event is not PROGRAM_START");
    started_ = true;
    name_ = ps->name;
    return;
  }
  if (ended_) fail("event after PROGRAM_END");

  CallId innermost = stack_.empty() ? 0 : stack_.back();

  if (std::holds_alternative<ProgramStart>(ev)) {
    fail("duplicate PROGRAM_START");
  } else if (const auto* e = std::get_if<CallEnter>(&ev)) {
    if (calls_.count(e->call_id) != 0)
      fail("duplicate call id " + std::to_string(e->call_id));
    CallState cs;
    cs.span = e->closure_span;
    cs.n_params = e->n_params;
    calls_.emplace(e->call_id, std::move(cs));
    stack_.push_back(e->call_id);
  } else if (const auto* e = std::get_if<CallExit>(&ev)) {
    if (stack_.empty() || stack_.back() != e->call_id)
      fail("CALL_EXIT does not match the innermost open call");
    stack_.pop_back();
    calls_.at(e->call_id).exited = true;
    exited_calls_.insert(e->call_id);
  } else if (const auto* e = std::get_if<PromCreate>(&ev)) {
    if (proms_.count(e->prom_id) != 0)
      fail("duplicate promise id " + std::to_string(e->prom_id));
    if (e->creating_call != innermost)
      fail("promise created outside the innermost call");
    PromState ps;
    ps.rec.prom_id = e->prom_id;
    ps.rec.kind = e->kind;
    ps.rec.creating_call_id = e->creating_call;
    ps.rec.param_name = e->param;
    ps.rec.expr_class = e->expr_class;
    if (e->kind != PromKind::Delayed) {
      if (e->creating_call == 0) fail("parameter promise outside any call");
      CallState& cs = calls_.at(e->creating_call);
      if (cs.param_proms.size() >= cs.n_params)
        fail("more parameter promises than parameters");
      cs.param_proms.push_back(e->prom_id);
    }
    proms_.emplace(e->prom_id, std::move(ps));
  } else if (const auto* e = std::get_if<PromForceEnter>(&ev)) {
    PromState& p = known_prom(e->prom_id, "PROM_FORCE_ENTER");
    if (p.rec.force_depth.has_value())
      fail("promise " + std::to_string(e->prom_id) + " forced twice");
    if (e->active_call != innermost)
      fail("PROM_FORCE_ENTER active call disagrees with the call stack");
    std::uint32_t expect = depth_of(p.rec.creating_call_id);
    if (e->depth != expect)
      fail("force depth " + std::to_string(e->depth) + " should be " +
           std::to_string(expect));
    touch(p, 'F');
    p.rec.force_depth = e->depth;
    p.force_open = true;
    p.force_ordinal = ++force_counter_;
    forcing_.push_back(e->prom_id);
  } else if (const auto* e = std::get_if<PromForceExit>(&ev)) {
    if (forcing_.empty() || forcing_.back() != e->prom_id)
      fail("PROM_FORCE_EXIT does not match the innermost open force");
    PromState& p = known_prom(e->prom_id, "PROM_FORCE_EXIT");
    p.force_open = false;
    p.force_done = true;
    forcing_.pop_back();
  } else if (const auto* e = std::get_if<PromRead>(&ev)) {
    PromState& p = known_prom(e->prom_id, "PROM_READ");
    if (!p.force_done) fail("promise read before a completed force");
    if (e->active_call != innermost)
      fail("PROM_READ active call disagrees with the call stack");
    touch(p, 'R');
    ++p.rec.read_count;
  } else if (const auto* e = std::get_if<PromMeta>(&ev)) {
    PromState& p = known_prom(e->prom_id, "PROM_META");
    if (e->active_call != innermost)
      fail("PROM_META active call disagrees with the call stack");
    touch(p, 'M');
    ++p.rec.meta_count;
  } else if (std::holds_alternative<EvalEnter>(ev)) {
    ++eval_depth_;
  } else if (std::holds_alternative<EvalExit>(ev)) {
    if (eval_depth_ == 0) fail("EVAL_EXIT without a matching EVAL_ENTER");
    --eval_depth_;
  } else if (const auto* e = std::get_if<VarDef>(&ev)) {
    note_write(e->locality, e->active_prom);
  } else if (const auto* e = std::get_if<VarWrite>(&ev)) {
    note_write(e->locality, e->active_prom);
  } else if (std::holds_alternative<VarRead>(ev)) {
    // Reads carry no analysis weight.
  } else if (const auto* e = std::get_if<ProgramEnd>(&ev)) {
    ended_ = true;
    steps_ = e->steps;
    error_ = e->error;
    if (!error_ &&
        (!stack_.empty() || !forcing_.empty() || eval_depth_ != 0))
      fail("clean finish with open calls, forces or evals");
  }
}

void Reducer::note_write(Locality locality, std::uint64_t active_prom) {
  std::uint64_t expect = forcing_.empty() ? 0 : forcing_.back();
  if (active_prom != expect)
    fail("write attributed to promise " + std::to_string(active_prom) +
         " but the innermost force is " + std::to_string(expect));
  if (expect == 0) {
    if (locality != Locality::None)
      fail("write outside any force carries a locality");
    return;
  }
  PromState& p = proms_.at(expect);
  switch (locality) {
    case Locality::Local: ++p.rec.side_effects.local; break;
    case Locality::Lexical: ++p.rec.side_effects.lexical; break;
    case Locality::Other: ++p.rec.side_effects.other; break;
    case Locality::None:
      fail("write under a force lacks a locality");
  }
}

ReducedTrace Reducer::finish() {
  if (!started_) fail("trace has no events");
  if (!ended_) fail("trace is missing PROGRAM_END");

  ReducedTrace out;
  out.name = name_;
  out.steps = steps_;
  out.error = error_;

  out.promises.reserve(proms_.size());
  for (const auto& [id, p] : proms_) {
    if (!lifecycle_ok(p.rec.lifecycle))
      fail("promise " + std::to_string(id) + " lifecycle '" + p.rec.lifecycle +
           "' violates its grammar");
    out.promises.push_back(p.rec);
  }

  std::map<SourceSpan, FunctionFacts, SpanLess> by_span;
  for (const auto& [id, call] : calls_) {
    if (!call.exited) continue;  // aborted calls carry no strictness facts
    CallFacts cf;
    cf.n_params = call.n_params;
    std::vector<std::pair<std::uint64_t, std::uint32_t>> forced;
    for (std::size_t idx = 0; idx < call.param_proms.size(); ++idx) {
      const PromState& p = proms_.at(call.param_proms[idx]);
      if (p.rec.force_depth.has_value())
        forced.emplace_back(p.force_ordinal,
                            static_cast<std::uint32_t>(idx + 1));
    }
    std::sort(forced.begin(), forced.end());
    for (const auto& [ord, pos] : forced) cf.force_order.push_back(pos);
    FunctionFacts& ff = by_span[call.span];
    ff.def_span = call.span;
    ff.calls.push_back(std::move(cf));
  }
  out.functions.reserve(by_span.size());
  for (auto& [span, ff] : by_span) out.functions.push_back(std::move(ff));
  return out;
}

ReducedTrace reduce_events(const std::vector<TraceEvent>& events) {
  Reducer r;
  for (const TraceEvent& ev : events) r.accept(ev);
  return r.finish();
}

ReducedTrace reduce_trace_file(const std::string& path) {
  TraceReader reader(path);
  Reducer r;
  while (auto ev = reader.next()) r.accept(*ev);
  return r.finish();
}

// ---------------------------------------------------------------------------
// Strictness

std::vector<FunctionFacts> merge_function_facts(
    const std::vector<const ReducedTrace*>& parts) {
  std::map<SourceSpan, FunctionFacts, SpanLess> by_span;
  for (const ReducedTrace* part : parts) {
    for (const FunctionFacts& ff : part->functions) {
      FunctionFacts& dst = by_span[ff.def_span];
      dst.def_span = ff.def_span;
      dst.calls.insert(dst.calls.end(), ff.calls.begin(), ff.calls.end());
    }
  }
  std::vector<FunctionFacts> out;
  out.reserve(by_span.size());
  for (auto& [span, ff] : by_span) out.push_back(std::move(ff));
  return out;
}

std::vector<FunctionSummary> classify_strictness(
    const std::vector<FunctionFacts>& merged) {
  std::vector<FunctionSummary> out;
  out.reserve(merged.size());
  for (const FunctionFacts& ff : merged) {
    if (ff.calls.empty()) continue;
    FunctionSummary s;
    s.def_span = ff.def_span;
    s.call_count = ff.calls.size();

    std::uint32_t n_params = 0;
    for (const CallFacts& c : ff.calls) n_params = std::max(n_params, c.n_params);

    std::vector<std::uint64_t> forced_in(n_params, 0);
    for (const CallFacts& c : ff.calls) {
      for (std::uint32_t pos : c.force_order)
        if (pos >= 1 && pos <= n_params) ++forced_in[pos - 1];
      s.force_orders.insert(c.force_order);
    }
    s.params.reserve(n_params);
    for (std::uint32_t p = 0; p < n_params; ++p) {
      if (forced_in[p] == s.call_count)
        s.params.push_back(ParamStrictness::Always);
      else if (forced_in[p] == 0)
        s.params.push_back(ParamStrictness::Never);
      else
        s.params.push_back(ParamStrictness::Sometimes);
    }

    bool eligible = s.call_count >= 2 && n_params >= 1;
    bool all_always =
        std::all_of(s.params.begin(), s.params.end(),
                    [](ParamStrictness p) { return p == ParamStrictness::Always; });
    s.strict = eligible && all_always && s.force_orders.size() == 1;
    out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end(),
            [](const FunctionSummary& a, const FunctionSummary& b) {
              return SpanLess{}(a.def_span, b.def_span);
            });
  return out;
}

// ---------------------------------------------------------------------------
// Accumulator

void Accumulator::add(const ReducedTrace& part) {
  CorpusSummary& t = tables_;
  ++t.traces;
  if (!part.error) ++t.clean_traces;
  for (const PromiseRecord& r : part.promises) {
    ++t.promises;
    ++t.lifecycle_by_kind[r.lifecycle][kind_index(r.kind)];
    if (r.force_depth) ++t.force_depths[*r.force_depth];
    ++t.reads[r.read_count];
    ++t.expr_classes[class_index(r.expr_class)];
    ++t.meta_usage_counts[usage_index(meta_usage(r))];
    t.side_effects.local += r.side_effects.local;
    t.side_effects.lexical += r.side_effects.lexical;
    t.side_effects.other += r.side_effects.other;
    if (r.escaped) {
      ++t.escapes_by_kind[kind_index(r.kind)];
      ++t.escaped_total;
    }
  }
  for (const FunctionFacts& ff : part.functions) {
    FunctionFacts& dst = functions_[ff.def_span];
    dst.def_span = ff.def_span;
    dst.calls.insert(dst.calls.end(), ff.calls.begin(), ff.calls.end());
  }
}

void Accumulator::merge(const Accumulator& other) {
  CorpusSummary& t = tables_;
  const CorpusSummary& o = other.tables_;
  t.traces += o.traces;
  t.clean_traces += o.clean_traces;
  t.promises += o.promises;
  for (const auto& [life, counts] : o.lifecycle_by_kind) {
    auto& mine = t.lifecycle_by_kind[life];
    for (std::size_t i = 0; i < counts.size(); ++i) mine[i] += counts[i];
  }
  for (std::size_t i = 0; i < o.param_strictness.size(); ++i)
    t.param_strictness[i] += o.param_strictness[i];
  for (const auto& [k, v] : o.force_order_counts) t.force_order_counts[k] += v;
  for (const auto& [k, v] : o.force_depths) t.force_depths[k] += v;
  for (const auto& [k, v] : o.reads) t.reads[k] += v;
  for (std::size_t i = 0; i < o.expr_classes.size(); ++i)
    t.expr_classes[i] += o.expr_classes[i];
  for (std::size_t i = 0; i < o.meta_usage_counts.size(); ++i)
    t.meta_usage_counts[i] += o.meta_usage_counts[i];
  t.side_effects.local += o.side_effects.local;
  t.side_effects.lexical += o.side_effects.lexical;
  t.side_effects.other += o.side_effects.other;
  for (std::size_t i = 0; i < o.escapes_by_kind.size(); ++i)
    t.escapes_by_kind[i] += o.escapes_by_kind[i];
  t.escaped_total += o.escaped_total;
  for (const auto& [span, ff] : other.functions_) {
    FunctionFacts& dst = functions_[span];
    dst.def_span = span;
    dst.calls.insert(dst.calls.end(), ff.calls.begin(), ff.calls.end());
  }
}

CorpusSummary Accumulator::finalize() const {
  CorpusSummary out = tables_;
  std::vector<FunctionFacts> merged;
  merged.reserve(functions_.size());
  for (const auto& [span, ff] : functions_) merged.push_back(ff);
  std::vector<FunctionSummary> sums = classify_strictness(merged);
  out.functions = sums.size();
  for (const FunctionSummary& s : sums) {
    bool eligible = s.call_count >= 2 && !s.params.empty();
    if (!eligible) continue;
    ++out.eligible_functions;
    for (ParamStrictness p : s.params)
      ++out.param_strictness[strictness_index(p)];
    ++out.force_order_counts[s.force_orders.size()];
    if (s.strict) ++out.strict_functions;
  }
  return out;
}

CorpusSummary combine(const std::vector<ReducedTrace>& parts) {
  Accumulator acc;
  for (const ReducedTrace& part : parts) acc.add(part);
  return acc.finalize();
}

// ---------------------------------------------------------------------------
// Intermediate files

namespace {

constexpr const char* kTraceLine = "TRACE";
constexpr const char* kPromLine = "PROM";
constexpr const char* kCallLine = "CALL";
constexpr const char* kEndLine = "REDUCE_END";

std::string join_positions(const std::vector<std::uint32_t>& order) {
  std::string out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i != 0) out += ',';
    out += std::to_string(order[i]);
  }
  return out;
}

std::vector<std::uint32_t> parse_positions(std::string_view field,
                                           std::uint32_t n_params,
                                           std::uint64_t line_no) {
  std::vector<std::uint32_t> out;
  if (field.empty()) return out;
  std::size_t start = 0;
  std::set<std::uint32_t> seen;
  while (true) {
    std::size_t comma = field.find(',', start);
    std::string_view piece = comma == std::string_view::npos
                                 ? field.substr(start)
                                 : field.substr(start, comma - start);
    std::uint32_t pos = parse_field_u32(piece, line_no);
    if (pos < 1 || pos > n_params)
      throw FormatError("force position " + std::to_string(pos) +
                            " out of range",
                        line_no);
    if (!seen.insert(pos).second)
      throw FormatError("force position " + std::to_string(pos) + " repeated",
                        line_no);
    out.push_back(pos);
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

void write_reduced_file(const std::string& path, const ReducedTrace& reduced) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TraceIoError("cannot create summary file: " + path);

  std::string text(kReduceHeaderLine);
  text += '\n';
  text += kTraceLine;
  text += '\t';
  text += escape_field(reduced.name);
  text += '\t';
  text += std::to_string(reduced.steps);
  text += '\t';
  text += reduced.error ? err_code_token(*reduced.error) : "OK";
  text += '\n';

  for (const PromiseRecord& r : reduced.promises) {
    text += kPromLine;
    text += '\t';
    text += std::to_string(r.prom_id);
    text += '\t';
    text += prom_kind_token(r.kind);
    text += '\t';
    text += std::to_string(r.creating_call_id);
    text += '\t';
    text += escape_field(r.param_name);
    text += '\t';
    text += expr_class_token(r.expr_class);
    text += '\t';
    text += r.lifecycle;
    text += '\t';
    text += r.force_depth ? std::to_string(*r.force_depth) : "-";
    text += '\t';
    text += std::to_string(r.read_count);
    text += '\t';
    text += std::to_string(r.meta_count);
    text += '\t';
    text += r.escaped ? "1" : "0";
    text += '\t';
    text += std::to_string(r.side_effects.local);
    text += '\t';
    text += std::to_string(r.side_effects.lexical);
    text += '\t';
    text += std::to_string(r.side_effects.other);
    text += '\n';
  }
  for (const FunctionFacts& ff : reduced.functions) {
    for (const CallFacts& c : ff.calls) {
      text += kCallLine;
      text += '\t';
      text += to_string(ff.def_span);
      text += '\t';
      text += std::to_string(c.n_params);
      text += '\t';
      text += join_positions(c.force_order);
      text += '\n';
    }
  }
  text += kEndLine;
  text += '\n';

  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (out.fail()) throw TraceIoError("error writing " + path);
}

ReducedTrace read_reduced_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceIoError("cannot open summary file: " + path);

  std::string line;
  std::uint64_t line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) return false;
    ++line_no;
    return true;
  };

  if (!next_line() || line != kReduceHeaderLine)
    throw FormatError("bad summary header", 1);

  ReducedTrace out;
  bool saw_trace = false;
  bool saw_end = false;
  std::set<std::uint64_t> prom_ids;
  std::map<SourceSpan, FunctionFacts, SpanLess> by_span;

  while (next_line()) {
    if (saw_end) throw FormatError("content after " + std::string(kEndLine),
                                   line_no);
    std::vector<std::string_view> f = split_fields(line);
    std::string_view tag = f[0];
    if (tag == kEndLine) {
      if (f.size() != 1) throw FormatError("malformed end line", line_no);
      saw_end = true;
      continue;
    }
    if (tag == kTraceLine) {
      if (saw_trace) throw FormatError("duplicate TRACE line", line_no);
      if (f.size() != 4) throw FormatError("wrong field count for TRACE", line_no);
      saw_trace = true;
      out.name = unescape_field(f[1], line_no);
      out.steps = parse_field_u64(f[2], line_no);
      if (f[3] == "OK") {
        out.error.reset();
      } else if (auto e = err_code_from_token(f[3])) {
        out.error = *e;
      } else {
        throw FormatError("bad status token '" + std::string(f[3]) + "'",
                          line_no);
      }
      continue;
    }
    if (!saw_trace)
      throw FormatError("expected TRACE line before data lines", line_no);
    if (tag == kPromLine) {
      if (f.size() != 14) throw FormatError("wrong field count for PROM", line_no);
      PromiseRecord r;
      r.prom_id = parse_field_u64(f[1], line_no);
      if (!prom_ids.insert(r.prom_id).second)
        throw FormatError("duplicate promise id", line_no);
      if (auto k = prom_kind_from_token(f[2]))
        r.kind = *k;
      else
        throw FormatError("bad promise kind token", line_no);
      r.creating_call_id = parse_field_u64(f[3], line_no);
      r.param_name = unescape_field(f[4], line_no);
      if (auto c = expr_class_from_token(f[5]))
        r.expr_class = *c;
      else
        throw FormatError("bad expression class token", line_no);
      r.lifecycle = std::string(f[6]);
      if (!lifecycle_ok(r.lifecycle))
        throw FormatError("lifecycle '" + r.lifecycle + "' violates its grammar",
                          line_no);
      if (f[7] != "-") r.force_depth = parse_field_u32(f[7], line_no);
      r.read_count = parse_field_u64(f[8], line_no);
      r.meta_count = parse_field_u64(f[9], line_no);
      if (f[10] == "1")
        r.escaped = true;
      else if (f[10] == "0")
        r.escaped = false;
      else
        throw FormatError("bad escape flag", line_no);
      r.side_effects.local = parse_field_u64(f[11], line_no);
      r.side_effects.lexical = parse_field_u64(f[12], line_no);
      r.side_effects.other = parse_field_u64(f[13], line_no);

      bool has_f = r.lifecycle.find('F') != std::string::npos;
      auto letters = [&](char ch) {
        return static_cast<std::uint64_t>(
            std::count(r.lifecycle.begin(), r.lifecycle.end(), ch));
      };
      if (has_f != r.force_depth.has_value())
        throw FormatError("force depth must be present exactly when F is",
                          line_no);
      if (letters('R') != r.read_count || letters('M') != r.meta_count ||
          (letters('E') != 0) != r.escaped)
        throw FormatError("promise counters disagree with its lifecycle",
                          line_no);
      out.promises.push_back(std::move(r));
      continue;
    }
    if (tag == kCallLine) {
      if (f.size() != 4) throw FormatError("wrong field count for CALL", line_no);
      SourceSpan span = parse_field_span(f[1], line_no);
      CallFacts cf;
      cf.n_params = parse_field_u32(f[2], line_no);
      cf.force_order = parse_positions(f[3], cf.n_params, line_no);
      FunctionFacts& ff = by_span[span];
      ff.def_span = span;
      ff.calls.push_back(std::move(cf));
      continue;
    }
    throw FormatError("unknown line tag '" + std::string(tag) + "'", line_no);
  }
  if (!saw_trace) throw FormatError("summary has no TRACE line", line_no);
  if (!saw_end)
    throw FormatError("summary does not end with " + std::string(kEndLine),
                      line_no);

  std::sort(out.promises.begin(), out.promises.end(),
            [](const PromiseRecord& a, const PromiseRecord& b) {
              return a.prom_id < b.prom_id;
            });
  out.functions.reserve(by_span.size());
  for (auto& [span, ff] : by_span) out.functions.push_back(std::move(ff));
  return out;
}

}  // namespace lazycore
