// Acceptance gate for the whole pipeline. Runs eight end-to-end checks,
// prints one PASS or FAIL line per check, and exits nonzero if any fail.
// Takes the golden directory (programs, traces, values, manifest.tsv) as
// its only argument.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "gen.hpp"
#include "lazycore/analysis.hpp"
#include "lazycore/machine.hpp"
#include "lazycore/parser.hpp"
#include "lazycore/trace_io.hpp"
#include "lazycore/tracer.hpp"
#include "oracle.hpp"

namespace fs = std::filesystem;
using namespace lazycore;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool cond, const std::string& what) {
  if (!cond) throw Failure(what);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  require(static_cast<bool>(in), "cannot read " + p.string());
  return std::string{std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>()};
}

// ---------------------------------------------------------------------------
// Instrumented runs

// Drives the tracer while recording which machine rules fired and checking,
// after every step, that no promise keeps its environment once its value is
// memoized.
struct CheckingHooks : TracerHooks {
  Tracer tracer;
  std::set<Rule>* rules;
  std::uint64_t* memo_checks;

  CheckingHooks(EventSink& sink, std::set<Rule>* rules,
                std::uint64_t* memo_checks)
      : tracer(sink), rules(rules), memo_checks(memo_checks) {}

  void on_program_start(const std::string& name) override {
    tracer.on_program_start(name);
  }
  void on_step(const StepRecord& rec) override {
    if (rules) rules->insert(rec.rule);
    tracer.on_step(rec);
  }
  void on_program_end(std::uint64_t steps,
                      const std::optional<ErrCode>& error) override {
    tracer.on_program_end(steps, error);
  }
  void on_debug_state(const MachineState& st) override {
    tracer.on_debug_state(st);
    st.heap.for_each_promise([&](Location, const Promise& p) {
      if (!p.val.has_value()) return;
      require(!p.env.has_value(),
              "memoized promise still holds its environment");
      if (memo_checks) ++*memo_checks;
    });
  }
};

struct Traced {
  Outcome outcome;
  std::vector<TraceEvent> events;
};

Traced run_traced(const ExprPtr& ast, const std::string& name,
                  std::uint64_t max_steps, std::set<Rule>* rules,
                  std::uint64_t* memo_checks) {
  VectorSink sink;
  CheckingHooks hooks(sink, rules, memo_checks);
  RunConfig cfg;
  cfg.name = name;
  cfg.max_steps = max_steps;
  cfg.validate = true;
  Outcome res = run(ast, cfg, hooks);
  return {std::move(res), std::move(sink.events)};
}

Traced run_source(const std::string& src, const std::string& name,
                  std::uint64_t max_steps, std::uint64_t* memo_checks) {
  return run_traced(parse(src), name, max_steps, nullptr, memo_checks);
}

std::string trace_bytes(const std::vector<TraceEvent>& events) {
  std::string all{kTraceHeaderLine};
  all += '\n';
  for (const TraceEvent& ev : events) all += write_event(ev);
  return all;
}

std::string outcome_line(const Outcome& res) {
  if (res.ok()) return "VALUE\t" + render_value(*res.value) + "\n";
  return std::string("ERROR\t") + err_code_token(res.error->code) + "\t" +
         res.error->message + "\n";
}

template <class T>
std::size_t count_events(const std::vector<TraceEvent>& events) {
  std::size_t n = 0;
  for (const TraceEvent& ev : events)
    if (std::holds_alternative<T>(ev)) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Golden suite

struct GoldenCase {
  std::string name;
  std::uint64_t max_steps = 0;
  std::string source;
  Traced traced;
};

std::vector<GoldenCase> load_and_run_goldens(const fs::path& dir,
                                             std::set<Rule>& rules,
                                             std::uint64_t& memo_checks) {
  std::istringstream manifest(slurp(dir / "manifest.tsv"));
  std::vector<GoldenCase> gold;
  std::string line;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    require(tab != std::string::npos, "bad manifest line: " + line);
    GoldenCase g;
    g.name = line.substr(0, tab);
    g.max_steps = std::stoull(line.substr(tab + 1));
    g.source = slurp(dir / (g.name + ".cr"));
    g.traced = run_traced(parse(g.source), g.name + ".cr", g.max_steps,
                          &rules, &memo_checks);
    gold.push_back(std::move(g));
  }
  return gold;
}

const GoldenCase& golden_named(const std::vector<GoldenCase>& gold,
                               const std::string& name) {
  for (const GoldenCase& g : gold)
    if (g.name == name) return g;
  throw Failure("golden program not found: " + name);
}

// ---------------------------------------------------------------------------
// 1: every machine rule is hit and traces match the audited files

std::string check_rule_coverage(const fs::path& dir,
                                const std::vector<GoldenCase>& gold,
                                const std::set<Rule>& rules) {
  require(gold.size() >= 17, "fewer than 17 golden programs");
  for (const GoldenCase& g : gold) {
    require(trace_bytes(g.traced.events) == slurp(dir / (g.name + ".crtrace")),
            g.name + ": trace differs from the golden file");
    require(outcome_line(g.traced.outcome) == slurp(dir / (g.name + ".value")),
            g.name + ": outcome differs from the golden file");
  }
  constexpr int kRuleCount = 17;
  for (int i = 0; i < kRuleCount; ++i) {
    Rule r = static_cast<Rule>(i);
    require(rules.count(r) != 0,
            std::string("rule never fired across the suite: ") + rule_name(r));
  }
  return std::to_string(gold.size()) +
         " programs byte-identical; all 17 rules covered";
}

// ---------------------------------------------------------------------------
// 2: memoization runs a forced argument exactly once, an unused argument
// never, and a self-referential default is caught as a cycle

std::size_t writes_to(const std::vector<TraceEvent>& events,
                      const std::string& name) {
  std::size_t n = 0;
  for (const TraceEvent& ev : events)
    if (const auto* w = std::get_if<VarWrite>(&ev); w && w->name == name) ++n;
  return n;
}

std::string check_memo_behaviors(const std::vector<GoldenCase>& gold) {
  const Traced& once = golden_named(gold, "force_once_effect").traced;
  require(once.outcome.ok(), "side effect program failed");
  require(render_value(*once.outcome.value) == "\"!\"",
          "side effect did not run exactly once");
  require(count_events<PromCreate>(once.events) == 1, "expected one promise");
  require(count_events<PromForceEnter>(once.events) == 1,
          "argument forced more than once");
  require(count_events<PromForceExit>(once.events) == 1, "force not finished");
  require(count_events<PromRead>(once.events) == 1,
          "second use did not read the memoized value");
  require(writes_to(once.events, "n") == 1, "side effect count is not one");

  const Traced& unused = golden_named(gold, "unused_arg").traced;
  require(unused.outcome.ok() &&
              render_value(*unused.outcome.value) == "\"ok\"",
          "unused argument was evaluated");
  require(count_events<PromCreate>(unused.events) == 1, "expected one promise");
  require(count_events<PromForceEnter>(unused.events) == 0,
          "unused argument was forced");
  require(count_events<PromRead>(unused.events) == 0,
          "unused argument was read");
  require(count_events<VarWrite>(unused.events) == 0,
          "unused argument's side effect happened");

  const Traced& cycle = golden_named(gold, "promise_cycle").traced;
  require(!cycle.outcome.ok() &&
              cycle.outcome.error->code == ErrCode::PromiseCycle,
          "self-referential default did not report a cycle");
  require(count_events<PromForceEnter>(cycle.events) == 1 &&
              count_events<PromForceExit>(cycle.events) == 0,
          "cycle trace shape is wrong");
  return "side effect once, unused never, self-reference cycles";
}

// ---------------------------------------------------------------------------
// 3: across goldens plus generated programs, no promise is forced twice,
// life cycles fit the shape grammar, and memoization drops environments

std::string check_single_force(const std::vector<GoldenCase>& gold,
                               std::vector<std::vector<TraceEvent>>& all,
                               std::uint64_t& memo_checks) {
  for (const GoldenCase& g : gold) all.push_back(g.traced.events);

  const int kFuzzPrograms = 1100;
  for (int seed = 1; seed <= kFuzzPrograms; ++seed) {
    testgen::Rng rng(20000u + static_cast<std::uint64_t>(seed));
    ExprPtr prog = testgen::gen_runnable_program(rng);
    Traced t = run_traced(prog, "fuzz.cr", 10000, nullptr, &memo_checks);
    all.push_back(std::move(t.events));
  }

  const std::regex shape("^M*E?M*(F(R|M|E)*)?$");
  std::uint64_t promises = 0;
  for (const auto& events : all) {
    std::map<std::uint64_t, int> forces;
    for (const TraceEvent& ev : events)
      if (const auto* f = std::get_if<PromForceEnter>(&ev))
        ++forces[f->prom_id];
    for (const auto& [id, n] : forces)
      require(n <= 1,
              "promise " + std::to_string(id) + " forced " +
                  std::to_string(n) + " times");
    for (const PromiseRecord& rec : testoracle::oracle_promises(events)) {
      require(std::regex_match(rec.lifecycle, shape),
              "life cycle '" + rec.lifecycle + "' breaks the shape grammar");
      require(lifecycle_ok(rec.lifecycle),
              "life cycle '" + rec.lifecycle + "' rejected by the checker");
      ++promises;
    }
  }
  require(memo_checks > 0, "memoization was never observed");
  return std::to_string(all.size()) + " traces (" +
         std::to_string(kFuzzPrograms) + " generated), " +
         std::to_string(promises) + " promise life cycles conforming, " +
         std::to_string(memo_checks) + " cleared-environment checks";
}

// ---------------------------------------------------------------------------
// 4: the wire format round trips event-exactly and file-byte-exactly

std::string strip_newline(std::string line) {
  require(!line.empty() && line.back() == '\n', "rendered line lacks newline");
  line.pop_back();
  return line;
}

std::string check_round_trip(const std::vector<GoldenCase>& gold) {
  const std::vector<std::string> nasty = {
      "",           "plain",      "\t",          "\n",
      "\\",         "\\t",        "a\tb\nc\\d",  "trailing\\",
      "\xF0\x9F\x8C\x8D", "quote\"'", "  spaced  ", "\\\\n"};

  std::vector<TraceEvent> samples;
  for (const std::string& s : nasty) {
    samples.push_back(ProgramStart{s});
    samples.push_back(PromCreate{901, 7, s, PromKind::Delayed,
                                 ExprClass::Other, s + "+" + s});
    samples.push_back(VarDef{3, s, Locality::Lexical, 4});
    samples.push_back(VarWrite{1, s, Locality::Other, 0});
    samples.push_back(VarRead{2, s});
  }
  samples.push_back(CallEnter{12, SourceSpan{0, 4294967295u, 88, 1}, 9, 4});
  samples.push_back(CallExit{12});
  samples.push_back(PromCreate{9000000000000ull, 0, "", PromKind::Arg,
                               ExprClass::Sym, "x"});
  samples.push_back(PromForceEnter{1, 2, 4294967295u});
  samples.push_back(PromForceExit{1});
  samples.push_back(PromRead{5, 6});
  samples.push_back(PromMeta{5, 0});
  samples.push_back(EvalEnter{77});
  samples.push_back(EvalExit{});
  samples.push_back(ProgramEnd{123456, std::nullopt});
  for (int c = 0; c < 8; ++c)
    samples.push_back(ProgramEnd{1, static_cast<ErrCode>(c)});

  for (const TraceEvent& ev : samples) {
    std::string line = write_event(ev);
    TraceEvent back = read_event(strip_newline(line));
    require(back == ev, "event changed across write/read: " + line);
    require(write_event(back) == line, "second rendering differs: " + line);
  }

  // Whole files: bytes survive a read/write cycle, and the same run traced
  // twice yields the same bytes.
  const GoldenCase& probe = golden_named(gold, "write_lexical");
  fs::path tmp = fs::temp_directory_path() /
                 ("lazycore_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);
  std::string plain = (tmp / "t.crtrace").string();
  write_trace_file(plain, probe.traced.events, false);
  require(slurp(plain) == trace_bytes(probe.traced.events),
          "file bytes differ from streamed rendering");
  require(read_trace_file(plain) == probe.traced.events,
          "file did not read back to the same events");

  Traced again = run_source(probe.source, probe.name + ".cr", probe.max_steps,
                            nullptr);
  require(trace_bytes(again.events) == trace_bytes(probe.traced.events),
          "two identical runs produced different traces");
  fs::remove_all(tmp);
  return std::to_string(samples.size()) +
         " events round-tripped; file and rerun bytes identical";
}

// ---------------------------------------------------------------------------
// 5: every emitted force depth equals the depth recomputed from the raw
// event stream

std::string check_depths(const std::vector<GoldenCase>& gold,
                         const std::vector<std::vector<TraceEvent>>& all) {
  std::uint64_t checked = 0;
  for (const auto& events : all) {
    std::map<std::uint64_t, std::uint32_t> recomputed;
    for (const PromiseRecord& rec : testoracle::oracle_promises(events))
      if (rec.force_depth) recomputed[rec.prom_id] = *rec.force_depth;
    for (const TraceEvent& ev : events) {
      const auto* f = std::get_if<PromForceEnter>(&ev);
      if (!f) continue;
      auto it = recomputed.find(f->prom_id);
      require(it != recomputed.end(), "force without a recomputed depth");
      require(it->second == f->depth,
              "depth mismatch for promise " + std::to_string(f->prom_id) +
                  ": emitted " + std::to_string(f->depth) + ", recomputed " +
                  std::to_string(it->second));
      ++checked;
    }
  }

  const Traced& nested = golden_named(gold, "nested_depth").traced;
  std::vector<std::uint32_t> depths;
  for (const TraceEvent& ev : nested.events)
    if (const auto* f = std::get_if<PromForceEnter>(&ev))
      depths.push_back(f->depth);
  require(depths == std::vector<std::uint32_t>{0, 1},
          "nested example depths are not 0 then 1");
  return std::to_string(checked) + " force events cross-checked";
}

// ---------------------------------------------------------------------------
// 6: the single-pass reducer and aggregator match a from-scratch quadratic
// recomputation, and combining is order- and parallelism-insensitive

bool naive_eligible(const FunctionSummary& s) {
  return s.call_count >= 2 && !s.params.empty();
}

CorpusSummary naive_summary(
    const std::vector<std::vector<TraceEvent>>& traces,
    const std::vector<FunctionSummary>& summaries) {
  CorpusSummary s;
  for (const auto& events : traces) {
    ++s.traces;
    const auto* end = std::get_if<ProgramEnd>(&events.back());
    require(end != nullptr, "trace does not end in a program end event");
    if (!end->error) ++s.clean_traces;
    for (const PromiseRecord& rec : testoracle::oracle_promises(events)) {
      ++s.promises;
      std::size_t kind = static_cast<std::size_t>(rec.kind);
      s.lifecycle_by_kind[rec.lifecycle][kind] += 1;
      if (rec.force_depth) s.force_depths[*rec.force_depth] += 1;
      s.reads[rec.read_count] += 1;
      s.expr_classes[static_cast<std::size_t>(rec.expr_class)] += 1;
      s.meta_usage_counts[static_cast<std::size_t>(meta_usage(rec))] += 1;
      s.side_effects.local += rec.side_effects.local;
      s.side_effects.lexical += rec.side_effects.lexical;
      s.side_effects.other += rec.side_effects.other;
      if (rec.escaped) {
        s.escapes_by_kind[kind] += 1;
        ++s.escaped_total;
      }
    }
  }
  s.functions = summaries.size();
  for (const FunctionSummary& f : summaries) {
    if (!naive_eligible(f)) continue;
    ++s.eligible_functions;
    if (f.strict) ++s.strict_functions;
    for (ParamStrictness p : f.params)
      s.param_strictness[static_cast<std::size_t>(p)] += 1;
    s.force_order_counts[f.force_orders.size()] += 1;
  }
  return s;
}

std::string check_analysis_oracle(
    const std::vector<GoldenCase>& gold,
    const std::vector<std::vector<TraceEvent>>& all) {
  // Corpus: every golden trace plus a slice of the generated ones.
  std::vector<std::vector<TraceEvent>> corpus;
  for (const GoldenCase& g : gold) corpus.push_back(g.traced.events);
  for (std::size_t i = gold.size(); i < gold.size() + 38 && i < all.size();
       ++i)
    corpus.push_back(all[i]);
  require(corpus.size() >= 20, "corpus too small");

  std::vector<ReducedTrace> reduced;
  for (const auto& events : corpus) {
    ReducedTrace rt = reduce_events(events);
    require(rt.promises == testoracle::oracle_promises(events),
            "promise records diverge from the naive recomputation");
    reduced.push_back(std::move(rt));
  }

  std::vector<const ReducedTrace*> parts;
  for (const ReducedTrace& rt : reduced) parts.push_back(&rt);
  std::vector<FunctionSummary> product =
      classify_strictness(merge_function_facts(parts));
  std::vector<FunctionSummary> naive_fns = testoracle::oracle_strictness(corpus);
  require(product == naive_fns,
          "function summaries diverge from the naive recomputation");

  CorpusSummary combined = combine(reduced);
  require(combined == naive_summary(corpus, naive_fns),
          "corpus summary diverges from the naive recomputation");

  // Order insensitivity: shuffled folds give the same summary.
  std::mt19937 shuffle_rng(11);
  for (int round = 0; round < 3; ++round) {
    std::vector<ReducedTrace> shuffled = reduced;
    std::shuffle(shuffled.begin(), shuffled.end(), shuffle_rng);
    require(combine(shuffled) == combined, "combine depends on trace order");
  }

  // Parallel merge: four workers fold interleaved slices, then merge.
  std::vector<Accumulator> acc(4);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < acc.size(); ++w) {
    threads.emplace_back([&, w] {
      for (std::size_t i = w; i < reduced.size(); i += acc.size())
        acc[w].add(reduced[i]);
    });
  }
  for (std::thread& t : threads) t.join();
  Accumulator total;
  for (Accumulator& a : acc) total.merge(a);
  require(total.finalize() == combined, "combine depends on parallel split");

  return std::to_string(corpus.size()) +
         " traces identical under the quadratic oracle; combine is order- "
         "and split-insensitive";
}

// ---------------------------------------------------------------------------
// 7: the strictness classifier reports constructed behavior exactly

SourceSpan nth_call_span(const std::vector<TraceEvent>& events, std::size_t n) {
  std::size_t seen = 0;
  for (const TraceEvent& ev : events)
    if (const auto* c = std::get_if<CallEnter>(&ev))
      if (seen++ == n) return c->closure_span;
  throw Failure("call span not found");
}

const FunctionSummary& summary_at(const std::vector<FunctionSummary>& all,
                                  const SourceSpan& span) {
  for (const FunctionSummary& f : all)
    if (f.def_span == span) return f;
  throw Failure("no summary for span " + to_string(span));
}

std::string check_strictness(std::uint64_t& memo_checks) {
  const std::string strict_src =
      R"({ f <- function(a, b) a + b; f("1", "2"); f("3", "4") })";
  const std::string never_src =
      R"({ n <- function(z) "c"; n("1"); n("2") })";
  const std::string sometimes_src =
      R"({ use <- function(f, x) f(x); force1 <- function(p) p; ignore1 <- function(p) "n"; use(force1, "a"); use(ignore1, "b") })";
  const std::string two_orders_src =
      R"({ sel1 <- function(a, b) a + b; sel2 <- function(a, b) b + a; w <- function(s, x, y) s(x, y); w(sel1, "1", "2"); w(sel2, "3", "4") })";

  std::vector<std::vector<TraceEvent>> traces;
  std::vector<ReducedTrace> reduced;
  for (const std::string& src :
       {strict_src, never_src, sometimes_src, two_orders_src}) {
    Traced t = run_source(src, "crafted.cr", 100000, &memo_checks);
    require(t.outcome.ok(), "crafted program failed to run");
    reduced.push_back(reduce_events(t.events));
    traces.push_back(std::move(t.events));
  }

  std::vector<const ReducedTrace*> parts;
  for (const ReducedTrace& rt : reduced) parts.push_back(&rt);
  std::vector<FunctionSummary> fns =
      classify_strictness(merge_function_facts(parts));

  using Orders = std::set<std::vector<std::uint32_t>>;
  using P = ParamStrictness;

  // Two calls, both parameters forced left to right both times: strict.
  const FunctionSummary& f = summary_at(fns, nth_call_span(traces[0], 0));
  require(f.call_count == 2, "strict function call count");
  require(f.params == std::vector<P>{P::Always, P::Always},
          "strict function params");
  require(f.force_orders == Orders{{1, 2}}, "strict function orders");
  require(f.strict, "strict function not classified strict");

  // Two calls, parameter never forced.
  const FunctionSummary& n = summary_at(fns, nth_call_span(traces[1], 0));
  require(n.call_count == 2 && n.params == std::vector<P>{P::Never} &&
              n.force_orders == Orders{{}} && !n.strict,
          "never function misclassified");

  // Forced via one callee, ignored via the other: Sometimes.
  const FunctionSummary& use = summary_at(fns, nth_call_span(traces[2], 0));
  require(use.call_count == 2 &&
              use.params == std::vector<P>{P::Always, P::Sometimes} &&
              use.force_orders == Orders{{1, 2}, {1}} && !use.strict,
          "sometimes function misclassified");

  // Both parameters always forced but in call-dependent order: two orders,
  // not strict. The three-parameter closure is the dispatcher w.
  const FunctionSummary& w = summary_at(fns, nth_call_span(traces[3], 0));
  require(w.call_count == 2 &&
              w.params == std::vector<P>{P::Always, P::Always, P::Always} &&
              w.force_orders == Orders{{1, 2, 3}, {1, 3, 2}} && !w.strict,
          "two-order function misclassified");

  // The corpus histograms see exactly the eligible functions above.
  CorpusSummary sum = combine(reduced);
  require(sum.eligible_functions == 4 && sum.strict_functions == 1,
          "eligibility counts wrong");
  require(sum.param_strictness ==
              std::array<std::uint64_t, 3>{6, 1, 1},
          "strictness histogram wrong");
  require(sum.force_order_counts ==
              (std::map<std::uint64_t, std::uint64_t>{{1, 2}, {2, 2}}),
          "distinct-order histogram wrong");
  return "always/sometimes/never and order sets match construction";
}

// ---------------------------------------------------------------------------
// 8: escaping promises get the synthesized-escape letter in the right place

std::string check_escapes(const std::vector<GoldenCase>& gold) {
  const Traced& closure = golden_named(gold, "escape_closure").traced;
  ReducedTrace rt = reduce_events(closure.events);
  require(rt.promises.size() == 1, "expected a single promise");
  require(rt.promises[0].lifecycle == "EF",
          "closure capture life cycle is '" + rt.promises[0].lifecycle +
              "', expected 'EF'");
  require(rt.promises[0].kind == PromKind::Arg, "escaped promise kind");
  require(testoracle::oracle_promises(closure.events) == rt.promises,
          "oracle disagrees on the escape");

  const Traced& memoized = golden_named(gold, "escape_memoized").traced;
  ReducedTrace rt2 = reduce_events(memoized.events);
  require(rt2.promises.size() == 1, "expected a single promise");
  require(rt2.promises[0].lifecycle == "FRER",
          "escape-after-use life cycle is '" + rt2.promises[0].lifecycle +
              "', expected 'FRER'");
  require(testoracle::oracle_promises(memoized.events) == rt2.promises,
          "oracle disagrees on the escape");
  return "life cycles EF and FRER observed";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: lazycore_acceptance <golden_dir>\n";
    return 2;
  }
  fs::path dir = argv[1];

  bool all_pass = true;
  auto criterion = [&](int num, const std::string& label, double budget_s,
                       auto&& fn) {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string detail;
    try {
      detail = fn();
    } catch (const std::exception& e) {
      pass = false;
      detail = e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (pass && budget_s > 0 && secs > budget_s) {
      pass = false;
      detail = "over time budget of " + std::to_string(budget_s) + "s";
    }
    std::cout << (pass ? "PASS" : "FAIL") << " " << num << " " << label
              << ": " << detail << " [" << std::fixed << std::setprecision(2)
              << secs << "s]\n";
    if (!pass) all_pass = false;
  };

  std::set<Rule> rules;
  std::uint64_t memo_checks = 0;
  std::vector<GoldenCase> gold;
  std::vector<std::vector<TraceEvent>> all_traces;

  criterion(1, "rule coverage golden suite", 5.0, [&] {
    gold = load_and_run_goldens(dir, rules, memo_checks);
    return check_rule_coverage(dir, gold, rules);
  });
  criterion(2, "memoization and laziness behaviors", 0, [&] {
    return check_memo_behaviors(gold);
  });
  criterion(3, "single-force invariant under fuzzing", 60.0, [&] {
    return check_single_force(gold, all_traces, memo_checks);
  });
  criterion(4, "trace format round trips", 0, [&] {
    return check_round_trip(gold);
  });
  criterion(5, "force depth cross-check", 0, [&] {
    return check_depths(gold, all_traces);
  });
  criterion(6, "analysis equals the quadratic oracle", 30.0, [&] {
    return check_analysis_oracle(gold, all_traces);
  });
  criterion(7, "strictness classification of a crafted corpus", 0, [&] {
    return check_strictness(memo_checks);
  });
  criterion(8, "escape life cycles", 0, [&] { return check_escapes(gold); });

  return all_pass ? 0 : 1;
}
