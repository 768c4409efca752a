#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lazycore/events.hpp"
#include "lazycore/span.hpp"

namespace lazycore {

// Raised when a trace violates the event-stream invariants: mismatched
// enters and exits, a promise forced twice, a force depth that disagrees
// with the reconstructed call stack, and so on. Such a trace is corrupt and
// produces no numbers; callers typically skip it and report why.
class TraceInvariantError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Per-promise facts

struct SideEffectCounts {
  std::uint64_t local = 0;    // writes into the forcing promise's own frame
  std::uint64_t lexical = 0;  // writes into an outer frame of its chain
  std::uint64_t other = 0;    // writes anywhere else

  bool operator==(const SideEffectCounts&) const = default;
};

// Everything the analysis knows about one promise, reconstructed from its
// events. The lifecycle string records, in trace order: F forced, R value
// read back, M meta-inspected, E escaped its creating call (synthesized at
// the first touch after that call exited, at most once).
struct PromiseRecord {
  std::uint64_t prom_id = 0;
  PromKind kind = PromKind::Arg;
  CallId creating_call_id = 0;  // 0 = created at top level
  std::string param_name;       // empty for delayed assignments
  ExprClass expr_class = ExprClass::Other;
  std::string lifecycle;
  std::optional<std::uint32_t> force_depth;  // present exactly when F is
  std::uint64_t read_count = 0;              // == number of R letters
  std::uint64_t meta_count = 0;              // == number of M letters
  bool escaped = false;                      // == E present
  SideEffectCounts side_effects;

  bool operator==(const PromiseRecord&) const = default;
};

// True for strings of the shape  M* E? M* (F (R|M|E)*)?  with at most one E
// overall: any metas, an optional escape, then at most one force followed by
// any mix of reads, metas and the escape if it was not used up earlier.
bool lifecycle_ok(std::string_view lifecycle);

// How a promise's value and metadata were used, a four-way partition.
enum class MetaUsage { Unused, ValueOnly, MetaOnly, MetaAndValue };

MetaUsage meta_usage(const PromiseRecord& rec);
const char* meta_usage_token(MetaUsage u);

// ---------------------------------------------------------------------------
// Per-function facts

// One completed call of some closure: how many parameters it had and the
// order its parameter promises were forced (1-based positions, in trace
// order, including forces that happened after the call returned). Calls cut
// short by a runtime error are never recorded.
struct CallFacts {
  std::uint32_t n_params = 0;
  std::vector<std::uint32_t> force_order;

  bool operator==(const CallFacts&) const = default;
};

// All completed calls of one closure, identified by where its function
// literal sits in the source. Facts from many traces merge by concatenating
// call lists; every question asked of them is order-insensitive.
struct FunctionFacts {
  SourceSpan def_span{};
  std::vector<CallFacts> calls;

  bool operator==(const FunctionFacts&) const = default;
};

enum class ParamStrictness { Always, Sometimes, Never };

const char* param_strictness_token(ParamStrictness s);

// Strictness verdict for one closure over a corpus of completed calls.
struct FunctionSummary {
  SourceSpan def_span{};
  std::uint64_t call_count = 0;
  std::vector<ParamStrictness> params;  // one per parameter position
  std::set<std::vector<std::uint32_t>> force_orders;
  // Called at least twice with at least one parameter, every parameter
  // forced in every call, and a single observed force order.
  bool strict = false;

  bool operator==(const FunctionSummary&) const = default;
};

// ---------------------------------------------------------------------------
// Reducing one trace

// The distilled form of one trace: every promise's record, every completed
// call grouped by closure, and how the run ended. Promises are in id order,
// functions in span order.
struct ReducedTrace {
  std::string name;
  std::uint64_t steps = 0;
  std::optional<ErrCode> error;
  std::vector<PromiseRecord> promises;
  std::vector<FunctionFacts> functions;

  bool operator==(const ReducedTrace&) const = default;
};

// Single-pass event consumer building a ReducedTrace. Feed events in trace
// order, then call finish() exactly once. Throws TraceInvariantError the
// moment the stream breaks an invariant.
class Reducer {
 public:
  void accept(const TraceEvent& ev);
  ReducedTrace finish();

 private:
  struct PromState {
    PromiseRecord rec;
    bool force_open = false;
    bool force_done = false;
    std::uint64_t force_ordinal = 0;  // global order of the F events
  };
  struct CallState {
    SourceSpan span{};
    std::uint32_t n_params = 0;
    std::vector<std::uint64_t> param_proms;  // prom ids, position order
    bool exited = false;
  };

  PromState& known_prom(std::uint64_t id, const char* who);
  void touch(PromState& p, char letter);
  void note_write(Locality locality, std::uint64_t active_prom);
  std::uint32_t depth_of(CallId creating) const;
  [[noreturn]] void fail(const std::string& msg) const;

  bool started_ = false;
  bool ended_ = false;
  std::string name_;
  std::uint64_t steps_ = 0;
  std::optional<ErrCode> error_;
  std::uint64_t events_seen_ = 0;
  std::uint64_t force_counter_ = 0;
  std::uint64_t eval_depth_ = 0;
  std::vector<CallId> stack_;
  std::vector<std::uint64_t> forcing_;  // prom ids, innermost last
  std::set<CallId> exited_calls_;
  std::map<std::uint64_t, PromState> proms_;
  std::map<CallId, CallState> calls_;
};

// Reduce an in-memory event sequence (must start with ProgramStart and end
// with ProgramEnd).
ReducedTrace reduce_events(const std::vector<TraceEvent>& events);

// Stream a .crtrace or .crtrace.z file through a Reducer without ever
// holding the whole trace in memory.
ReducedTrace reduce_trace_file(const std::string& path);

// ---------------------------------------------------------------------------
// Combining traces

// Merge call facts from many traces, keyed by definition span.
std::vector<FunctionFacts> merge_function_facts(
    const std::vector<const ReducedTrace*>& parts);

// Classify per-parameter strictness and force orders for merged facts.
// A parameter is Always forced if forced in every completed call, Never if
// in none, Sometimes otherwise.
std::vector<FunctionSummary> classify_strictness(
    const std::vector<FunctionFacts>& merged);

// Aggregate tables over a whole corpus. Every table's counts sum to the
// population it describes.
struct CorpusSummary {
  std::uint64_t traces = 0;        // analyzed (non-corrupt) traces
  std::uint64_t clean_traces = 0;  // those that finished without an error
  std::uint64_t promises = 0;
  std::uint64_t functions = 0;           // distinct closures with a completed call
  std::uint64_t eligible_functions = 0;  // >=2 calls and >=1 parameter
  std::uint64_t strict_functions = 0;

  // Lifecycle string -> count per promise kind (Arg, Default, Delayed).
  std::map<std::string, std::array<std::uint64_t, 3>> lifecycle_by_kind;
  // Parameters of eligible functions by classification (Always, Sometimes,
  // Never).
  std::array<std::uint64_t, 3> param_strictness{};
  // Number of distinct force orders -> how many eligible functions show it.
  std::map<std::uint64_t, std::uint64_t> force_order_counts;
  // Force depth -> number of forced promises.
  std::map<std::uint32_t, std::uint64_t> force_depths;
  // Read count -> number of promises.
  std::map<std::uint64_t, std::uint64_t> reads;
  // Promises per expression class (Sym, Const, Call, Other).
  std::array<std::uint64_t, 4> expr_classes{};
  // Promises per usage category (Unused, ValueOnly, MetaOnly, MetaAndValue).
  std::array<std::uint64_t, 4> meta_usage_counts{};
  // Writes performed under a forcing promise, by locality.
  SideEffectCounts side_effects;
  // Escaped promises per kind (Arg, Default, Delayed), and in total.
  std::array<std::uint64_t, 3> escapes_by_kind{};
  std::uint64_t escaped_total = 0;

  bool operator==(const CorpusSummary&) const = default;
};

// Running aggregation state. add() folds in one trace; merge() folds in
// another accumulator, so work can be split across threads or combined as a
// tree. Any grouping of the same traces yields the same summary.
class Accumulator {
 public:
  void add(const ReducedTrace& part);
  void merge(const Accumulator& other);
  CorpusSummary finalize() const;

 private:
  CorpusSummary tables_;  // trace- and promise-side fields, filled additively
  std::map<SourceSpan, FunctionFacts, SpanLess> functions_;
};

// One-shot corpus fold.
CorpusSummary combine(const std::vector<ReducedTrace>& parts);

// ---------------------------------------------------------------------------
// Intermediate files

// A ReducedTrace serializes to a small tab-separated file (conventionally
// .crreduce) so corpus-level combining never re-reads raw traces. Same
// escaping rules as trace files; the header line is "CRREDUCE\t1" and the
// last line "REDUCE_END".
inline constexpr std::string_view kReduceHeaderLine = "CRREDUCE\t1";

void write_reduced_file(const std::string& path, const ReducedTrace& reduced);
ReducedTrace read_reduced_file(const std::string& path);

}  // namespace lazycore
