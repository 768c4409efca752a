#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "lazycore/events.hpp"
#include "lazycore/machine.hpp"

namespace lazycore {

// Turns machine step records into trace events. Keeps a shadow call stack
// (for force depths) and a stack of promises currently being forced (for
// write locality); in debug runs both are checked against the real machine
// stack after every step.
class Tracer : public TracerHooks {
 public:
  explicit Tracer(EventSink& sink) : sink_(sink) {}

  void on_program_start(const std::string& name) override;
  void on_step(const StepRecord& rec) override;
  void on_program_end(std::uint64_t steps,
                      const std::optional<ErrCode>& error) override;
  void on_debug_state(const MachineState& st) override;

 private:
  struct PromInfo {
    std::uint64_t id = 0;
    CallId creating_call = 0;
  };
  struct ForcingEntry {
    Location loc = 0;                 // heap location of the promise
    std::uint64_t id = 0;             // its emitted id
    std::vector<Location> env;        // chain it evaluates in, innermost first
  };

  void emit(TraceEvent ev) { sink_.accept(std::move(ev)); }
  std::uint64_t prom_id(Location loc) const;
  CallId active_call() const;
  std::uint64_t active_prom() const;
  Locality locality_of_write(Location frame) const;
  std::uint32_t force_depth(CallId creating_call) const;
  void record_create(const PromCreateRec& c);

  EventSink& sink_;
  std::uint64_t next_prom_id_ = 1;
  std::unordered_map<Location, PromInfo> promises_;
  std::vector<CallId> shadow_;
  std::vector<ForcingEntry> forcing_;
};

}  // namespace lazycore
