#pragma once

// Cycle-level timing of one compute unit: per-SIMD wavefront arbitration, the
// MCE occupancy scoreboard, the scalar s_memtime path and instruction fetch.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcesim/config.hpp"
#include "mcesim/isa.hpp"
#include "mcesim/latency_model.hpp"

namespace mcesim {

using Cycle = std::int64_t;

enum class StallReason { none, data_dep, mce_busy, fetch, waitcnt };

std::string_view stall_reason_name(StallReason r) noexcept;
// Upper-case kind used in trace CSVs: MFMA, S_MEMTIME, S_NOP, S_WAITCNT, S_ENDPGM.
std::string_view opcode_kind(Opcode op) noexcept;

struct WavefrontLaunch {
  Program program;
  int simd = 0;
};

struct InstrRecord {
  int wf_id = 0;
  std::size_t inst_index = 0;
  Opcode opcode = Opcode::s_nop;
  Cycle issue_cycle = 0;
  Cycle complete_cycle = 0;
  // Last hazard that held this instruction back, `none` if it issued as soon
  // as the issue slot allowed.
  StallReason stall_reason = StallReason::none;

  friend bool operator==(const InstrRecord&, const InstrRecord&) = default;
};

struct MemtimeSample {
  int wf_id = 0;
  RegRange dst;
  Cycle value = 0;

  friend bool operator==(const MemtimeSample&, const MemtimeSample&) = default;
};

struct SimTrace {
  std::vector<InstrRecord> records;  // in issue order
  std::vector<MemtimeSample> memtime_samples;
  Cycle total_cycles = 0;

  std::vector<InstrRecord> records_for(int wf_id) const;
  std::vector<MemtimeSample> samples_for(int wf_id) const;

  // wf_id,inst_index,opcode,issue_cycle,complete_cycle,stall_reason
  std::string to_csv() const;

  friend bool operator==(const SimTrace&, const SimTrace&) = default;
};

struct PendingWrite {
  RegRange regs;
  Cycle ready = 0;
};

struct WavefrontState {
  int wf_id = 0;
  int simd_id = 0;
  std::size_t pc = 0;
  std::vector<PendingWrite> reg_ready;
  // Issue slot is busy until this cycle.
  Cycle stalled_until = 0;
  // Set by s_waitcnt: nothing issues before all earlier s_memtime results land.
  Cycle waitcnt_until = 0;
  Cycle memtime_outstanding_until = 0;
  StallReason last_stall = StallReason::none;
  bool done = false;
};

// Per-wavefront code segment in the L1 instruction cache.
struct FetchState {
  std::vector<Cycle> line_ready;  // -1 = never requested
  Cycle fetch_free_at = 0;        // lines are fetched one after another
};

struct CuState {
  const CuConfig* cfg = nullptr;
  const LatencyModel* model = nullptr;
  std::vector<Program> programs;  // one per wavefront
  std::vector<WavefrontState> wavefronts;
  std::vector<FetchState> fetch;
  std::vector<Cycle> mce_busy_until;  // per SIMD (NRDY_MATRIX_CORE)
};

struct IssueDecision {
  bool can_issue = false;
  StallReason reason = StallReason::none;
  // Earliest cycle at which the blocking condition can clear; meaningless
  // when can_issue or when fetch_request is set.
  Cycle retry_at = 0;
  // The instruction touches a line that has not been requested yet.
  bool fetch_request = false;

  friend bool operator==(const IssueDecision&, const IssueDecision&) = default;
};

// Hazard checks for `wf`'s next instruction at cycle `now`, in order: issue
// slot, s_waitcnt barrier, register dependences, MCE occupancy, fetch.
IssueDecision scoreboard_can_issue(const CuState& state, const WavefrontState& wf, const Instruction& instr,
                                   Cycle now);

class ComputeUnit {
 public:
  ComputeUnit(const CuConfig& cfg, LatencyModel model);
  ComputeUnit(const ComputeUnit&) = delete;
  ComputeUnit& operator=(const ComputeUnit&) = delete;

  // Returns the new wavefront id. Throws CapacityError or UnsupportedOnModel.
  int launch(Program program, int simd);
  SimTrace run();

  const CuState& state() const noexcept { return state_; }

 private:
  void request_fetch(WavefrontState& wf, Cycle now);
  void issue(WavefrontState& wf, Cycle now, SimTrace& trace);

  CuConfig cfg_;
  LatencyModel model_;
  CuState state_;
  std::vector<std::size_t> rr_next_;  // per SIMD round-robin pointer into its wavefront list
};

SimTrace simulate(std::span<const WavefrontLaunch> launches, const CuConfig& cfg);
SimTrace simulate(std::span<const WavefrontLaunch> launches, const CuConfig& cfg, const LatencyModel& model);

}  // namespace mcesim
