#include "mcesim/timing.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "mcesim/error.hpp"

namespace mcesim {

namespace {

constexpr Cycle kNever = std::numeric_limits<Cycle>::max();
constexpr Cycle kUnrequested = -1;

std::pair<std::uint64_t, std::uint64_t> instr_lines(const Program& p, std::size_t i, std::uint64_t line_bytes) {
  return line_span(p.offset(i), p.offset(i + 1), line_bytes);
}

}  // namespace

std::string_view stall_reason_name(StallReason r) noexcept {
  switch (r) {
    case StallReason::none: return "none";
    case StallReason::data_dep: return "data_dep";
    case StallReason::mce_busy: return "mce_busy";
    case StallReason::fetch: return "fetch";
    case StallReason::waitcnt: return "waitcnt";
  }
  return "?";
}

std::string_view opcode_kind(Opcode op) noexcept {
  switch (op) {
    case Opcode::mfma: return "MFMA";
    case Opcode::s_memtime: return "S_MEMTIME";
    case Opcode::s_nop: return "S_NOP";
    case Opcode::s_waitcnt: return "S_WAITCNT";
    case Opcode::s_endpgm: return "S_ENDPGM";
  }
  return "?";
}

std::vector<InstrRecord> SimTrace::records_for(int wf_id) const {
  std::vector<InstrRecord> out;
  std::copy_if(records.begin(), records.end(), std::back_inserter(out),
               [&](const InstrRecord& r) { return r.wf_id == wf_id; });
  return out;
}

std::vector<MemtimeSample> SimTrace::samples_for(int wf_id) const {
  std::vector<MemtimeSample> out;
  std::copy_if(memtime_samples.begin(), memtime_samples.end(), std::back_inserter(out),
               [&](const MemtimeSample& s) { return s.wf_id == wf_id; });
  return out;
}

std::string SimTrace::to_csv() const {
  std::ostringstream os;
  os << "wf_id,inst_index,opcode,issue_cycle,complete_cycle,stall_reason\n";
  for (const auto& r : records) {
    os << r.wf_id << ',' << r.inst_index << ',' << opcode_kind(r.opcode) << ',' << r.issue_cycle << ','
       << r.complete_cycle << ',' << stall_reason_name(r.stall_reason) << '\n';
  }
  return os.str();
}

IssueDecision scoreboard_can_issue(const CuState& state, const WavefrontState& wf, const Instruction& instr,
                                   Cycle now) {
  if (wf.done) return {false, StallReason::none, kNever, false};
  if (wf.stalled_until > now) return {false, StallReason::none, wf.stalled_until, false};
  if (wf.waitcnt_until > now) return {false, StallReason::waitcnt, wf.waitcnt_until, false};

  // (a) true/output dependences on in-flight results
  Cycle dep_ready = kNever;
  bool dep = false;
  const auto check = [&](const RegRange& r) {
    for (const auto& w : wf.reg_ready) {
      if (w.ready > now && w.regs.overlaps(r)) {
        dep_ready = dep ? std::max(dep_ready, w.ready) : w.ready;
        dep = true;
      }
    }
  };
  for (const auto& r : instr.src_regs) check(r);
  for (const auto& r : instr.dst_regs) check(r);
  if (dep) return {false, StallReason::data_dep, dep_ready, false};

  // (b) one MFMA in flight per SIMD MCE
  if (instr.opcode == Opcode::mfma) {
    const Cycle busy = state.mce_busy_until.at(static_cast<std::size_t>(wf.simd_id));
    if (busy > now) return {false, StallReason::mce_busy, busy, false};
  }

  // (c) every line the instruction occupies must be resident
  const auto& prog = state.programs.at(static_cast<std::size_t>(wf.wf_id));
  const auto& fetch = state.fetch.at(static_cast<std::size_t>(wf.wf_id));
  const auto [first, last] = instr_lines(prog, wf.pc, state.cfg->fetch_line_bytes);
  const auto line0 = prog.base_address() / state.cfg->fetch_line_bytes;
  Cycle line_ready = 0;
  for (auto l = first; l <= last; ++l) {
    const Cycle r = fetch.line_ready.at(l - line0);
    if (r == kUnrequested) return {false, StallReason::fetch, kNever, true};
    line_ready = std::max(line_ready, r);
  }
  if (line_ready > now) return {false, StallReason::fetch, line_ready, false};

  return {true, StallReason::none, now, false};
}

ComputeUnit::ComputeUnit(const CuConfig& cfg, LatencyModel model) : cfg_(cfg), model_(std::move(model)) {
  cfg_.validate();
  state_.cfg = &cfg_;
  state_.model = &model_;
  state_.mce_busy_until.assign(static_cast<std::size_t>(cfg_.num_simd), 0);
  rr_next_.assign(static_cast<std::size_t>(cfg_.num_simd), 0);
}

int ComputeUnit::launch(Program program, int simd) {
  if (simd < 0 || simd >= cfg_.num_simd) {
    throw CapacityError("SIMD " + std::to_string(simd) + " does not exist (num_simd = " +
                        std::to_string(cfg_.num_simd) + ")");
  }
  const auto resident = std::count_if(state_.wavefronts.begin(), state_.wavefronts.end(),
                                      [&](const WavefrontState& w) { return w.simd_id == simd; });
  if (resident >= cfg_.max_wf_per_simd) {
    throw CapacityError("SIMD " + std::to_string(simd) + " already holds " + std::to_string(resident) +
                        " wavefronts (max_wf_per_simd = " + std::to_string(cfg_.max_wf_per_simd) + ")");
  }
  for (const auto& instr : program.instructions()) {
    if (instr.opcode == Opcode::mfma) (void)mce_latency(model_, *instr.mfma);
  }

  WavefrontState wf;
  wf.wf_id = static_cast<int>(state_.wavefronts.size());
  wf.simd_id = simd;

  FetchState fetch;
  const auto line0 = program.base_address() / cfg_.fetch_line_bytes;
  const auto line_end = (program.end_offset() - 1) / cfg_.fetch_line_bytes;
  fetch.line_ready.assign(line_end - line0 + 1, kUnrequested);

  state_.programs.push_back(std::move(program));
  state_.fetch.push_back(std::move(fetch));
  state_.wavefronts.push_back(wf);
  return wf.wf_id;
}

void ComputeUnit::request_fetch(WavefrontState& wf, Cycle now) {
  const auto& prog = state_.programs[static_cast<std::size_t>(wf.wf_id)];
  auto& fetch = state_.fetch[static_cast<std::size_t>(wf.wf_id)];
  const auto [first, last] = instr_lines(prog, wf.pc, cfg_.fetch_line_bytes);
  const auto line0 = prog.base_address() / cfg_.fetch_line_bytes;
  for (auto l = first; l <= last; ++l) {
    Cycle& ready = fetch.line_ready[l - line0];
    if (ready != kUnrequested) continue;
    const Cycle start = std::max(now, fetch.fetch_free_at);
    ready = start + cfg_.l1i_miss_cycles;
    fetch.fetch_free_at = ready;
  }
}

void ComputeUnit::issue(WavefrontState& wf, Cycle now, SimTrace& trace) {
  const auto& instr = state_.programs[static_cast<std::size_t>(wf.wf_id)][wf.pc];
  InstrRecord rec{wf.wf_id, wf.pc, instr.opcode, now, now, wf.last_stall};

  std::erase_if(wf.reg_ready, [&](const PendingWrite& w) { return w.ready <= now; });
  switch (instr.opcode) {
    case Opcode::mfma: {
      const Cycle lat = mce_latency(model_, *instr.mfma);
      rec.complete_cycle = now + lat;
      for (const auto& d : instr.dst_regs) wf.reg_ready.push_back({d, rec.complete_cycle});
      state_.mce_busy_until[static_cast<std::size_t>(wf.simd_id)] = now + (cfg_.pipelined_mce ? 1 : lat);
      break;
    }
    case Opcode::s_memtime: {
      rec.complete_cycle = now + cfg_.memtime_cycles;
      for (const auto& d : instr.dst_regs) {
        wf.reg_ready.push_back({d, rec.complete_cycle});
        trace.memtime_samples.push_back({wf.wf_id, d, rec.complete_cycle});
      }
      wf.memtime_outstanding_until = std::max(wf.memtime_outstanding_until, rec.complete_cycle);
      break;
    }
    case Opcode::s_waitcnt:
      rec.complete_cycle = std::max(now, wf.memtime_outstanding_until);
      wf.waitcnt_until = rec.complete_cycle;
      break;
    case Opcode::s_nop: break;
    case Opcode::s_endpgm: wf.done = true; break;
  }

  wf.stalled_until = now + std::max<Cycle>(1, cfg_.issue_cycles);
  wf.last_stall = StallReason::none;
  ++wf.pc;
  trace.total_cycles = std::max(trace.total_cycles, rec.complete_cycle);
  trace.records.push_back(rec);
}

SimTrace ComputeUnit::run() {
  SimTrace trace;
  std::vector<std::vector<std::size_t>> per_simd(static_cast<std::size_t>(cfg_.num_simd));
  for (const auto& wf : state_.wavefronts) per_simd[static_cast<std::size_t>(wf.simd_id)].push_back(wf.wf_id);

  Cycle now = 0;
  for (;;) {
    Cycle next = kNever;
    bool live = false;
    for (std::size_t simd = 0; simd < per_simd.size(); ++simd) {
      const auto& ids = per_simd[simd];
      bool issued = false;
      const std::size_t start = rr_next_[simd];
      for (std::size_t t = 0; t < ids.size(); ++t) {
        const std::size_t slot = (start + t) % ids.size();
        auto& wf = state_.wavefronts[ids[slot]];
        if (wf.done) continue;
        live = true;
        const auto& instr = state_.programs[ids[slot]][wf.pc];
        IssueDecision d = scoreboard_can_issue(state_, wf, instr, now);
        if (d.fetch_request) {
          request_fetch(wf, now);
          d = scoreboard_can_issue(state_, wf, instr, now);
        }
        if (d.can_issue && !issued) {
          issue(wf, now, trace);
          issued = true;
          rr_next_[simd] = (slot + 1) % ids.size();
          if (!wf.done) next = std::min(next, wf.stalled_until);
        } else if (d.can_issue) {
          next = std::min(next, now + 1);
        } else {
          if (d.reason != StallReason::none) wf.last_stall = d.reason;
          next = std::min(next, d.retry_at);
        }
      }
    }
    if (!live || std::all_of(state_.wavefronts.begin(), state_.wavefronts.end(),
                             [](const WavefrontState& w) { return w.done; })) {
      break;
    }
    if (next <= now || next == kNever) throw Error("scheduler made no progress at cycle " + std::to_string(now));
    now = next;
  }
  return trace;
}

SimTrace simulate(std::span<const WavefrontLaunch> launches, const CuConfig& cfg) {
  return simulate(launches, cfg, make_latency_model(cfg));
}

SimTrace simulate(std::span<const WavefrontLaunch> launches, const CuConfig& cfg, const LatencyModel& model) {
  ComputeUnit cu(cfg, model);
  for (const auto& l : launches) cu.launch(l.program, l.simd);
  return cu.run();
}

}  // namespace mcesim
