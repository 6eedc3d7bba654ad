/*
 * Copyright 2026 The alaska-lite Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "alaska/interpreter.hpp"

#include <algorithm>
#include <cstring>
#include <sstream>
#include <unordered_map>

#include "alaska/error.hpp"
#include "alaska/handle_heap.hpp"
#include "alaska/pin_runtime.hpp"

namespace alaska {

using ir::Inst;
using ir::InstId;
using ir::kNone;
using ir::Op;
using ir::ValueId;

const char* to_string(FaultKind kind) {
  switch (kind) {
    case FaultKind::None: return "none";
    case FaultKind::DeadHandle: return "dead-handle";
    case FaultKind::OutOfBounds: return "out-of-bounds";
    case FaultKind::UseAfterFree: return "use-after-free";
    case FaultKind::DoubleFree: return "double-free";
    case FaultKind::WildAccess: return "wild-access";
    case FaultKind::HandleDereference: return "handle-dereference";
    case FaultKind::EscapedHandle: return "escaped-handle";
    case FaultKind::PinnedStability: return "pinned-stability";
    case FaultKind::SlotCollision: return "slot-collision";
    case FaultKind::UnbalancedPins: return "unbalanced-pins";
    case FaultKind::PinnedMove: return "pinned-move";
    case FaultKind::Canary: return "canary";
    case FaultKind::StepLimit: return "step-limit";
    case FaultKind::StackOverflow: return "stack-overflow";
    case FaultKind::BadProgram: return "bad-program";
  }
  return "?";
}

BarrierSchedule BarrierSchedule::from_json(const nlohmann::json& j) {
  BarrierSchedule s;
  const nlohmann::json& events = j.is_array() ? j : j.at("events");
  for (const auto& e : events) {
    BarrierEvent ev;
    const std::string at = e.value("at", "safepoint");
    if (at == "safepoint") {
      ev.trigger = BarrierTrigger::Safepoint;
    } else if (at == "external") {
      ev.trigger = BarrierTrigger::External;
    } else {
      throw ConfigError("unknown barrier trigger '" + at + "'");
    }
    ev.index = e.at("index").get<std::uint64_t>();
    if (e.contains("budget") && !e.at("budget").is_null()) ev.budget = e.at("budget").get<std::uint64_t>();
    ev.max_passes = e.value("max_passes", 64u);
    s.events.push_back(ev);
  }
  return s;
}

nlohmann::json BarrierSchedule::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const BarrierEvent& e : this->events) {
    nlohmann::json j;
    j["at"] = e.trigger == BarrierTrigger::Safepoint ? "safepoint" : "external";
    j["index"] = e.index;
    j["budget"] = e.budget ? nlohmann::json(*e.budget) : nlohmann::json(nullptr);
    j["max_passes"] = e.max_passes;
    list.push_back(j);
  }
  return nlohmann::json{{"events", list}};
}

std::vector<std::pair<std::string, std::uint64_t>> Counters::items() const {
  return {{"steps", steps},       {"calls", calls},           {"external_calls", external_calls},
          {"translates", translates}, {"pins", pins},         {"releases", releases},
          {"safepoints", safepoints}, {"barriers", barriers}, {"passes", passes},
          {"moves", moves},       {"moved_bytes", moved_bytes}, {"max_pins", max_pins}};
}

std::string Trace::describe() const {
  std::ostringstream out;
  out << "output=[";
  for (std::size_t k = 0; k < output.size(); ++k) out << (k == 0 ? "" : ",") << output[k];
  out << "] ret=";
  if (ret) {
    out << *ret;
  } else {
    out << "none";
  }
  if (fault != FaultKind::None) out << " fault=" << to_string(fault) << " (" << fault_message << ")";
  return out.str();
}

namespace {

struct Fault {
  FaultKind kind;
  std::string message;
};

[[noreturn]] void raise(FaultKind kind, std::string message) { throw Fault{kind, std::move(message)}; }

std::string hex(std::uint64_t v) {
  std::ostringstream out;
  out << "0x" << std::hex << v;
  return out.str();
}

// Plain allocation for direct mode and for call sites left unconverted.
// Addresses are never reused, so stale pointers are always detectable.
class PlainHeap {
 public:
  static constexpr std::uint64_t kBase = 0x0000'2000'0000'0000ULL;

  std::uint64_t alloc(std::uint64_t size) {
    if (size == 0) size = 1;
    if (size > (std::uint64_t{1} << 32)) raise(FaultKind::BadProgram, "allocation larger than 4 GiB");
    const std::uint64_t base = next_;
    next_ += (size + 15) / 16 * 16 + 16;
    objects_.emplace(base, Object{std::vector<std::byte>(size), false});
    return base;
  }

  void free(std::uint64_t addr) {
    auto it = objects_.find(addr);
    if (it == objects_.end()) raise(FaultKind::WildAccess, "free of " + hex(addr) + " which is not an object start");
    if (it->second.freed) raise(FaultKind::DoubleFree, "double free of " + hex(addr));
    it->second.freed = true;
    it->second.bytes.clear();
    it->second.bytes.shrink_to_fit();
  }

  bool owns(std::uint64_t addr) const { return addr >= kBase && addr < next_; }

  std::uint64_t size_of(std::uint64_t addr) {
    auto it = objects_.find(addr);
    if (it == objects_.end() || it->second.freed) raise(FaultKind::WildAccess, "realloc of " + hex(addr));
    return it->second.bytes.size();
  }

  std::byte* bytes(std::uint64_t addr, std::uint64_t len) {
    auto it = objects_.upper_bound(addr);
    if (it == objects_.begin()) raise(FaultKind::WildAccess, "access to " + hex(addr));
    --it;
    Object& o = it->second;
    const std::uint64_t off = addr - it->first;
    if (o.freed) raise(FaultKind::UseAfterFree, "access to freed object at " + hex(it->first));
    if (off + len > o.bytes.size()) {
      raise(FaultKind::OutOfBounds, std::to_string(len) + "-byte access at offset " + std::to_string(off) + " of a " +
                                        std::to_string(o.bytes.size()) + "-byte object");
    }
    return o.bytes.data() + off;
  }

 private:
  struct Object {
    std::vector<std::byte> bytes;
    bool freed;
  };
  std::map<std::uint64_t, Object> objects_;
  std::uint64_t next_ = kBase;
};

struct Reg {
  std::uint64_t bits = 0;
  // Provenance of a raw address produced by translating a handle: the object
  // and where it lived at translation time.
  std::uint32_t handle = kNone;
  std::uint64_t base = 0;
  bool poison = false;
};

struct FunctionInfo {
  const ir::Function* fn;
  FunctionId id;
  bool has_releases;
  std::vector<std::size_t> first_non_phi;
};

struct Frame {
  const FunctionInfo* info;
  std::vector<Reg> regs;
  ir::BlockId block = 0;
  std::size_t ip = 0;
  ValueId call_result = kNone;  // caller register receiving our return value
  bool pin_frame = false;
  std::uint32_t occupied = 0;
};

std::uint64_t checksum(std::span<const std::byte> bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (std::byte b : bytes) {
    h ^= static_cast<std::uint64_t>(b);
    h *= 1099511628211ULL;
  }
  return h;
}

class Machine {
 public:
  Machine(const ir::Module& m, const ExecConfig& cfg)
      : m_(m), cfg_(cfg), heap_(cfg.heap), ctx_(runtime_.register_mutator(ParkMode::Simulated)) {
    for (std::size_t k = 0; k < m.functions.size(); ++k) {
      const ir::Function& f = m.functions[k];
      FunctionInfo info{&f, static_cast<FunctionId>(k), false, {}};
      for (const ir::Block& b : f.blocks) {
        std::size_t p = 0;
        while (p < b.insts.size() && f.insts[b.insts[p]].op == Op::Phi) ++p;
        info.first_non_phi.push_back(p);
        for (InstId i : b.insts) info.has_releases = info.has_releases || f.insts[i].op == Op::Release;
      }
      infos_.emplace(f.name, std::move(info));
    }
  }

  Trace run(std::string_view entry, std::span<const std::int64_t> inputs) {
    try {
      auto it = infos_.find(std::string(entry));
      if (it == infos_.end()) raise(FaultKind::BadProgram, "no function @" + std::string(entry));
      const ir::Function& f = *it->second.fn;
      if (inputs.size() != f.params.size()) {
        raise(FaultKind::BadProgram, "@" + f.name + " takes " + std::to_string(f.params.size()) + " arguments");
      }
      std::vector<Reg> args;
      for (std::int64_t v : inputs) args.push_back(Reg{static_cast<std::uint64_t>(v)});
      enter(it->second, args, kNone);
      loop();
    } catch (const Fault& fault) {
      trace_.fault = fault.kind;
      trace_.fault_message = fault.message;
    } catch (const Error& e) {
      trace_.fault = FaultKind::BadProgram;
      trace_.fault_message = e.what();
    }
    return std::move(trace_);
  }

 private:
  bool handle_mode() const { return cfg_.mode == ExecMode::Handle; }
  Counters& counters() { return trace_.counters; }

  void enter(const FunctionInfo& info, const std::vector<Reg>& args, ValueId result) {
    if (stack_.size() >= cfg_.max_call_depth) raise(FaultKind::StackOverflow, "call depth limit reached");
    ++counters().calls;
    Frame fr;
    fr.info = &info;
    fr.regs.resize(info.fn->values.size());
    for (std::size_t k = 0; k < args.size(); ++k) fr.regs[info.fn->params[k]] = args[k];
    fr.call_result = result;
    if (handle_mode() && info.fn->pin_slots) {
      ctx_.frame_push(info.id, *info.fn->pin_slots);
      fr.pin_frame = true;
    }
    stack_.push_back(std::move(fr));
  }

  void leave(std::optional<Reg> value) {
    Frame& fr = stack_.back();
    if (fr.pin_frame) {
      if (fr.info->has_releases && fr.occupied != 0) {
        raise(FaultKind::UnbalancedPins,
              "@" + fr.info->fn->name + " returned holding " + std::to_string(fr.occupied) + " pins");
      }
      pins_held_ -= fr.occupied;
      ctx_.frame_pop();
    }
    const ValueId dest = fr.call_result;
    stack_.pop_back();
    if (stack_.empty()) {
      if (value) trace_.ret = static_cast<std::int64_t>(value->bits);
      return;
    }
    if (dest != kNone) stack_.back().regs[dest] = value.value_or(Reg{});
  }

  Reg get(const Frame& fr, const ir::Operand& o) const {
    if (o.is_const) return Reg{static_cast<std::uint64_t>(o.imm)};
    return fr.regs[o.value];
  }

  void jump(Frame& fr, ir::BlockId to) {
    const ir::Function& f = *fr.info->fn;
    const ir::BlockId from = fr.block;
    const auto& list = f.blocks[to].insts;
    const std::size_t n = fr.info->first_non_phi[to];
    std::vector<std::pair<ValueId, Reg>> incoming;
    for (std::size_t k = 0; k < n; ++k) {
      const Inst& phi = f.insts[list[k]];
      bool found = false;
      for (std::size_t e = 0; e < phi.blocks.size(); ++e) {
        if (phi.blocks[e] == from) {
          incoming.emplace_back(phi.result, get(fr, phi.args[e]));
          found = true;
          break;
        }
      }
      if (!found) raise(FaultKind::BadProgram, "phi without an entry for the incoming edge");
      step();
    }
    for (const auto& [v, r] : incoming) fr.regs[v] = r;
    fr.block = to;
    fr.ip = n;
  }

  void step() {
    if (++counters().steps > cfg_.step_limit) raise(FaultKind::StepLimit, "step limit exceeded");
  }

  // Resolves `len` bytes at a raw address, enforcing pin discipline first.
  std::byte* memory(const Reg& addr, std::uint64_t len) {
    if (is_handle(addr.bits)) raise(FaultKind::HandleDereference, "dereference of handle " + hex(addr.bits));
    if (addr.poison) raise(FaultKind::DeadHandle, "dereference of a translated dead handle");
    if (addr.handle != kNone) {
      const HandleTable& table = heap_.table();
      if (!table.is_active(addr.handle)) {
        raise(FaultKind::UseAfterFree, "object of handle " + std::to_string(addr.handle) + " was freed");
      }
      if (table.entry(addr.handle).base != addr.base) {
        raise(FaultKind::PinnedStability, "raw address into handle " + std::to_string(addr.handle) +
                                              " used after the object moved from " + hex(addr.base) + " to " +
                                              hex(table.entry(addr.handle).base));
      }
    }
    if (handle_mode() && heap_.anchorage().owns(addr.bits)) {
      if (!heap_.anchorage().owner(addr.bits)) raise(FaultKind::UseAfterFree, "access to freed memory " + hex(addr.bits));
      try {
        return heap_.anchorage().bytes(addr.bits, len).data();
      } catch (const FaultError& e) {
        raise(FaultKind::OutOfBounds, e.what());
      }
    }
    if (plain_.owns(addr.bits)) return plain_.bytes(addr.bits, len);
    raise(FaultKind::WildAccess, "access to " + hex(addr.bits));
  }

  std::uint64_t load_word(const Reg& addr) {
    std::uint64_t v;
    std::memcpy(&v, memory(addr, 8), 8);
    return v;
  }

  void store_word(const Reg& addr, std::uint64_t v) { std::memcpy(memory(addr, 8), &v, 8); }

  Reg external_arg(const Reg& r, const std::string& callee) {
    if (is_handle(r.bits)) raise(FaultKind::EscapedHandle, "handle " + hex(r.bits) + " passed to @" + callee);
    return r;
  }

  std::uint64_t alloc(std::uint64_t size, bool handle) {
    if (handle && handle_mode()) {
      try {
        return heap_.halloc(size);
      } catch (const AllocationError& e) {
        raise(FaultKind::BadProgram, e.what());
      }
    }
    return plain_.alloc(size);
  }

  void release_memory(std::uint64_t p) {
    if (p == 0) return;
    if (is_handle(p)) {
      if (!handle_mode()) raise(FaultKind::BadProgram, "handle value in direct mode");
      if (!heap_.table().is_active(Handle{p}.id())) raise(FaultKind::DoubleFree, "free of dead handle " + hex(p));
      try {
        heap_.hfree(p);
      } catch (const FaultError& e) {
        raise(FaultKind::WildAccess, e.what());
      }
      return;
    }
    plain_.free(p);
  }

  std::uint64_t resize(std::uint64_t p, std::uint64_t size, bool handle) {
    if (p == 0) return alloc(size, handle);
    if (is_handle(p)) {
      if (!handle_mode()) raise(FaultKind::BadProgram, "handle value in direct mode");
      if (!heap_.table().is_active(Handle{p}.id())) raise(FaultKind::UseAfterFree, "realloc of dead handle");
      return heap_.hrealloc(p, size);
    }
    const std::uint64_t old = plain_.size_of(p);
    const std::uint64_t q = plain_.alloc(size);
    const std::uint64_t keep = std::min(old, size == 0 ? 1 : size);
    std::memcpy(plain_.bytes(q, keep), plain_.bytes(p, keep), keep);
    plain_.free(p);
    return q;
  }

  std::optional<Reg> builtin(const Inst& in, const std::vector<Reg>& a) {
    const std::string& name = in.callee;
    const auto u = [&](std::size_t k) { return a[k].bits; };
    if (name == "malloc" || name == "halloc") return Reg{alloc(u(0), name[0] == 'h')};
    if (name == "calloc" || name == "hcalloc") {
      if (u(1) != 0 && u(0) > (std::uint64_t{1} << 32) / u(1)) raise(FaultKind::BadProgram, "calloc overflow");
      return Reg{alloc(u(0) * u(1), name[0] == 'h')};
    }
    if (name == "realloc" || name == "hrealloc") return Reg{resize(u(0), u(1), name[0] == 'h')};
    if (name == "free" || name == "hfree") {
      release_memory(u(0));
      return std::nullopt;
    }

    // External routines see raw addresses only.
    if (name == "output") {
      trace_.output.push_back(static_cast<std::int64_t>(u(0)));
      return std::nullopt;
    }
    if (name == "memsum") {
      const Reg p = external_arg(a[0], name);
      const std::uint64_t n = u(1);
      std::uint64_t sum = 0;
      if (n != 0) {
        const std::byte* bytes = memory(p, n * 8);
        for (std::uint64_t k = 0; k < n; ++k) {
          std::uint64_t w;
          std::memcpy(&w, bytes + k * 8, 8);
          sum += w;
        }
      }
      return Reg{sum};
    }
    if (name == "memfill") {
      const Reg p = external_arg(a[0], name);
      const std::uint64_t n = u(1);
      if (n != 0) {
        std::byte* bytes = memory(p, n * 8);
        for (std::uint64_t k = 0; k < n; ++k) std::memcpy(bytes + k * 8, &a[2].bits, 8);
      }
      return std::nullopt;
    }
    if (name == "memcmp") {
      const Reg p = external_arg(a[0], name);
      const Reg q = external_arg(a[1], name);
      const std::uint64_t n = u(2);
      if (n == 0) return Reg{0};
      const int c = std::memcmp(memory(p, n), memory(q, n), n);
      return Reg{static_cast<std::uint64_t>(c < 0 ? -1 : (c > 0 ? 1 : 0))};
    }
    if (name == "memcpy") {
      const Reg d = external_arg(a[0], name);
      const Reg s = external_arg(a[1], name);
      const std::uint64_t n = u(2);
      if (n != 0) std::memmove(memory(d, n), memory(s, n), n);
      return std::nullopt;
    }
    raise(FaultKind::BadProgram, "call to unknown function @" + name);
  }

  void translate(Frame& fr, const Inst& in) {
    const Reg v = get(fr, in.args[0]);
    ++counters().translates;
    Reg out = v;
    if (is_handle(v.bits)) {
      if (!handle_mode()) raise(FaultKind::BadProgram, "handle value in direct mode");
      const Handle h{v.bits};
      const HandleTable& table = heap_.table();
      out = Reg{};
      if (table.is_active(h.id())) {
        const std::uint64_t base = table.entry(h.id()).base;
        out.bits = base + h.offset();
        out.handle = h.id();
        out.base = base;
      } else {
        // Translations may run speculatively in a preheader; a dead handle
        // only faults if the result is dereferenced.
        out.poison = true;
      }
      if (fr.pin_frame && in.slot != kNone) {
        const PinFrameView view = ctx_.frame(ctx_.depth() - 1);
        if (in.slot >= view.slots.size()) raise(FaultKind::BadProgram, "pin slot out of range");
        const std::uint64_t previous = view.slots[in.slot];
        if (previous != 0 && fr.info->has_releases) {
          raise(FaultKind::SlotCollision, "slot " + std::to_string(in.slot) + " of @" + fr.info->fn->name +
                                              " still holds " + hex(previous));
        }
        ctx_.pin(in.slot, v.bits);
        ++counters().pins;
        if (previous == 0) {
          ++fr.occupied;
          ++pins_held_;
        }
        counters().max_pins = std::max<std::uint64_t>(counters().max_pins, pins_held_);
        auto& peak = trace_.peak_frame_pins[fr.info->fn->name];
        peak = std::max(peak, fr.occupied);
      }
    }
    fr.regs[in.result] = out;
  }

  void release(Frame& fr, const Inst& in) {
    ++counters().releases;
    if (!fr.pin_frame) return;
    const ValueId v = in.args[0].value;
    const Inst& t = fr.info->fn->insts[fr.info->fn->values[v].def];
    if (t.slot == kNone) return;
    const PinFrameView view = ctx_.frame(ctx_.depth() - 1);
    if (view.slots[t.slot] != 0) {
      --fr.occupied;
      --pins_held_;
    }
    ctx_.release(t.slot);
  }

  const BarrierEvent* event_for(BarrierTrigger trigger, std::uint64_t index) const {
    for (const BarrierEvent& e : cfg_.schedule.events) {
      if (e.trigger == trigger && e.index == index) return &e;
    }
    return nullptr;
  }

  void barrier(const BarrierEvent& event) {
    if (!handle_mode()) return;
    ++counters().barriers;
    runtime_.request_barrier();
    if (ctx_.state() == MutatorState::Running) runtime_.safepoint_poll(ctx_);
    if (!runtime_.barrier_ready()) raise(FaultKind::BadProgram, "barrier could not stop the world");
    const GlobalPinMap pins = runtime_.unify();

    Anchorage& anchorage = heap_.anchorage();
    const HandleTable& table = heap_.table();
    std::vector<std::pair<HandleId, std::uint64_t>> sums;
    if (cfg_.check_canaries) {
      for (std::uint64_t id = 0; id < table.bump_next(); ++id) {
        if (!table.is_active(static_cast<HandleId>(id))) continue;
        const HandleTableEntry& e = table.entry(static_cast<HandleId>(id));
        sums.emplace_back(static_cast<HandleId>(id), checksum(anchorage.bytes(e.base, e.size)));
      }
    }
    std::vector<std::pair<HandleId, std::uint64_t>> pinned_bases;
    for (HandleId id : pins.ids()) {
      if (table.is_active(id)) pinned_bases.emplace_back(id, table.entry(id).base);
    }

    const std::uint64_t budget = event.budget.value_or(UINT64_MAX);
    for (std::uint32_t k = 0; k < event.max_passes; ++k) {
      const MoveReport report = anchorage.defrag_pass(pins, budget);
      ++counters().passes;
      counters().moves += report.moved_objects;
      counters().moved_bytes += report.moved_bytes;
      for (HandleId id : report.moved) {
        if (pins.contains(id)) raise(FaultKind::PinnedMove, "pinned handle " + std::to_string(id) + " moved");
      }
      if (report.source) anchorage.release_pages(*report.source);
      if (event.budget || report.moved_objects == 0) break;
    }

    std::string entry = "barrier " + std::to_string(counters().barriers - 1) + " pinned [";
    for (std::size_t k = 0; k < pins.ids().size(); ++k) entry += (k ? "," : "") + std::to_string(pins.ids()[k]);
    trace_.log.push_back(entry + "]");

    for (const auto& [id, base] : pinned_bases) {
      if (table.entry(id).base != base) raise(FaultKind::PinnedMove, "pinned handle " + std::to_string(id) + " moved");
    }
    for (const auto& [id, sum] : sums) {
      const HandleTableEntry& e = table.entry(id);
      if (checksum(anchorage.bytes(e.base, e.size)) != sum) {
        raise(FaultKind::Canary, "contents of handle " + std::to_string(id) + " changed across a barrier");
      }
    }
    runtime_.barrier_end();
  }

  void call(Frame& fr, const Inst& in) {
    std::vector<Reg> args;
    args.reserve(in.args.size());
    for (const ir::Operand& o : in.args) args.push_back(get(fr, o));
    if (auto it = infos_.find(in.callee); it != infos_.end()) {
      ++fr.ip;
      enter(it->second, args, in.result);
      return;
    }
    std::optional<Reg> result;
    if (in.external) {
      const std::uint64_t index = counters().external_calls++;
      if (handle_mode()) runtime_.external_enter(ctx_);
      if (const BarrierEvent* e = event_for(BarrierTrigger::External, index)) barrier(*e);
      result = builtin(in, args);
      if (handle_mode()) runtime_.external_exit(ctx_);
    } else {
      result = builtin(in, args);
    }
    if (in.result != kNone) fr.regs[in.result] = result.value_or(Reg{});
    ++fr.ip;
  }

  static std::uint64_t binary(Op op, std::uint64_t a, std::uint64_t b) {
    const auto sa = static_cast<std::int64_t>(a);
    const auto sb = static_cast<std::int64_t>(b);
    switch (op) {
      case Op::Add: return a + b;
      case Op::Sub: return a - b;
      case Op::Mul: return a * b;
      case Op::And: return a & b;
      case Op::Or: return a | b;
      case Op::Xor: return a ^ b;
      case Op::Shl: return a << (b & 63);
      case Op::LShr: return a >> (b & 63);
      case Op::AShr: return static_cast<std::uint64_t>(sa >> (b & 63));
      case Op::Eq: return a == b;
      case Op::Ne: return a != b;
      case Op::Slt: return sa < sb;
      case Op::Sle: return sa <= sb;
      case Op::Sgt: return sa > sb;
      case Op::Sge: return sa >= sb;
      default: return 0;
    }
  }

  void loop() {
    while (!stack_.empty()) {
      Frame& fr = stack_.back();
      const ir::Function& f = *fr.info->fn;
      const auto& list = f.blocks[fr.block].insts;
      if (fr.ip >= list.size()) raise(FaultKind::BadProgram, "fell off the end of a block");
      const Inst& in = f.insts[list[fr.ip]];
      step();
      switch (in.op) {
        case Op::Load: {
          const std::uint64_t w = load_word(get(fr, in.args[0]));
          fr.regs[in.result] = Reg{w};
          break;
        }
        case Op::Store:
          store_word(get(fr, in.args[0]), get(fr, in.args[1]).bits);
          break;
        case Op::Gep: {
          Reg r = get(fr, in.args[0]);
          r.bits += get(fr, in.args[1]).bits;
          fr.regs[in.result] = r;
          break;
        }
        case Op::Phi:
          raise(FaultKind::BadProgram, "phi reached outside block entry");
        case Op::Br:
          jump(fr, in.blocks[0]);
          continue;
        case Op::CondBr:
          jump(fr, get(fr, in.args[0]).bits != 0 ? in.blocks[0] : in.blocks[1]);
          continue;
        case Op::Ret:
          leave(in.args.empty() ? std::nullopt : std::optional<Reg>(get(fr, in.args[0])));
          continue;
        case Op::Call:
          call(fr, in);
          continue;
        case Op::Translate:
          translate(fr, in);
          break;
        case Op::Release:
          release(fr, in);
          break;
        case Op::Safepoint: {
          const std::uint64_t index = counters().safepoints++;
          if (const BarrierEvent* e = event_for(BarrierTrigger::Safepoint, index)) barrier(*e);
          break;
        }
        case Op::PtrToInt:
          fr.regs[in.result] = Reg{get(fr, in.args[0]).bits};
          break;
        case Op::IntToPtr:
          fr.regs[in.result] = Reg{get(fr, in.args[0]).bits};
          break;
        default:
          fr.regs[in.result] = Reg{binary(in.op, get(fr, in.args[0]).bits, get(fr, in.args[1]).bits)};
          break;
      }
      ++fr.ip;
    }
  }

  const ir::Module& m_;
  const ExecConfig& cfg_;
  HandleHeap heap_;
  PlainHeap plain_;
  PinRuntime runtime_;
  MutatorContext& ctx_;
  std::unordered_map<std::string, FunctionInfo> infos_;
  std::vector<Frame> stack_;
  std::uint64_t pins_held_ = 0;
  Trace trace_;
};

}  // namespace

Trace run(const ir::Module& program, std::string_view entry, std::span<const std::int64_t> inputs,
          const ExecConfig& config) {
  Machine machine(program, config);
  return machine.run(entry, inputs);
}

namespace {

bool diverges(const ir::Module& transformed, std::string_view entry, std::span<const std::int64_t> inputs,
              const ExecConfig& base, const BarrierSchedule& schedule, const Trace& reference) {
  ExecConfig cfg = base;
  cfg.mode = ExecMode::Handle;
  cfg.schedule = schedule;
  return !run(transformed, entry, inputs, cfg).same_behaviour(reference);
}

}  // namespace

EquivalenceVerdict check_equivalence(const ir::Module& original, const ir::Module& transformed,
                                     std::string_view entry, std::span<const std::int64_t> inputs,
                                     const std::vector<BarrierSchedule>& schedules, ExecConfig base) {
  EquivalenceVerdict verdict;
  ExecConfig direct = base;
  direct.mode = ExecMode::Direct;
  direct.schedule = {};
  verdict.reference = run(original, entry, inputs, direct);

  for (std::size_t k = 0; k < schedules.size(); ++k) {
    ExecConfig cfg = base;
    cfg.mode = ExecMode::Handle;
    cfg.schedule = schedules[k];
    Trace t = run(transformed, entry, inputs, cfg);
    if (!t.same_behaviour(verdict.reference)) {
      verdict.equivalent = false;
      // Greedy one-at-a-time removal until no single event can go.
      BarrierSchedule minimized = schedules[k];
      for (bool shrunk = true; shrunk;) {
        shrunk = false;
        for (std::size_t e = 0; e < minimized.events.size(); ++e) {
          BarrierSchedule trial = minimized;
          trial.events.erase(trial.events.begin() + static_cast<std::ptrdiff_t>(e));
          if (diverges(transformed, entry, inputs, base, trial, verdict.reference)) {
            minimized = std::move(trial);
            shrunk = true;
            break;
          }
        }
      }
      verdict.divergences.push_back(Divergence{k, verdict.reference, t, std::move(minimized)});
    }
    verdict.traces.push_back(std::move(t));
  }
  return verdict;
}

}  // namespace alaska
