#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "immlab/execgraph.hpp"
#include "immlab/program.hpp"

namespace immlab {

struct Bounds {
	Val max_val = 1;
	int unroll = 8; // backward jumps per thread run
	int jobs = 1;
};

// Thread-local graph; events are numbered in po order.
struct ThreadGraph {
	int tid = 0;
	std::vector<Label> lab;
	std::vector<std::pair<std::size_t, std::size_t>> rmw, data, addr, ctrl, casdep;
};

struct ThreadState {
	const Thread *code = nullptr;
	int tid = 0;
	int pc = 0;
	std::vector<Val> phi;
	ThreadGraph g;
	std::vector<std::vector<std::size_t>> psi;
	std::vector<std::size_t> S;
	int backjumps = 0;

	bool terminal() const { return pc < 0 || static_cast<std::size_t>(pc) >= code->code.size(); }
	// true when the next step reads memory and needs a value choice
	bool needs_value() const;
	// location index the next memory instruction accesses
	int next_location(const Program &p) const;
};

struct AddressError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

ThreadState initial_state(const Program &p, int tid);
// One thread step. read_value is required exactly when needs_value().
ThreadState thread_step(const ThreadState &s, const Program &p, std::optional<Val> read_value);

struct ThreadRun {
	ThreadGraph g;
	std::vector<Val> regs;
};

struct ThreadGraphs {
	std::vector<ThreadRun> runs; // terminal runs only
	bool truncated = false;
	std::vector<std::vector<Val>> written; // per location, values written on any path
};

// Per-location read domains.
using ValueDomain = std::vector<std::vector<Val>>;

ThreadGraphs thread_graphs(const Program &p, int tid, const ValueDomain &dom, const Bounds &b);
// Fixpoint over written values, capped at max_val. Sets *truncated when a larger value is written.
ValueDomain read_domain(const Program &p, const Bounds &b, bool *truncated);

Execution assemble(const Program &p, const std::vector<const ThreadGraph *> &threads);

struct Candidate {
	Execution g;
	std::vector<std::vector<Val>> regs;
	std::pair<std::size_t, std::size_t> key; // (thread combination, rf/co choice): total order of emission
};

struct EnumStats {
	std::size_t candidates = 0;
	std::size_t combinations = 0;
	bool truncated = false;
};

// Streams every candidate. With jobs > 1 the visitor is called concurrently and must be thread-safe;
// return false to stop early (best effort across workers).
EnumStats for_each_candidate(const Program &p, const Bounds &b, const std::function<bool(const Candidate &)> &visit);

// rf and co completions of one assembled graph, lexicographic.
void for_each_completion(const Execution &base, const std::function<bool(Execution &)> &visit);

} // namespace immlab
