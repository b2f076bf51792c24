#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "immlab/enumerate.hpp"
#include "immlab/traversal.hpp"

namespace immlab {

// Simulation runs use whole timestamps (co ranks); certification inserts fresh writes between them.
using Timestamp = boost::rational<std::int64_t>;

struct Message {
	int loc = 0;
	Val val = 0;
	Timestamp t = 0;
	friend bool operator<(const Message &a, const Message &b)
	{
		if (a.loc != b.loc)
			return a.loc < b.loc;
		if (a.t != b.t)
			return a.t < b.t;
		return a.val < b.val;
	}
	friend bool operator==(const Message &a, const Message &b) = default;
};

using Memory = std::set<Message>;

struct ThreadStateP {
	ThreadState sigma;
	std::vector<Timestamp> V; // per location
	std::set<Message> P;      // outstanding promises
};

struct MachineState {
	std::vector<ThreadStateP> TS;
	Memory M;
};

struct UnsupportedFragment : std::runtime_error {
	UnsupportedFragment() : std::runtime_error("unsupported fragment") {}
};

struct PromiseError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

// rlx loads and stores, assignments and branches only.
bool relaxed_program(const Program &p);

MachineState initial_machine(const Program &p);

// Silent steps (assignments, branches) until the next memory instruction or the end.
// Stops after max_steps silent steps.
void run_silent(ThreadStateP &ts, const Program &p, int max_steps = 4096);

// Thread steps. Each throws PromiseError on a stale read, an occupied timestamp or a bad fulfilment.
void read_step(ThreadStateP &ts, const Program &p, const Memory &M, Timestamp t);
// Executes the pending store at timestamp t: fulfils a matching promise if there is one, else adds a message.
void write_step(ThreadStateP &ts, const Program &p, Memory &M, Timestamp t);
void promise_step(ThreadStateP &ts, Memory &M, const Message &m);

struct CertifyResult {
	bool certified = false;
	bool inconclusive = false; // step bound exhausted somewhere in the search
	std::size_t states = 0;
};

// Thread-alone search for a run that empties P. New writes take any free slot above the view.
CertifyResult certify(const ThreadStateP &ts, const Program &p, const Memory &M, int max_depth = 64);

// T(w) = rank of w in the co order of its location, init at 0.
std::vector<std::int64_t> timestamp_map(const Execution &g);

// Final value per location: the message with the largest timestamp.
std::vector<Val> machine_outcome(const MachineState &ms);

// Names of the violated simulation conditions (1)-(7) for thread tid.
std::vector<std::string> check_simulation(const Execution &g, const TraversalConfig &tc, const MachineState &ms,
					  int tid, const std::vector<std::int64_t> &T);

struct SimEvent {
	TravStep step;
	std::string action; // machine-level description
	bool certified = true;
};

struct Simulation {
	std::vector<SimEvent> trace;
	MachineState final;
	std::vector<Val> outcome;
	std::size_t certifications = 0;
	std::size_t inconclusive = 0;
};

// Replays a relaxed traversal on the machine. Any failed assertion throws PromiseError with the step index.
Simulation simulate_traversal(const Program &p, const Execution &g, const std::vector<TravStep> &steps);

} // namespace immlab
