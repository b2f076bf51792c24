#pragma once

#include <optional>
#include <string>
#include <vector>

#include "immlab/consistency.hpp"
#include "immlab/execgraph.hpp"

namespace immlab {

enum class Arch { power, arm };
// Access annotations and fence kinds of the hardware models.
enum class HwMode { plain, Q, L, isync, lwsync, sync, ld, sy };
const char *to_string(HwMode m);

// A POWER or ARM graph. g carries events, locations, values and relations (rmw, data, addr, ctrl, rf, co;
// casdep stays empty); mode is authoritative for annotations. g.lab modes are set to the nearest IMM mode
// so that the IMM well-formedness checker applies.
struct HwExecution {
	Arch arch = Arch::power;
	Execution g;
	std::vector<HwMode> mode;
	std::vector<std::optional<std::size_t>> src_of; // source event per target event; nullopt for inserted fences

	std::size_t size() const { return g.size(); }
	EventSet with_mode(HwMode m) const;
};

struct ReleaseWritesPresent : std::runtime_error {
	ReleaseWritesPresent() : std::runtime_error("release writes present; run split_release") {}
};

struct FractionalSerials : std::runtime_error {
	FractionalSerials() : std::runtime_error("graph has fractional serial numbers") {}
};

// Inserts F^rel before every release write (before the rmw read for rmw writes) unless an F^rel-or-stronger
// already precedes it immediately, weakens the writes to rlx and renumbers serials to whole numbers.
Execution split_release(const Execution &g);

HwExecution to_power(const Execution &g);
HwExecution to_arm(const Execution &g);

// Every "corresponds" bullet of the mapping definitions; empty when hw corresponds to g.
std::vector<std::string> correspondence_check(const Execution &g, const HwExecution &hw);

struct PowerPpo {
	Rel ii, ic, ci, cc, ppo;
};

// Seeds of the ii/ic/ci/cc rules.
struct PowerBase {
	Rel addr, data, rdw, rfi, ctrl_isync, detour, ctrl, addr_po, po_loc;
};

PowerBase power_base(const HwExecution &hw);
// Least fixpoint of the 22 rules, computed with a per-fact worklist. armv7 drops the po|loc rule.
PowerPpo power_ppo(const PowerBase &b, const EventSet &reads, const EventSet &writes, bool armv7 = false);

struct PowerOptions {
	bool at_axiom = false;
	bool armv7 = false;
};

Verdict check_power(const HwExecution &hw, const PowerOptions &opt = {});
Verdict check_arm(const HwExecution &hw);

struct MappingReport {
	std::size_t candidates = 0;
	std::size_t target_consistent = 0;
	std::vector<Execution> counterexamples;
};

} // namespace immlab
