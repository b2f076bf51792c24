#pragma once

#include <optional>
#include <string>
#include <vector>

#include "immlab/execgraph.hpp"

namespace immlab {

struct Violation {
	std::string axiom;
	std::vector<Rel::Pair> witness; // a cycle, a reflexive path, or offending pairs
};

struct Verdict {
	bool consistent = true;
	std::vector<Violation> violations;
	std::optional<Rel> sc_witness; // IMM_S only

	void fail(std::string axiom, std::vector<Rel::Pair> witness = {});
	bool violates(const std::string &axiom) const;
};

// Shared axioms; each appends to v when violated.
void check_rf_complete(const Execution &g, Verdict &v);
void check_co_total(const Execution &g, Verdict &v);
void check_irreflexive(const Rel &r, const std::string &axiom, Verdict &v);
void check_acyclic(const Rel &r, const std::string &axiom, Verdict &v);
// rmw ∩ (fre;coe) = ∅
void check_atomicity(const Execution &g, Verdict &v);

Verdict check_imm(const Execution &g);
// Uses g.sc when present, otherwise searches the total orders of F^sc.
Verdict check_imms(const Execution &g);
Verdict check_c11(const Execution &g);
Verdict check_rc11(const Execution &g);

// The sc order found by check_imms (or g.sc); nullopt when inconsistent.
std::optional<Rel> imms_sc_order(const Execution &g);

} // namespace immlab
