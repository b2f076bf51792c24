#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "immlab/consistency.hpp"
#include "immlab/enumerate.hpp"
#include "immlab/hwmodels.hpp"

namespace immlab {

enum class Model { imm, imms, c11, rc11, power, arm };
const char *to_string(Model m);
std::optional<Model> parse_model(const std::string &s);
const std::vector<Model> &all_models();

struct ModelOptions {
	PowerOptions power;
};

// power and arm check the mapped graph: to_power(split_release(g)) and to_arm(g).
Verdict check_model(const Execution &g, Model m, const ModelOptions &opt = {});

struct FinalState {
	std::vector<std::vector<Val>> regs;
	std::vector<Val> mem;
	auto operator<=>(const FinalState &) const = default;
};

struct OutcomeReport {
	std::set<std::vector<Val>> mem;
	std::set<FinalState> finals;
	std::size_t candidates = 0;
	std::size_t consistent = 0;
	bool lower_bound = false; // enumeration was truncated
};

// Uses p.max_val unless the bounds raise it.
Bounds effective_bounds(const Program &p, Bounds b);
OutcomeReport outcomes(const Program &p, Model m, const Bounds &b, const ModelOptions &opt = {});
bool reachable(const OutcomeReport &r, const Assertion &a);

// Check over all candidates: target-consistent implies IMM-consistent.
MappingReport empirical_mapping_theorem(const Program &p, Arch target, const Bounds &b,
					const PowerOptions &opt = {});

} // namespace immlab
