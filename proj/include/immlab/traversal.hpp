#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "immlab/execgraph.hpp"

namespace immlab {

// relaxed: rlx reads and writes only, no rmw, no fences.
enum class Fragment { full, relaxed };
bool relaxed_only(const Execution &g);

struct TraversalConfig {
	EventSet C; // covered
	EventSet I; // issued
	friend bool operator==(const TraversalConfig &, const TraversalConfig &) = default;
};

TraversalConfig initial_config(const Execution &g);
TraversalConfig final_config(const Execution &g);

enum class StepKind { cover, rmw_cover, release_cover, issue };
const char *to_string(StepKind k);

struct TravStep {
	StepKind kind = StepKind::cover;
	std::size_t e = 0;
	// rmw_cover: the write partner and whether it gets issued by this step
	std::optional<std::size_t> w;
	bool issues_w = false;

	static TravStep single(StepKind k, std::size_t e) { return TravStep{k, e, std::nullopt, false}; }
	static TravStep rmw(std::size_t r, std::size_t w, bool issue) { return TravStep{StepKind::rmw_cover, r, w, issue}; }

	int tid(const Execution &g) const { return g.ev[e].tid; }
	friend bool operator==(const TravStep &, const TravStep &) = default;
};

std::string step_name(const Execution &g, const TravStep &s);

// Copy of g whose sc field holds an IMM_S witness. Throws ContractViolation if g is not IMM_S-consistent.
Execution attach_sc_witness(const Execution &g);

// Precomputed side conditions of Issuable/Coverable for one graph.
class Traversal {
public:
	explicit Traversal(const Execution &g, Fragment f = Fragment::full);

	const Execution &graph() const { return g_; }
	Fragment fragment() const { return frag_; }

	bool coverable(const TraversalConfig &tc, std::size_t e) const;
	bool issuable(const TraversalConfig &tc, std::size_t w) const;

	// Each failed trav-config clause, by name.
	std::vector<std::string> check_config(const TraversalConfig &tc) const;
	// Only the partial-traversal-config clauses (init covered, Coverable, Issuable).
	bool partial_config(const TraversalConfig &tc) const;

	std::vector<TravStep> enabled_steps(const TraversalConfig &tc) const;
	TraversalConfig apply(const TraversalConfig &tc, const TravStep &s) const;

	// Kind priority cover > rmw-cover > release-cover > issue, then the thread of the previous step,
	// then the smallest (tid, sn).
	std::optional<TravStep> choose(const TraversalConfig &tc, std::optional<int> prev_tid) const;

	// Small steps: cover or issue a single event.
	std::optional<TravStep> find_next(const TraversalConfig &tc) const;
	TraversalConfig small_step(const TraversalConfig &tc, const TravStep &s) const;
	std::optional<TravStep> lift_to_trav(const TraversalConfig &tc, const TravStep &small) const;

private:
	Execution g_;
	Fragment frag_;
	Rel po_, rf_, rmw_;
	EventSet W_, R_, Wrel_, Fsc_, Fweak_;
	std::vector<EventSet> po_pred_, need_cov_, need_iss_, sc_pred_;
	Rel ar_plus_;
};

struct TraversalStuck : std::runtime_error {
	TraversalConfig at;
	TraversalStuck(const std::string &what, TraversalConfig tc) : std::runtime_error(what), at(std::move(tc)) {}
};

struct TraversalRun {
	std::vector<TravStep> steps;
	std::vector<TraversalConfig> configs; // configs[k] is the config after steps[k-1]; configs[0] the start
};

// Runs the strategy until ⟨E, W⟩. Every intermediate config is checked; violations throw TraversalStuck.
TraversalRun traverse_to_completion(const Traversal &t, std::optional<TraversalConfig> start = std::nullopt);
// Same, driven by find_next and lift_to_trav.
TraversalRun traverse_small_steps(const Traversal &t, std::optional<TraversalConfig> start = std::nullopt);

// Applies the steps from initial_config; returns nullopt if some step is not enabled.
std::optional<TraversalConfig> replay(const Traversal &t, const std::vector<TravStep> &steps);

} // namespace immlab
