#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "immlab/execgraph.hpp"
#include "immlab/program.hpp"
#include "immlab/traversal.hpp"

namespace immlab {

// C ∪ dom(detour?;(deps ∪ rfi)*;[I])
EventSet determined(const Execution &g, const TraversalConfig &tc);

// Everything below works in g's indexing. tid is the certified thread.
EventSet cert_events(const Execution &g, const TraversalConfig &tc, int tid, Fragment f);
// The set whose rf edges survive: E_crt ∩ (C ∪ I ∪ E_≠tid ∪ dom(rfi?;ppo;[I]) [∪ codom(rfe;[R^acq])]).
EventSet cert_determined(const Execution &g, const TraversalConfig &tc, int tid, const EventSet &E_crt, Fragment f);
// relaxed: (rf;[D])?;po. full: bvf(g, D).
Rel cert_bvf(const Execution &g, const EventSet &D, Fragment f);
// relaxed: co restricted to E_crt. full: non-issued writes of tid pushed as late as possible.
Rel cert_co(const Execution &g, const TraversalConfig &tc, int tid, const EventSet &E_crt, Fragment f);
// rf;[D] plus, for every other read of E_crt, the co-latest same-location write visible through bvf.
// co is G.co for the relaxed fragment and cert_co otherwise.
Rel cert_rf(const Execution &g, const EventSet &E_crt, const EventSet &D, const Rel &co, const Rel &bvf);

struct CertShapeChange : std::runtime_error {
	using std::runtime_error::runtime_error;
};

// Re-runs thread tid with every read pinned to the value of its rf_crt source, in po order.
// Returns the new labels of g (other threads unchanged). Throws CertShapeChange when an event of E_crt
// changes kind, location, mode or dependencies, or the thread stops early.
std::vector<Label> reexecute_labels(const Program &p, const Execution &g, int tid, const EventSet &E_crt,
				    const Rel &rf_crt);

struct CertGraph {
	Execution g;                       // the certification graph, own indexing
	std::vector<std::size_t> to_orig;  // g index -> source index
	EventSet E, D;                     // source indexing
	TraversalConfig tc;                // ⟨C ∪ E_≠tid, I⟩ in own indexing
	int tid = 0;
	Fragment frag = Fragment::full;
};

CertGraph build_cert_graph(const Program &p, const Execution &g, const TraversalConfig &tc, int tid, Fragment f);
CertGraph build_cert_graph(const Program &p, const Execution &g, const TraversalConfig &tc, int tid);

// Each violated clause by name. The determined set of the clauses is cg.D; determined(g, tc) is only
// required to be covered on the certified thread.
std::vector<std::string> check_cert_compl(const Program &p, const Execution &g, const TraversalConfig &tc,
					  const CertGraph &cg);

// Threads with an issued, not yet covered write.
std::vector<int> threads_to_certify(const Execution &g, const TraversalConfig &tc);

} // namespace immlab
