#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "immlab/program.hpp"
#include "immlab/relalg.hpp"

namespace immlab {

// Serial numbers are (whole, half); half=1 encodes whole+0.5.
struct Event {
	int tid = -1; // -1 for initialization events
	int whole = 0;
	int half = 0;
	int init_loc = -1;

	bool is_init() const { return tid < 0; }
	static Event init(int loc) { return Event{-1, 0, 0, loc}; }
	static Event at(int tid, int whole, int half = 0) { return Event{tid, whole, half, -1}; }
};

// sequenced-before
bool sb(const Event &a, const Event &b);
bool operator==(const Event &a, const Event &b);
std::string event_name(const Event &e);

enum class Kind { R, W, F };

struct Label {
	Kind kind = Kind::F;
	Mode mode = Mode::rlx;
	int loc = -1;
	Val val = 0;
	bool ex = false;
	RmwMode rmw_mode = RmwMode::normal;

	static Label read(Mode m, int loc, Val v, bool ex = false) { return Label{Kind::R, m, loc, v, ex, RmwMode::normal}; }
	static Label write(Mode m, int loc, Val v, RmwMode r = RmwMode::normal) { return Label{Kind::W, m, loc, v, false, r}; }
	static Label fence(Mode m) { return Label{Kind::F, m, -1, 0, false, RmwMode::normal}; }
};

bool operator==(const Label &a, const Label &b);
std::string label_name(const Label &l, const std::vector<std::string> &locs);

struct DerivedRels;

// Events are kept sorted: init events first (one per location), then by (tid, sn).
class Execution {
public:
	Execution() = default;
	Execution(const Execution &o);
	Execution &operator=(const Execution &o);
	Execution(Execution &&) = default;
	Execution &operator=(Execution &&) = default;

	std::vector<Event> ev;
	std::vector<Label> lab;
	std::vector<std::string> locs;
	Rel rmw, data, addr, ctrl, casdep, rf, co;
	std::optional<Rel> sc;

	std::size_t size() const { return ev.size(); }
	int nthreads() const;

	// Resets every relation to an empty one over the current event list.
	void reset_relations();
	// Sorts events; returns old->new index map. Relations are remapped.
	std::vector<std::size_t> normalize();

	EventSet all() const { return EventSet::full(size()); }
	EventSet init() const;
	EventSet thread(int tid) const;
	EventSet reads() const;
	EventSet writes() const;
	EventSet fences() const;
	EventSet reads_at_least(Mode m) const;
	EventSet writes_at_least(Mode m) const;
	EventSet fences_at_least(Mode m) const;
	EventSet fences_exactly(Mode m) const;
	EventSet exclusive_reads() const;
	EventSet strong_writes() const;
	EventSet at_loc(int x) const;
	std::vector<int> loc_map() const;

	Rel po() const;
	Rel same_thread() const;

	// Memoized; mutate only before the first call on this object.
	const DerivedRels &derived() const;
	void invalidate() { memo_.reset(); }

private:
	mutable std::shared_ptr<const DerivedRels> memo_;
};

struct DerivedRels {
	Rel po, po_loc;
	Rel rfe, rfi, coe, coi, fr, fre, fri;
	Rel rs, release, sw, hb, eco;
	Rel deps, ppo, bob, fwbob, detour, psc, ar_base, ar;
	Rel rs_rc11, release_rc11, sw_rc11, hb_rc11, psc_rc11, ar_rc11;
	Rel vf_rlx;
};

DerivedRels derive(const Execution &g);
// (rf;[D])?;(hb;[F^sc])?;sc?;hb with hb = hb_RC11
Rel bvf(const Execution &g, const EventSet &d);

std::vector<std::string> wellformed(const Execution &g);
Execution restrict_thread(const Execution &g, int tid);
// Subgraph on the given events; every relation restricted.
Execution restrict_events(const Execution &g, const EventSet &keep, std::vector<std::size_t> *old_to_new = nullptr);
std::vector<Val> outcome(const Execution &g);

nlohmann::json to_json(const Execution &g);
Execution execution_from_json(const nlohmann::json &j);
std::string dump_text(const Execution &g);

} // namespace immlab
