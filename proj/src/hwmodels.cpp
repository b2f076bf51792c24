#include "immlab/hwmodels.hpp"

#include <algorithm>

namespace immlab {

const char *to_string(HwMode m)
{
	switch (m) {
	case HwMode::plain:
		return "plain";
	case HwMode::Q:
		return "Q";
	case HwMode::L:
		return "L";
	case HwMode::isync:
		return "isync";
	case HwMode::lwsync:
		return "lwsync";
	case HwMode::sync:
		return "sync";
	case HwMode::ld:
		return "ld";
	case HwMode::sy:
		return "sy";
	}
	return "?";
}

EventSet HwExecution::with_mode(HwMode m) const
{
	EventSet s(size());
	for (std::size_t i = 0; i < size(); ++i)
		if (mode[i] == m)
			s.insert(i);
	return s;
}

namespace {

// nearest IMM mode, only so that wellformed() accepts the graph
Mode imm_mode(HwMode m)
{
	switch (m) {
	case HwMode::Q:
	case HwMode::isync:
	case HwMode::ld:
		return Mode::acq;
	case HwMode::L:
		return Mode::rel;
	case HwMode::lwsync:
		return Mode::acqrel;
	case HwMode::sync:
	case HwMode::sy:
		return Mode::sc;
	case HwMode::plain:
		break;
	}
	return Mode::rlx;
}

struct Rebuilt {
	Execution g;
	std::vector<std::optional<std::size_t>> src_of;
	std::vector<std::size_t> old_to_new;
};

// Copies g, adding a fence right after (after=true) or before each marked event.
// Inserted events get half=1 after their anchor; with renumber every thread gets whole serials 0..k.
Rebuilt insert_fences(const Execution &g, const EventSet &marked, const Label &fence, bool after, bool renumber)
{
	Rebuilt out;
	out.g.locs = g.locs;
	out.old_to_new.assign(g.size(), 0);
	int cur_tid = -2, counter = 0;
	auto push = [&](Event e, const Label &l, std::optional<std::size_t> src) {
		if (renumber && !e.is_init()) {
			if (e.tid != cur_tid) {
				cur_tid = e.tid;
				counter = 0;
			}
			e.whole = counter++;
			e.half = 0;
		}
		out.g.ev.push_back(e);
		out.g.lab.push_back(l);
		out.src_of.push_back(src);
	};
	for (std::size_t i = 0; i < g.size(); ++i) {
		const auto &e = g.ev[i];
		Event inserted = Event::at(e.tid, e.whole, 1);
		if (!after && marked.contains(i))
			push(inserted, fence, std::nullopt); // only used with renumber

		out.old_to_new[i] = out.g.ev.size();
		push(e, g.lab[i], i);
		if (after && marked.contains(i)) {
			if (e.half != 0)
				throw FractionalSerials();
			push(inserted, fence, std::nullopt);
		}
	}
	const auto n = out.g.size();
	out.g.reset_relations();
	auto map = [&](const Rel &r) {
		Rel m(n);
		for (auto [a, b] : r.pairs())
			m.insert(out.old_to_new[a], out.old_to_new[b]);
		return m;
	};
	out.g.rmw = map(g.rmw);
	out.g.data = map(g.data);
	out.g.addr = map(g.addr);
	out.g.ctrl = map(g.ctrl);
	out.g.casdep = map(g.casdep);
	out.g.rf = map(g.rf);
	out.g.co = map(g.co);
	if (g.sc)
		out.g.sc = map(*g.sc);
	return out;
}

bool whole_serials(const Execution &g)
{
	return std::all_of(g.ev.begin(), g.ev.end(), [](auto &e) { return e.half == 0; });
}

EventSet image(const EventSet &s, const std::vector<std::size_t> &m, std::size_t n)
{
	EventSet out(n);
	s.for_each([&](std::size_t e) { out.insert(m[e]); });
	return out;
}

Rel image(const Rel &r, const std::vector<std::size_t> &m, std::size_t n)
{
	Rel out(n);
	for (auto [a, b] : r.pairs())
		out.insert(m[a], m[b]);
	return out;
}

} // namespace

Execution split_release(const Execution &g)
{
	const auto po = g.po();
	const auto ipo = immediate(po);
	const auto strong_fence = g.fences_at_least(Mode::rel);
	EventSet marked(g.size());
	auto covered = [&](std::size_t anchor) {
		auto pred = ipo.pred(anchor);
		return pred.intersects(strong_fence);
	};
	g.writes_at_least(Mode::rel).for_each([&](std::size_t w) {
		auto r = g.rmw.pred(w);
		std::size_t anchor = r.empty() ? w : r.members().front();
		if (!covered(anchor))
			marked.insert(anchor);
	});
	auto rb = insert_fences(g, marked, Label::fence(Mode::rel), false, true);
	for (auto &l : rb.g.lab)
		if (l.kind == Kind::W && l.mode == Mode::rel)
			l.mode = Mode::rlx;
	return std::move(rb.g);
}

namespace {

// ctrl ∪ ctrl;po so the target stays well-formed
Rel close_ctrl(const Rel &ctrl, const Rel &po)
{
	return ctrl | compose(ctrl, po);
}

} // namespace

HwExecution to_power(const Execution &g)
{
	if (!g.writes_at_least(Mode::rel).empty())
		throw ReleaseWritesPresent();
	if (!whole_serials(g))
		throw FractionalSerials();
	const auto Racq = g.reads_at_least(Mode::acq);
	auto marked = Racq - dom(g.rmw);
	marked |= codom(restrict(g.rmw, Racq, g.all()));
	auto rb = insert_fences(g, marked, Label::fence(Mode::acq), true, false);
	HwExecution hw;
	hw.arch = Arch::power;
	hw.src_of = rb.src_of;
	const auto n = rb.g.size();
	hw.mode.assign(n, HwMode::plain);
	for (std::size_t i = 0; i < n; ++i) {
		auto &l = rb.g.lab[i];
		if (!rb.src_of[i]) {
			hw.mode[i] = HwMode::isync;
		} else if (l.kind == Kind::F) {
			hw.mode[i] = l.mode == Mode::sc ? HwMode::sync : HwMode::lwsync;
		}
		l.mode = imm_mode(hw.mode[i]);
		l.rmw_mode = RmwMode::normal;
	}
	auto &t = rb.g;
	const auto po = t.po();
	const auto &m = rb.old_to_new;
	auto Racq_t = image(Racq, m, n);
	auto Rex_t = image(g.exclusive_reads(), m, n);
	auto rmw_data = t.rmw & t.data;
	Rel ctrl = t.ctrl;
	ctrl |= compose(Rel::identity(Racq_t), po) - t.rmw;
	ctrl |= compose(Rel::identity(Rex_t), po) - rmw_data;
	ctrl |= compose(compose(t.data, Rel::identity(codom(t.rmw))), po);
	ctrl |= compose(t.casdep, po);
	t.ctrl = close_ctrl(ctrl, po);
	t.casdep = Rel(n);
	t.sc.reset();
	hw.g = std::move(t);
	return hw;
}

HwExecution to_arm(const Execution &g)
{
	if (!whole_serials(g))
		throw FractionalSerials();
	auto rb = insert_fences(g, g.strong_writes(), Label::fence(Mode::acq), true, false);
	HwExecution hw;
	hw.arch = Arch::arm;
	hw.src_of = rb.src_of;
	const auto n = rb.g.size();
	hw.mode.assign(n, HwMode::plain);
	for (std::size_t i = 0; i < n; ++i) {
		auto &l = rb.g.lab[i];
		if (!rb.src_of[i])
			hw.mode[i] = HwMode::ld;
		else if (l.kind == Kind::F)
			hw.mode[i] = l.mode == Mode::acq ? HwMode::ld : HwMode::sy;
		else if (l.kind == Kind::R && l.mode == Mode::acq)
			hw.mode[i] = HwMode::Q;
		else if (l.kind == Kind::W && l.mode == Mode::rel)
			hw.mode[i] = HwMode::L;
		l.mode = imm_mode(hw.mode[i]);
		l.rmw_mode = RmwMode::normal;
	}
	auto &t = rb.g;
	const auto po = t.po();
	auto Rex_t = image(g.exclusive_reads(), rb.old_to_new, n);
	Rel ctrl = t.ctrl;
	ctrl |= compose(Rel::identity(Rex_t), po) - (t.rmw & t.data);
	ctrl |= compose(t.casdep, po);
	t.ctrl = close_ctrl(ctrl, po);
	t.casdep = Rel(n);
	t.sc.reset();
	hw.g = std::move(t);
	return hw;
}

std::vector<std::string> correspondence_check(const Execution &g, const HwExecution &hw)
{
	std::vector<std::string> out;
	const auto &t = hw.g;
	const auto n = t.size();
	if (hw.mode.size() != n || hw.src_of.size() != n) {
		out.push_back("annotation size");
		return out;
	}
	for (auto &d : wellformed(t))
		out.push_back("target: " + d);
	if (!t.casdep.empty())
		out.push_back("target has casdep");
	if (!whole_serials(g))
		out.push_back("source has fractional serial numbers");
	if (hw.arch == Arch::power && !g.writes_at_least(Mode::rel).empty())
		out.push_back("source has release writes");

	// events: source events kept, inserted ones exactly at n+0.5 of the expected anchors
	std::vector<std::size_t> m(g.size(), n);
	for (std::size_t i = 0; i < n; ++i)
		if (hw.src_of[i]) {
			auto s = *hw.src_of[i];
			if (s >= g.size() || !(g.ev[s] == t.ev[i]))
				out.push_back("event correspondence");
			else
				m[s] = i;
		}
	if (std::find(m.begin(), m.end(), n) != m.end()) {
		out.push_back("source event missing in target");
		return out;
	}
	EventSet anchors(g.size());
	if (hw.arch == Arch::power) {
		const auto Racq = g.reads_at_least(Mode::acq);
		anchors = Racq - dom(g.rmw);
		anchors |= codom(restrict(g.rmw, Racq, g.all()));
	} else {
		anchors = g.strong_writes();
	}
	std::vector<Event> expected, actual;
	anchors.for_each([&](std::size_t a) { expected.push_back(Event::at(g.ev[a].tid, g.ev[a].whole, 1)); });
	for (std::size_t i = 0; i < n; ++i)
		if (!hw.src_of[i])
			actual.push_back(t.ev[i]);
	if (expected.size() != actual.size() ||
	    !std::is_permutation(expected.begin(), expected.end(), actual.begin()))
		out.push_back("inserted events");

	// labels
	for (std::size_t s = 0; s < g.size(); ++s) {
		const auto &a = g.lab[s];
		const auto &b = t.lab[m[s]];
		auto hm = hw.mode[m[s]];
		if (a.kind != b.kind || a.loc != b.loc || a.val != b.val) {
			out.push_back("label of " + event_name(g.ev[s]));
			continue;
		}
		HwMode want = HwMode::plain;
		if (hw.arch == Arch::power) {
			if (a.kind == Kind::F)
				want = a.mode == Mode::sc ? HwMode::sync : HwMode::lwsync;
		} else {
			if (a.kind == Kind::F)
				want = a.mode == Mode::acq ? HwMode::ld : HwMode::sy;
			else if (a.kind == Kind::R && a.mode == Mode::acq)
				want = HwMode::Q;
			else if (a.kind == Kind::W && a.mode == Mode::rel)
				want = HwMode::L;
		}
		if (hm != want)
			out.push_back("mode of " + event_name(g.ev[s]));
	}
	for (std::size_t i = 0; i < n; ++i)
		if (!hw.src_of[i] &&
		    (t.lab[i].kind != Kind::F || hw.mode[i] != (hw.arch == Arch::power ? HwMode::isync : HwMode::ld)))
			out.push_back("inserted label");

	if (!(image(g.rmw, m, n) == t.rmw))
		out.push_back("rmw differs");
	if (!(image(g.data, m, n) == t.data))
		out.push_back("data differs");
	if (!(image(g.addr, m, n) == t.addr))
		out.push_back("addr differs");
	if (!image(g.ctrl, m, n).subset_of(t.ctrl))
		out.push_back("ctrl not extended");
	const auto po = image(g.po(), m, n);
	auto id_img = [&](const EventSet &s) { return Rel::identity(image(s, m, n)); };
	if (hw.arch == Arch::power &&
	    !compose(id_img(g.reads_at_least(Mode::acq)), po).subset_of(t.rmw | t.ctrl))
		out.push_back("acquire read ctrl");
	if (!compose(id_img(g.exclusive_reads()), po).subset_of(t.ctrl | (t.rmw & t.data)))
		out.push_back("exclusive read ctrl");
	if (hw.arch == Arch::power &&
	    !compose(compose(image(g.data, m, n), id_img(codom(g.rmw))), po).subset_of(t.ctrl))
		out.push_back("data to exclusive write ctrl");
	if (!compose(image(g.casdep, m, n), po).subset_of(t.ctrl))
		out.push_back("casdep ctrl");
	return out;
}

PowerBase power_base(const HwExecution &hw)
{
	const auto &g = hw.g;
	const auto n = g.size();
	const auto po = g.po();
	const auto R = g.reads();
	auto rfe = g.rf - po, rfi = g.rf & po;
	auto co = g.co;
	auto fr = compose(inverse(g.rf), co);
	auto fre = fr - po, coe = co - po;
	PowerBase b;
	b.addr = g.addr;
	b.data = g.data;
	b.rdw = compose(fre, rfe) & po;
	b.rfi = rfi;
	b.ctrl_isync = compose(compose(restrict(g.ctrl, R, g.all()), Rel::identity(hw.with_mode(HwMode::isync))), po);
	b.detour = compose(coe, rfe) & po;
	b.ctrl = g.ctrl;
	b.addr_po = compose(g.addr, reflexive(po));
	b.po_loc = restrict_loc(po, g.loc_map());
	(void)n;
	return b;
}

namespace {

enum PK { II = 0, IC = 1, CI = 2, CC = 3 };

struct Unary {
	PK from, to;
};
struct Binary {
	PK a, b, to;
};

constexpr Unary unary_rules[] = {{CI, II}, {II, IC}, {CC, IC}, {CI, CC}};
constexpr Binary binary_rules[] = {{IC, CI, II}, {II, II, II}, {IC, CC, IC}, {II, IC, IC},
				   {CI, II, CI}, {CC, CI, CI}, {CI, IC, CC}, {CC, CC, CC}};

} // namespace

PowerPpo power_ppo(const PowerBase &b, const EventSet &reads, const EventSet &writes, bool armv7)
{
	const auto n = b.addr.universe();
	std::vector<Rel> rel(4, Rel(n));
	struct Fact {
		PK k;
		std::size_t a, c;
	};
	std::vector<Fact> work;
	auto add = [&](PK k, std::size_t a, std::size_t c) {
		if (!rel[k].contains(a, c)) {
			rel[k].insert(a, c);
			work.push_back({k, a, c});
		}
	};
	auto seed = [&](const Rel &r, PK k) {
		for (auto [a, c] : r.pairs())
			add(k, a, c);
	};
	seed(b.addr, II);
	seed(b.data, II);
	seed(b.rdw, II);
	seed(b.rfi, II);
	seed(b.ctrl_isync, CI);
	seed(b.detour, CI);
	seed(b.data, CC);
	seed(b.ctrl, CC);
	seed(b.addr_po, CC);
	if (!armv7)
		seed(b.po_loc, CC);
	while (!work.empty()) {
		auto f = work.back();
		work.pop_back();
		for (auto &u : unary_rules)
			if (u.from == f.k)
				add(u.to, f.a, f.c);
		for (auto &r : binary_rules) {
			// new fact as left factor: (a,c) ; (c,d)
			if (r.a == f.k) {
				auto succ = rel[r.b].succ(f.c);
				succ.for_each([&](std::size_t d) { add(r.to, f.a, d); });
			}
			// new fact as right factor: (z,a) ; (a,c)
			if (r.b == f.k) {
				auto pred = rel[r.a].pred(f.a);
				pred.for_each([&](std::size_t z) { add(r.to, z, f.c); });
			}
		}
	}
	PowerPpo out{rel[II], rel[IC], rel[CI], rel[CC], Rel(n)};
	out.ppo = restrict(out.ii, reads, reads) | restrict(out.ic, reads, writes);
	return out;
}

Verdict check_power(const HwExecution &hw, const PowerOptions &opt)
{
	Verdict v;
	const auto &g = hw.g;
	const auto po = g.po();
	const auto R = g.reads(), W = g.writes();
	const auto RW = R | W;
	const auto all = g.all();
	auto rfe = g.rf - po;
	auto fr = compose(inverse(g.rf), g.co);
	auto fre = fr - po, coe = g.co - po;

	check_rf_complete(g, v);
	check_co_total(g, v);
	auto po_loc = restrict_loc(po, g.loc_map());
	check_acyclic(po_loc | g.rf | fr | g.co, "sc-per-loc", v);

	auto via = [&](HwMode m) {
		return restrict(compose(compose(po, Rel::identity(hw.with_mode(m))), po), RW, RW);
	};
	auto sync = via(HwMode::sync);
	auto lwsync = via(HwMode::lwsync) - Rel::cross(W, R);
	auto fence = sync | lwsync;
	auto ppo = power_ppo(power_base(hw), R, W, opt.armv7).ppo;
	auto hb = ppo | fence | rfe;
	auto hb_star = refl_trans(hb);
	auto id = Rel::identity(all);
	auto prop1 = restrict(compose(compose(rfe | id, fence), hb_star), W, W);
	auto prop2 = compose(compose(compose(compose(coe | fre | id, rfe | id), compose(fence, hb_star) | id), sync),
			     hb_star);
	auto prop = prop1 | prop2;

	auto obs = compose(compose(fre, prop), hb_star);
	for (std::size_t a = 0; a < g.size(); ++a)
		if (obs.contains(a, a)) {
			v.fail("observation", {{a, a}});
			break;
		}
	check_acyclic(g.co | prop, "propagation", v);
	auto bad = g.rmw & compose(fre, coe);
	if (!bad.empty())
		v.fail("atomicity", {bad.pairs().front()});
	check_acyclic(hb, "power-no-thin-air", v);
	if (opt.at_axiom) {
		auto at = dom(g.rmw) | codom(g.rmw);
		check_acyclic(g.co | restrict(po, at, at), "at", v);
	}
	return v;
}

Verdict check_arm(const HwExecution &hw)
{
	Verdict v;
	const auto &g = hw.g;
	const auto po = g.po();
	const auto R = g.reads(), W = g.writes();
	const auto all = g.all();
	const auto id = Rel::identity(all);
	auto rfe = g.rf - po, rfi = g.rf & po;
	auto fr = compose(inverse(g.rf), g.co);
	auto fre = fr - po, coe = g.co - po, coi = g.co & po;

	check_rf_complete(g, v);
	check_co_total(g, v);
	check_acyclic(restrict_loc(po, g.loc_map()) | g.rf | fr | g.co, "sc-per-loc", v);

	auto obs = rfe | fre | coe;
	auto dob = compose(g.addr | g.data, rfi | id) |
		   compose(compose(g.ctrl | g.data, Rel::identity(W)), coi | id) |
		   compose(compose(g.addr, po), Rel::identity(W));
	auto RQ = hw.with_mode(HwMode::Q);
	auto aob = g.rmw | restrict(rfi, codom(g.rmw), RQ);
	auto through = [&](HwMode m) { return compose(compose(po, Rel::identity(hw.with_mode(m))), po); };
	auto bob = through(HwMode::sy) | restrict(through(HwMode::ld), R, all) | restrict(po, RQ, all) |
		   compose(compose(po, Rel::identity(hw.with_mode(HwMode::L))), coi | id);
	check_acyclic(obs | dob | aob | bob, "external", v);
	auto bad = g.rmw & compose(fre, coe);
	if (!bad.empty())
		v.fail("atomicity", {bad.pairs().front()});
	return v;
}

} // namespace immlab
