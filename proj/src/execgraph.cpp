#include "immlab/execgraph.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace immlab {

bool sb(const Event &a, const Event &b)
{
	if (a.is_init())
		return !b.is_init();
	if (b.is_init() || a.tid != b.tid)
		return false;
	return std::pair(a.whole, a.half) < std::pair(b.whole, b.half);
}

bool operator==(const Event &a, const Event &b)
{
	return a.tid == b.tid && a.whole == b.whole && a.half == b.half && a.init_loc == b.init_loc;
}

std::string event_name(const Event &e)
{
	if (e.is_init())
		return "init" + std::to_string(e.init_loc);
	return "e" + std::to_string(e.tid) + "." + std::to_string(e.whole) + (e.half ? ".5" : "");
}

bool operator==(const Label &a, const Label &b)
{
	return a.kind == b.kind && a.mode == b.mode && a.loc == b.loc && a.val == b.val && a.ex == b.ex &&
	       a.rmw_mode == b.rmw_mode;
}

std::string label_name(const Label &l, const std::vector<std::string> &locs)
{
	auto loc = [&](int x) { return x >= 0 && static_cast<std::size_t>(x) < locs.size() ? locs[x] : "L" + std::to_string(x); };
	std::ostringstream os;
	switch (l.kind) {
	case Kind::R:
		os << "R[" << to_string(l.mode) << (l.ex ? ",ex" : "") << "] " << loc(l.loc) << ' ' << l.val;
		break;
	case Kind::W:
		os << "W[" << to_string(l.mode) << (l.rmw_mode == RmwMode::strong ? ",strong" : "") << "] " << loc(l.loc)
		   << ' ' << l.val;
		break;
	case Kind::F:
		os << "F[" << to_string(l.mode) << "]";
		break;
	}
	return os.str();
}

Execution::Execution(const Execution &o)
	: ev(o.ev), lab(o.lab), locs(o.locs), rmw(o.rmw), data(o.data), addr(o.addr), ctrl(o.ctrl), casdep(o.casdep),
	  rf(o.rf), co(o.co), sc(o.sc)
{
}

Execution &Execution::operator=(const Execution &o)
{
	if (this != &o) {
		ev = o.ev;
		lab = o.lab;
		locs = o.locs;
		rmw = o.rmw;
		data = o.data;
		addr = o.addr;
		ctrl = o.ctrl;
		casdep = o.casdep;
		rf = o.rf;
		co = o.co;
		sc = o.sc;
		memo_.reset();
	}
	return *this;
}

int Execution::nthreads() const
{
	int n = 0;
	for (auto &e : ev)
		n = std::max(n, e.tid + 1);
	return n;
}

void Execution::reset_relations()
{
	const auto n = size();
	rmw = data = addr = ctrl = casdep = rf = co = Rel(n);
	sc.reset();
	memo_.reset();
}

namespace {

bool event_less(const Event &a, const Event &b)
{
	if (a.is_init() != b.is_init())
		return a.is_init();
	if (a.is_init())
		return a.init_loc < b.init_loc;
	return std::tuple(a.tid, a.whole, a.half) < std::tuple(b.tid, b.whole, b.half);
}

Rel remap(const Rel &r, const std::vector<std::size_t> &m, std::size_t n)
{
	Rel out(n);
	for (auto [a, b] : r.pairs())
		out.insert(m[a], m[b]);
	return out;
}

} // namespace

std::vector<std::size_t> Execution::normalize()
{
	const auto n = size();
	std::vector<std::size_t> order(n);
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return event_less(ev[a], ev[b]); });
	std::vector<std::size_t> old_to_new(n);
	for (std::size_t i = 0; i < n; ++i)
		old_to_new[order[i]] = i;
	std::vector<Event> ev2(n);
	std::vector<Label> lab2(n);
	for (std::size_t i = 0; i < n; ++i) {
		ev2[old_to_new[i]] = ev[i];
		lab2[old_to_new[i]] = lab[i];
	}
	ev = std::move(ev2);
	lab = std::move(lab2);
	for (Rel *r : {&rmw, &data, &addr, &ctrl, &casdep, &rf, &co})
		*r = r->universe() == n ? remap(*r, old_to_new, n) : Rel(n);
	if (sc)
		*sc = remap(*sc, old_to_new, n);
	memo_.reset();
	return old_to_new;
}

EventSet Execution::init() const
{
	EventSet s(size());
	for (std::size_t i = 0; i < size(); ++i)
		if (ev[i].is_init())
			s.insert(i);
	return s;
}

EventSet Execution::thread(int tid) const
{
	EventSet s(size());
	for (std::size_t i = 0; i < size(); ++i)
		if (ev[i].tid == tid)
			s.insert(i);
	return s;
}

namespace {

template <class P> EventSet select(const Execution &g, P &&pred)
{
	EventSet s(g.size());
	for (std::size_t i = 0; i < g.size(); ++i)
		if (pred(g.lab[i]))
			s.insert(i);
	return s;
}

} // namespace

EventSet Execution::reads() const
{
	return select(*this, [](auto &l) { return l.kind == Kind::R; });
}

EventSet Execution::writes() const
{
	return select(*this, [](auto &l) { return l.kind == Kind::W; });
}

EventSet Execution::fences() const
{
	return select(*this, [](auto &l) { return l.kind == Kind::F; });
}

EventSet Execution::reads_at_least(Mode m) const
{
	return select(*this, [m](auto &l) { return l.kind == Kind::R && mode_leq(m, l.mode); });
}

EventSet Execution::writes_at_least(Mode m) const
{
	return select(*this, [m](auto &l) { return l.kind == Kind::W && mode_leq(m, l.mode); });
}

EventSet Execution::fences_at_least(Mode m) const
{
	return select(*this, [m](auto &l) { return l.kind == Kind::F && mode_leq(m, l.mode); });
}

EventSet Execution::fences_exactly(Mode m) const
{
	return select(*this, [m](auto &l) { return l.kind == Kind::F && l.mode == m; });
}

EventSet Execution::exclusive_reads() const
{
	return select(*this, [](auto &l) { return l.kind == Kind::R && l.ex; });
}

EventSet Execution::strong_writes() const
{
	return select(*this, [](auto &l) { return l.kind == Kind::W && l.rmw_mode == RmwMode::strong; });
}

EventSet Execution::at_loc(int x) const
{
	return select(*this, [x](auto &l) { return l.kind != Kind::F && l.loc == x; });
}

std::vector<int> Execution::loc_map() const
{
	std::vector<int> m(size(), -1);
	for (std::size_t i = 0; i < size(); ++i)
		if (lab[i].kind != Kind::F)
			m[i] = lab[i].loc;
	return m;
}

Rel Execution::po() const
{
	Rel r(size());
	for (std::size_t a = 0; a < size(); ++a)
		for (std::size_t b = 0; b < size(); ++b)
			if (sb(ev[a], ev[b]))
				r.insert(a, b);
	return r;
}

Rel Execution::same_thread() const
{
	Rel r(size());
	for (std::size_t a = 0; a < size(); ++a)
		for (std::size_t b = 0; b < size(); ++b)
			if (!ev[a].is_init() && ev[a].tid == ev[b].tid)
				r.insert(a, b);
	return r;
}

const DerivedRels &Execution::derived() const
{
	if (!memo_)
		memo_ = std::make_shared<const DerivedRels>(derive(*this));
	return *memo_;
}

DerivedRels derive(const Execution &g)
{
	const auto n = g.size();
	const auto all = g.all();
	const auto R = g.reads(), W = g.writes(), F = g.fences();
	const auto Racq = g.reads_at_least(Mode::acq);
	const auto Wrel = g.writes_at_least(Mode::rel);
	const auto Frel = g.fences_at_least(Mode::rel);
	const auto Facq = g.fences_at_least(Mode::acq);
	const auto Fsc = g.fences_at_least(Mode::sc);
	const auto Rex = g.exclusive_reads();
	const auto Wstrong = g.strong_writes();
	const auto id = Rel::identity(all);
	auto I = [](const EventSet &s) { return Rel::identity(s); };

	DerivedRels d;
	d.po = g.po();
	d.po_loc = restrict_loc(d.po, g.loc_map());
	d.rfi = g.rf & d.po;
	d.rfe = g.rf - d.po;
	d.coi = g.co & d.po;
	d.coe = g.co - d.po;
	d.fr = compose(inverse(g.rf), g.co);
	d.fri = d.fr & d.po;
	d.fre = d.fr - d.po;

	auto po_loc_opt = d.po_loc | id;
	auto rf_rmw = compose(g.rf, g.rmw);
	d.rs = restrict(d.po_loc, W, W) | compose(I(W), refl_trans(compose(po_loc_opt, rf_rmw)));
	auto rel_prefix = I(Wrel) | compose(I(Frel), d.po);
	d.release = compose(rel_prefix, d.rs);
	auto acq_suffix = I(Racq) | compose(d.po, I(Facq));
	d.sw = compose(compose(d.release, d.rfi | compose(po_loc_opt, d.rfe)), acq_suffix);
	d.hb = transitive(d.po | d.sw);
	auto rf_opt = g.rf | id;
	d.eco = g.rf | compose(g.co, rf_opt) | compose(d.fr, rf_opt);

	d.deps = g.data | g.ctrl | compose(g.addr, d.po | id) | g.casdep | compose(I(Rex), d.po);
	d.ppo = restrict(transitive(d.deps | d.rfi), R, W);
	d.bob = compose(d.po, I(Wrel)) | compose(I(Racq), d.po) | compose(d.po, I(F)) | compose(I(F), d.po) |
		restrict(d.po_loc, Wrel, W);
	d.fwbob = restrict(d.po_loc, Wrel, W) | compose(I(F), d.po);
	d.detour = compose(d.coe, d.rfe) & d.po;
	d.psc = restrict(compose(compose(compose(d.hb, d.eco), d.hb), I(Fsc)), Fsc, all);
	d.ar_base = d.rfe | d.bob | d.ppo | d.detour | restrict(d.po, Wstrong, W);
	d.ar = d.ar_base | d.psc;

	d.rs_rc11 = compose(restrict(po_loc_opt, W, W), refl_trans(rf_rmw));
	d.release_rc11 = compose(rel_prefix, d.rs_rc11);
	d.sw_rc11 = compose(compose(d.release_rc11, g.rf), acq_suffix);
	d.hb_rc11 = transitive(d.po | d.sw_rc11);
	d.psc_rc11 = restrict(compose(compose(d.hb_rc11, d.eco), d.hb_rc11), Fsc, Fsc);
	d.ar_rc11 = d.ar_base | d.psc_rc11;

	d.vf_rlx = compose(rf_opt, d.po | id);
	(void)n;
	return d;
}

Rel bvf(const Execution &g, const EventSet &dset)
{
	const auto &d = g.derived();
	const auto id = Rel::identity(g.all());
	const auto Fsc = g.fences_at_least(Mode::sc);
	auto rfD = restrict(g.rf, g.all(), dset) | id;
	auto hbF = restrict(d.hb_rc11, g.all(), Fsc) | id;
	auto sco = (g.sc ? *g.sc : Rel(g.size())) | id;
	return compose(compose(compose(rfD, hbF), sco), d.hb_rc11);
}

std::vector<std::string> wellformed(const Execution &g)
{
	std::vector<std::string> out;
	const auto n = g.size();
	if (g.lab.size() != n) {
		out.push_back("label count");
		return out;
	}
	for (Rel const *r : {&g.rmw, &g.data, &g.addr, &g.ctrl, &g.casdep, &g.rf, &g.co})
		if (r->universe() != n) {
			out.push_back("relation universe");
			return out;
		}
	for (std::size_t i = 0; i + 1 < n; ++i)
		if (!event_less(g.ev[i], g.ev[i + 1]))
			out.push_back("events not sorted or duplicated");
	for (std::size_t i = 0; i < n; ++i) {
		const auto &l = g.lab[i];
		if (g.ev[i].is_init() &&
		    !(l == Label::write(Mode::rlx, g.ev[i].init_loc, 0)))
			out.push_back("init label");
		if (l.kind == Kind::R && l.mode != Mode::rlx && l.mode != Mode::acq)
			out.push_back("read mode");
		if (l.kind == Kind::W && l.mode != Mode::rlx && l.mode != Mode::rel)
			out.push_back("write mode");
		if (l.kind == Kind::F && l.mode == Mode::rlx)
			out.push_back("fence mode");
		if (l.kind != Kind::F && (l.loc < 0 || static_cast<std::size_t>(l.loc) >= g.locs.size()))
			out.push_back("location out of range");
	}
	const auto po = g.po();
	const auto R = g.reads(), W = g.writes();
	const auto locm = g.loc_map();
	auto same_loc = [&](std::size_t a, std::size_t b) { return locm[a] >= 0 && locm[a] == locm[b]; };

	const auto ipo = immediate(po);
	for (auto [a, b] : g.rmw.pairs())
		if (!g.lab[a].ex || g.lab[a].kind != Kind::R || g.lab[b].kind != Kind::W || !ipo.contains(a, b) ||
		    !same_loc(a, b))
			out.push_back("rmw shape");
	if (!g.strong_writes().subset_of(codom(g.rmw)))
		out.push_back("strong write outside rmw");
	if (!g.data.subset_of(restrict(po, R, W)))
		out.push_back("data shape");
	if (!g.addr.subset_of(restrict(po, R, R | W)))
		out.push_back("addr shape");
	if (!g.ctrl.subset_of(restrict(po, R, g.all())))
		out.push_back("ctrl shape");
	if (!compose(g.ctrl, po).subset_of(g.ctrl))
		out.push_back("ctrl;po ⊆ ctrl");
	if (!g.casdep.subset_of(restrict(po, R, g.exclusive_reads())))
		out.push_back("casdep shape");
	for (auto [a, b] : g.rf.pairs()) {
		if (g.lab[a].kind != Kind::W || g.lab[b].kind != Kind::R)
			out.push_back("rf shape");
		else if (!same_loc(a, b))
			out.push_back("rf location");
		else if (g.lab[a].val != g.lab[b].val)
			out.push_back("rf value");
	}
	for (std::size_t b = 0; b < n; ++b)
		if (g.rf.pred(b).size() > 1)
			out.push_back("rf not functional");
	for (auto [a, b] : g.co.pairs())
		if (g.lab[a].kind != Kind::W || g.lab[b].kind != Kind::W || !same_loc(a, b))
			out.push_back("co shape");
	if (!is_irreflexive(g.co) || !compose(g.co, g.co).subset_of(g.co))
		out.push_back("co not a strict order");
	if (g.sc) {
		const auto Fsc = g.fences_at_least(Mode::sc);
		if (g.sc->universe() != n || !g.sc->subset_of(Rel::cross(Fsc, Fsc)) || !is_irreflexive(*g.sc) ||
		    !compose(*g.sc, *g.sc).subset_of(*g.sc))
			out.push_back("sc shape");
	}
	std::sort(out.begin(), out.end());
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

Execution restrict_events(const Execution &g, const EventSet &keep, std::vector<std::size_t> *old_to_new)
{
	Execution out;
	out.locs = g.locs;
	std::vector<std::size_t> m(g.size(), static_cast<std::size_t>(-1));
	keep.for_each([&](std::size_t e) {
		m[e] = out.ev.size();
		out.ev.push_back(g.ev[e]);
		out.lab.push_back(g.lab[e]);
	});
	const auto n = out.ev.size();
	auto sub = [&](const Rel &r) {
		Rel s(n);
		for (auto [a, b] : restrict(r, keep, keep).pairs())
			s.insert(m[a], m[b]);
		return s;
	};
	out.rmw = sub(g.rmw);
	out.data = sub(g.data);
	out.addr = sub(g.addr);
	out.ctrl = sub(g.ctrl);
	out.casdep = sub(g.casdep);
	out.rf = sub(g.rf);
	out.co = sub(g.co);
	if (g.sc)
		out.sc = sub(*g.sc);
	if (old_to_new)
		*old_to_new = m;
	return out;
}

Execution restrict_thread(const Execution &g, int tid)
{
	auto out = restrict_events(g, g.thread(tid));
	out.rf = Rel(out.size());
	out.co = Rel(out.size());
	out.sc.reset();
	return out;
}

std::vector<Val> outcome(const Execution &g)
{
	std::vector<Val> out(g.locs.size(), 0);
	for (std::size_t x = 0; x < g.locs.size(); ++x) {
		auto ws = g.writes() & g.at_loc(static_cast<int>(x));
		if (ws.empty())
			continue;
		if (!is_total_on(g.co, ws))
			throw ContractViolation("outcome of an execution whose co is not total");
		ws.for_each([&](std::size_t w) {
			if ((g.co.succ(w) & ws).empty())
				out[x] = g.lab[w].val;
		});
	}
	return out;
}

namespace {

nlohmann::json pairs_json(const Rel &r)
{
	auto j = nlohmann::json::array();
	for (auto [a, b] : r.pairs())
		j.push_back({a, b});
	return j;
}

Kind kind_from(const std::string &s)
{
	if (s == "R")
		return Kind::R;
	if (s == "W")
		return Kind::W;
	if (s == "F")
		return Kind::F;
	throw std::runtime_error("bad label kind " + s);
}

} // namespace

nlohmann::json to_json(const Execution &g)
{
	nlohmann::json j;
	j["schema"] = 1;
	j["locations"] = g.locs;
	auto evs = nlohmann::json::array();
	for (std::size_t i = 0; i < g.size(); ++i) {
		const auto &e = g.ev[i];
		const auto &l = g.lab[i];
		nlohmann::json je;
		je["id"] = i;
		je["tid"] = e.tid;
		je["sn"] = {e.whole, e.half};
		if (e.is_init())
			je["init"] = g.locs.at(e.init_loc);
		nlohmann::json jl;
		jl["kind"] = l.kind == Kind::R ? "R" : l.kind == Kind::W ? "W" : "F";
		jl["mode"] = to_string(l.mode);
		if (l.kind != Kind::F) {
			jl["loc"] = g.locs.at(l.loc);
			jl["val"] = l.val;
		}
		if (l.kind == Kind::R)
			jl["ex"] = l.ex;
		if (l.kind == Kind::W)
			jl["rmw"] = to_string(l.rmw_mode);
		je["label"] = jl;
		evs.push_back(je);
	}
	j["events"] = evs;
	j["rmw"] = pairs_json(g.rmw);
	j["data"] = pairs_json(g.data);
	j["addr"] = pairs_json(g.addr);
	j["ctrl"] = pairs_json(g.ctrl);
	j["casdep"] = pairs_json(g.casdep);
	j["rf"] = pairs_json(g.rf);
	j["co"] = pairs_json(g.co);
	if (g.sc)
		j["sc"] = pairs_json(*g.sc);
	return j;
}

// Accepts fixtures without init events; those are added for every location.
Execution execution_from_json(const nlohmann::json &j)
{
	Execution g;
	g.locs = j.at("locations").get<std::vector<std::string>>();
	auto loc_of = [&](const std::string &s) {
		auto it = std::find(g.locs.begin(), g.locs.end(), s);
		if (it == g.locs.end())
			throw std::runtime_error("unknown location " + s);
		return static_cast<int>(it - g.locs.begin());
	};
	std::vector<bool> has_init(g.locs.size(), false);
	for (auto &je : j.at("events")) {
		Event e;
		e.tid = je.at("tid").get<int>();
		if (e.tid < 0) {
			e.init_loc = loc_of(je.at("init").get<std::string>());
			has_init[e.init_loc] = true;
		} else {
			auto sn = je.at("sn");
			e.whole = sn.is_array() ? sn.at(0).get<int>() : sn.get<int>();
			e.half = sn.is_array() && sn.size() > 1 ? sn.at(1).get<int>() : 0;
		}
		const auto &jl = je.at("label");
		Label l;
		l.kind = kind_from(jl.at("kind").get<std::string>());
		auto m = parse_mode(jl.value("mode", "rlx"));
		if (!m)
			throw std::runtime_error("bad mode");
		l.mode = *m;
		if (l.kind != Kind::F) {
			l.loc = loc_of(jl.at("loc").get<std::string>());
			l.val = jl.value("val", Val{0});
		}
		l.ex = jl.value("ex", false);
		l.rmw_mode = jl.value("rmw", std::string("normal")) == "strong" ? RmwMode::strong : RmwMode::normal;
		g.ev.push_back(e);
		g.lab.push_back(l);
	}
	const auto given = g.ev.size();
	for (std::size_t x = 0; x < g.locs.size(); ++x)
		if (!has_init[x]) {
			g.ev.push_back(Event::init(static_cast<int>(x)));
			g.lab.push_back(Label::write(Mode::rlx, static_cast<int>(x), 0));
		}
	g.reset_relations();
	// relation endpoints refer to positions in the given event list
	auto read_rel = [&](const char *name, Rel &r) {
		if (!j.contains(name))
			return;
		for (auto &p : j.at(name)) {
			auto a = p.at(0).get<std::size_t>(), b = p.at(1).get<std::size_t>();
			if (a >= given || b >= given)
				throw std::runtime_error(std::string("relation ") + name + " refers to unknown event");
			r.insert(a, b);
		}
	};
	read_rel("rmw", g.rmw);
	read_rel("data", g.data);
	read_rel("addr", g.addr);
	read_rel("ctrl", g.ctrl);
	read_rel("casdep", g.casdep);
	read_rel("rf", g.rf);
	read_rel("co", g.co);
	if (j.contains("sc")) {
		g.sc = Rel(g.size());
		read_rel("sc", *g.sc);
	}
	// init writes precede every other write to their location
	for (std::size_t i = given; i < g.size(); ++i)
		for (std::size_t w = 0; w < given; ++w)
			if (g.lab[w].kind == Kind::W && g.lab[w].loc == g.lab[i].loc)
				g.co.insert(i, w);
	g.co = transitive(g.co);
	g.normalize();
	return g;
}

std::string dump_text(const Execution &g)
{
	std::ostringstream os;
	for (std::size_t i = 0; i < g.size(); ++i)
		os << i << ' ' << event_name(g.ev[i]) << ' ' << label_name(g.lab[i], g.locs) << '\n';
	auto rel = [&](const char *name, const Rel &r) {
		if (r.empty())
			return;
		os << name << ':';
		for (auto [a, b] : r.pairs())
			os << ' ' << a << "->" << b;
		os << '\n';
	};
	rel("rmw", g.rmw);
	rel("data", g.data);
	rel("addr", g.addr);
	rel("ctrl", g.ctrl);
	rel("casdep", g.casdep);
	rel("rf", g.rf);
	rel("co", g.co);
	if (g.sc)
		rel("sc", *g.sc);
	return os.str();
}

} // namespace immlab
