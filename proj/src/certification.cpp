#include "immlab/certification.hpp"

#include <algorithm>
#include <set>

#include "immlab/consistency.hpp"
#include "immlab/enumerate.hpp"

namespace immlab {

namespace {

Rel id(const EventSet &s)
{
	return Rel::identity(s);
}

std::vector<std::size_t> thread_events(const Execution &g, int tid)
{
	return g.thread(tid).members();
}

} // namespace

EventSet determined(const Execution &g, const TraversalConfig &tc)
{
	const auto &d = g.derived();
	auto path = compose(reflexive(d.detour), compose(refl_trans(d.deps | d.rfi), id(tc.I)));
	return tc.C | dom(path);
}

EventSet cert_events(const Execution &g, const TraversalConfig &tc, int tid, Fragment f)
{
	const auto &d = g.derived();
	auto Ei = g.thread(tid);
	auto E = tc.C | tc.I | dom(compose(d.po, id(tc.I & Ei)));
	if (f == Fragment::full) {
		auto rmw_reads = dom(compose(g.rmw, id(tc.I - Ei)));
		auto read_locally = codom(compose(id(g.all() - codom(g.rmw)), d.rfi));
		E |= rmw_reads - read_locally;
	}
	return E;
}

EventSet cert_determined(const Execution &g, const TraversalConfig &tc, int tid, const EventSet &E_crt, Fragment f)
{
	const auto &d = g.derived();
	auto D = tc.C | tc.I | (g.all() - g.thread(tid)) | dom(compose(compose(reflexive(d.rfi), d.ppo), id(tc.I)));
	if (f == Fragment::full)
		D |= codom(compose(d.rfe, id(g.reads_at_least(Mode::acq))));
	return D & E_crt;
}

Rel cert_bvf(const Execution &g, const EventSet &D, Fragment f)
{
	if (f == Fragment::full)
		return bvf(g, D);
	return compose(reflexive(compose(g.rf, id(D))), g.derived().po);
}

Rel cert_co(const Execution &g, const TraversalConfig &tc, int tid, const EventSet &E_crt, Fragment f)
{
	auto W = g.writes() & E_crt;
	if (f == Fragment::relaxed)
		return restrict(g.co, W, W);
	const auto &I = tc.I;
	auto Ei = g.thread(tid) & W;
	auto base = restrict(g.co, I, I) | restrict(g.co, I, Ei) | restrict(g.co, Ei, Ei);
	auto co = transitive(base);
	auto loc = g.loc_map();
	auto late = Ei - I;
	(W & I).for_each([&](std::size_t w) {
		late.for_each([&](std::size_t w2) {
			if (loc[w] == loc[w2] && w != w2 && !co.contains(w, w2) && !co.contains(w2, w))
				co.insert(w, w2);
		});
	});
	for (std::size_t x = 0; x < g.locs.size(); ++x) {
		auto Wx = W & g.at_loc(static_cast<int>(x));
		auto r = restrict(co, Wx, Wx);
		if (!is_total_on(r, Wx) || !is_acyclic(r) || !(transitive(r) == r))
			throw ContractViolation("certification co is not a strict total order on " + g.locs[x]);
	}
	return co;
}

Rel cert_rf(const Execution &g, const EventSet &E_crt, const EventSet &D, const Rel &co, const Rel &bvf)
{
	auto rf = compose(g.rf, id(D));
	auto loc = g.loc_map();
	auto later = compose(co, bvf);
	((g.reads() & E_crt) - D).for_each([&](std::size_t r) {
		std::vector<std::size_t> cands;
		bvf.pred(r).for_each([&](std::size_t w) {
			if (g.lab[w].kind == Kind::W && loc[w] == loc[r] && !later.contains(w, r))
				cands.push_back(w);
		});
		if (cands.size() != 1 || !E_crt.contains(cands.front()))
			throw ContractViolation("no unique visible write for " + event_name(g.ev[r]));
		rf.insert(cands.front(), r);
	});
	return rf;
}

std::vector<Label> reexecute_labels(const Program &p, const Execution &g, int tid, const EventSet &E_crt,
				    const Rel &rf_crt)
{
	auto lab = g.lab;
	auto evs = thread_events(g, tid);
	std::size_t count = 0;
	for (auto e : evs)
		if (E_crt.contains(e))
			++count;
	if (count == 0)
		return lab;
	auto s = initial_state(p, tid);
	int steps = 0;
	try {
		while (s.g.lab.size() < count) {
			if (s.terminal() || ++steps > 4096)
				throw CertShapeChange("certification shape change: thread " + std::to_string(tid) +
						      " stops early");
			std::optional<Val> v;
			if (s.needs_value()) {
				auto r = evs[s.g.lab.size()];
				auto src = rf_crt.pred(r).members();
				if (src.size() != 1)
					throw ContractViolation("read without certification source");
				v = lab[src.front()].val;
			}
			s = thread_step(s, p, v);
			// keep relabeled writes visible to later reads of this thread
			for (std::size_t k = 0; k < s.g.lab.size() && k < count; ++k)
				lab[evs[k]].val = s.g.lab[k].val;
		}
	} catch (const AddressError &e) {
		throw CertShapeChange(std::string("certification shape change: ") + e.what());
	}

	auto same_shape = [](const Label &a, const Label &b) {
		return a.kind == b.kind && a.mode == b.mode && a.loc == b.loc && a.ex == b.ex && a.rmw_mode == b.rmw_mode;
	};
	for (std::size_t k = 0; k < count; ++k) {
		if (!same_shape(s.g.lab[k], g.lab[evs[k]]))
			throw CertShapeChange("certification shape change at " + event_name(g.ev[evs[k]]));
		lab[evs[k]] = s.g.lab[k];
	}
	auto check = [&](const std::vector<std::pair<std::size_t, std::size_t>> &local, const Rel &global,
			 const char *what) {
		std::set<std::pair<std::size_t, std::size_t>> a, b;
		for (auto [x, y] : local)
			if (x < count && y < count)
				a.emplace(x, y);
		for (std::size_t x = 0; x < count; ++x)
			for (std::size_t y = 0; y < count; ++y)
				if (global.contains(evs[x], evs[y]))
					b.emplace(x, y);
		if (a != b)
			throw CertShapeChange(std::string("certification shape change in ") + what);
	};
	check(s.g.rmw, g.rmw, "rmw");
	check(s.g.data, g.data, "data");
	check(s.g.addr, g.addr, "addr");
	check(s.g.ctrl, g.ctrl, "ctrl");
	check(s.g.casdep, g.casdep, "casdep");
	return lab;
}

CertGraph build_cert_graph(const Program &p, const Execution &g, const TraversalConfig &tc, int tid, Fragment f)
{
	CertGraph cg;
	cg.tid = tid;
	cg.frag = f;
	cg.E = cert_events(g, tc, tid, f);
	cg.D = cert_determined(g, tc, tid, cg.E, f);
	auto co = cert_co(g, tc, tid, cg.E, f);
	auto b = cert_bvf(g, cg.D, f);
	auto rf = cert_rf(g, cg.E, cg.D, f == Fragment::relaxed ? g.co : co, b);

	Execution h = g;
	h.lab = reexecute_labels(p, g, tid, cg.E, rf);
	h.rf = rf;
	h.co = co;
	h.invalidate();
	std::vector<std::size_t> old_to_new;
	cg.g = restrict_events(h, cg.E, &old_to_new);
	cg.to_orig.assign(cg.g.size(), 0);
	for (std::size_t e = 0; e < g.size(); ++e)
		if (cg.E.contains(e))
			cg.to_orig[old_to_new[e]] = e;

	auto map_set = [&](const EventSet &s) {
		EventSet out(cg.g.size());
		(s & cg.E).for_each([&](std::size_t e) { out.insert(old_to_new[e]); });
		return out;
	};
	cg.tc.C = map_set(tc.C | (g.all() - g.thread(tid)));
	cg.tc.I = map_set(tc.I);
	return cg;
}

CertGraph build_cert_graph(const Program &p, const Execution &g, const TraversalConfig &tc, int tid)
{
	return build_cert_graph(p, g, tc, tid, relaxed_only(g) ? Fragment::relaxed : Fragment::full);
}

std::vector<int> threads_to_certify(const Execution &g, const TraversalConfig &tc)
{
	std::vector<int> out;
	for (int t = 0; t < g.nthreads(); ++t)
		if (!((tc.I - tc.C) & g.thread(t)).empty())
			out.push_back(t);
	return out;
}

std::vector<std::string> check_cert_compl(const Program &p, const Execution &g, const TraversalConfig &tc,
					  const CertGraph &cg)
{
	std::vector<std::string> out;
	const auto &h = cg.g;
	const auto m = h.size();
	const auto &src = cg.to_orig;
	// D in h's indexing
	EventSet D(m), Ei(m);
	for (std::size_t e = 0; e < m; ++e) {
		if (cg.D.contains(src[e]))
			D.insert(e);
		if (h.ev[e].tid == cg.tid)
			Ei.insert(e);
	}
	auto lifted = [&](const Rel &r) {
		Rel out(m);
		for (std::size_t a = 0; a < m; ++a)
			for (std::size_t b = 0; b < m; ++b)
				if (r.contains(src[a], src[b]))
					out.insert(a, b);
		return out;
	};
	auto colD = [&](const Rel &r) { return compose(r, id(D)); };

	if (!cg.D.subset_of(cg.E))
		out.push_back("determined events missing");
	bool labs = true;
	D.for_each([&](std::size_t e) { labs = labs && h.lab[e] == g.lab[src[e]]; });
	if (!labs)
		out.push_back("determined labels");
	const auto &dh = h.derived();
	if (!h.all().subset_of(dom(compose(reflexive(dh.po), id(D)))))
		out.push_back("events not po-before determined");
	if (!(h.ctrl == lifted(g.ctrl)))
		out.push_back("ctrl");
	if (!(colD(h.addr) == colD(lifted(g.addr))))
		out.push_back("addr");
	if (!(colD(h.data) == colD(lifted(g.data))))
		out.push_back("data");
	if (!(restrict(h.co, D, D) == restrict(lifted(g.co), D, D)))
		out.push_back("co on determined");
	if (!(colD(h.rf) == colD(lifted(g.rf))))
		out.push_back("rf on determined");
	// rmw is kept on all of E_crt, so only its determined part is compared
	if (!(colD(h.rmw) == colD(lifted(g.rmw))) || !h.rmw.subset_of(lifted(g.rmw)))
		out.push_back("rmw");

	// non-determined reads: co-latest write visible through bvf, recomputed on the source graph
	{
		auto b = cert_bvf(g, cg.D, cg.frag);
		const Rel co_src = cg.frag == Fragment::relaxed ? g.co : Rel();
		bool ok = true;
		((h.reads()) - D).for_each([&](std::size_t r) {
			std::optional<std::size_t> best;
			for (std::size_t w = 0; w < m; ++w) {
				if (h.lab[w].kind != Kind::W || h.lab[w].loc != h.lab[r].loc || !b.contains(src[w], src[r]))
					continue;
				auto before = [&](std::size_t a, std::size_t c) {
					return cg.frag == Fragment::relaxed ? co_src.contains(src[a], src[c]) : h.co.contains(a, c);
				};
				if (!best || before(*best, w))
					best = w;
			}
			auto got = h.rf.pred(r).members();
			ok = ok && best && got.size() == 1 && got.front() == *best;
		});
		if (!ok)
			out.push_back("non-determined rf");
	}

	// non-determined writes are co-last among determined ones or have a same-thread immediate successor
	{
		auto imm_co = immediate(h.co);
		bool ok = true;
		(h.writes() - D).for_each([&](std::size_t w) {
			if ((h.co.succ(w) & D).empty())
				return;
			bool local = false;
			imm_co.succ(w).for_each([&](std::size_t w2) { local = local || h.ev[w2].tid == h.ev[w].tid; });
			ok = ok && local;
		});
		if (!ok)
			out.push_back("non-determined write co");
	}

	// the determined events of the certified thread are kept
	if (!(determined(g, tc) & g.thread(cg.tid)).subset_of(cg.D))
		out.push_back("thread determined events dropped");

	// E_crt drops rmw reads of other threads that read locally from a plain write (init included),
	// leaving their strong writes without an rmw partner
	bool unexplained_strong = false;
	(h.strong_writes() - codom(h.rmw)).for_each([&](std::size_t w) {
		auto reads = dom(compose(g.rmw, id(EventSet::of(g.size(), {src[w]}))));
		if (reads.empty() || reads.subset_of(cg.E))
			unexplained_strong = true;
	});
	for (auto &w : wellformed(h))
		if (unexplained_strong || w != "strong write outside rmw")
			out.push_back("well-formed: " + w);
	if (out.empty()) {
		auto v = check_imms(h);
		if (!v.consistent)
			out.push_back("IMM_S: " + v.violations.front().axiom);
	}

	// certified thread is a po-prefix and a prefix of a run of its code
	{
		auto Eg = g.thread(cg.tid);
		auto kept = cg.E & Eg;
		if (!dom(compose(g.derived().po, id(kept))).subset_of(cg.E))
			out.push_back("thread prefix");
		auto s = initial_state(p, cg.tid);
		auto evs = Ei.members();
		int steps = 0;
		bool ok = true;
		try {
			while (ok && s.g.lab.size() < evs.size()) {
				if (s.terminal() || ++steps > 4096) {
					ok = false;
					break;
				}
				std::optional<Val> v;
				if (s.needs_value())
					v = h.lab[evs[s.g.lab.size()]].val;
				s = thread_step(s, p, v);
			}
		} catch (const std::exception &) {
			ok = false;
		}
		for (std::size_t k = 0; ok && k < evs.size(); ++k)
			ok = s.g.lab[k] == h.lab[evs[k]];
		if (!ok)
			out.push_back("thread run");
	}

	try {
		Traversal t(h);
		for (auto &d : t.check_config(cg.tc))
			out.push_back("trav-config: " + d);
	} catch (const ContractViolation &e) {
		out.push_back(std::string("trav-config: ") + e.what());
	}
	return out;
}

} // namespace immlab
