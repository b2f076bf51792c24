#include "immlab/promiserlx.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace immlab {

bool relaxed_program(const Program &p)
{
	for (auto &th : p.threads)
		for (auto &in : th.code) {
			switch (in.kind) {
			case Instr::Kind::assign:
			case Instr::Kind::if_goto:
				break;
			case Instr::Kind::load:
				if (in.mode_r != Mode::rlx)
					return false;
				break;
			case Instr::Kind::store:
				if (in.mode_w != Mode::rlx)
					return false;
				break;
			default:
				return false;
			}
		}
	return true;
}

MachineState initial_machine(const Program &p)
{
	MachineState ms;
	const auto nlocs = p.locations.size();
	for (std::size_t t = 0; t < p.threads.size(); ++t)
		ms.TS.push_back({initial_state(p, static_cast<int>(t)), std::vector<Timestamp>(nlocs, 0), {}});
	for (std::size_t x = 0; x < nlocs; ++x)
		ms.M.insert({static_cast<int>(x), 0, 0});
	return ms;
}

namespace {

bool silent_next(const ThreadState &s)
{
	if (s.terminal())
		return false;
	auto k = s.code->code[s.pc].kind;
	return k == Instr::Kind::assign || k == Instr::Kind::if_goto;
}

Instr::Kind next_kind(const ThreadStateP &ts)
{
	if (ts.sigma.terminal())
		throw PromiseError("thread is terminal");
	return ts.sigma.code->code[ts.sigma.pc].kind;
}

std::string ts_str(const Timestamp &t)
{
	if (t.denominator() == 1)
		return std::to_string(t.numerator());
	return std::to_string(t.numerator()) + "/" + std::to_string(t.denominator());
}

} // namespace

void run_silent(ThreadStateP &ts, const Program &p, int max_steps)
{
	for (int k = 0; silent_next(ts.sigma); ++k) {
		if (k >= max_steps)
			throw PromiseError("silent steps do not terminate");
		ts.sigma = thread_step(ts.sigma, p, std::nullopt);
	}
}

void read_step(ThreadStateP &ts, const Program &p, const Memory &M, Timestamp t)
{
	if (next_kind(ts) != Instr::Kind::load)
		throw PromiseError("next instruction is not a load");
	int x = ts.sigma.next_location(p);
	auto it = std::find_if(M.begin(), M.end(), [&](const Message &m) { return m.loc == x && m.t == t; });
	if (it == M.end())
		throw PromiseError("no message to read");
	if (t < ts.V[x])
		throw PromiseError("stale read");
	ts.sigma = thread_step(ts.sigma, p, it->val);
	ts.V[x] = t;
}

void write_step(ThreadStateP &ts, const Program &p, Memory &M, Timestamp t)
{
	if (next_kind(ts) != Instr::Kind::store)
		throw PromiseError("next instruction is not a store");
	auto next = thread_step(ts.sigma, p, std::nullopt);
	const auto &l = next.g.lab.back();
	Message m{l.loc, l.val, t};
	if (t <= ts.V[m.loc])
		throw PromiseError("write timestamp not above view");
	if (ts.P.count(m)) {
		ts.P.erase(m);
	} else {
		for (auto &q : ts.P)
			if (q.loc == m.loc && q.t == t)
				throw PromiseError("fulfilment value mismatch");
		for (auto &q : M)
			if (q.loc == m.loc && q.t == t)
				throw PromiseError("occupied timestamp");
		M.insert(m);
	}
	ts.sigma = std::move(next);
	ts.V[m.loc] = t;
}

void promise_step(ThreadStateP &ts, Memory &M, const Message &m)
{
	if (m.t <= Timestamp(0))
		throw PromiseError("promise at timestamp 0");
	for (auto &q : M)
		if (q.loc == m.loc && q.t == m.t)
			throw PromiseError("occupied timestamp");
	M.insert(m);
	ts.P.insert(m);
}

namespace {

struct Search {
	const Program &p;
	int max_depth;
	std::unordered_set<std::string> seen;
	bool inconclusive = false;

	static std::string key(const ThreadStateP &ts, const Memory &M)
	{
		std::ostringstream os;
		os << ts.sigma.pc << '|';
		for (auto v : ts.sigma.phi)
			os << v << ',';
		os << '|';
		for (auto &v : ts.V)
			os << ts_str(v) << ',';
		os << '|';
		for (auto &m : ts.P)
			os << m.loc << ':' << m.val << '@' << ts_str(m.t) << ',';
		os << '|';
		for (auto &m : M)
			os << m.loc << ':' << m.val << '@' << ts_str(m.t) << ',';
		return os.str();
	}

	// free slots above the view: between neighbouring messages, and past the last one
	static std::vector<Timestamp> fresh(const Memory &M, int x, Timestamp view)
	{
		std::vector<Timestamp> ts;
		for (auto &m : M)
			if (m.loc == x && m.t >= view)
				ts.push_back(m.t);
		std::sort(ts.begin(), ts.end());
		std::vector<Timestamp> out;
		for (std::size_t i = 0; i + 1 < ts.size(); ++i)
			out.push_back((ts[i] + ts[i + 1]) / Timestamp(2));
		out.push_back(ts.empty() ? view + Timestamp(1) : ts.back() + Timestamp(1));
		return out;
	}

	bool go(ThreadStateP ts, Memory M, int depth)
	{
		if (ts.P.empty())
			return true;
		try {
			run_silent(ts, p);
		} catch (const PromiseError &) {
			inconclusive = true;
			return false;
		}
		if (ts.sigma.terminal())
			return false;
		if (depth >= max_depth) {
			inconclusive = true;
			return false;
		}
		if (!seen.insert(key(ts, M)).second)
			return false;
		int x;
		try {
			x = ts.sigma.next_location(p);
		} catch (const AddressError &) {
			return false;
		}
		if (next_kind(ts) == Instr::Kind::load) {
			for (auto &m : M) {
				if (m.loc != x || m.t < ts.V[x])
					continue;
				auto nt = ts;
				read_step(nt, p, M, m.t);
				if (go(std::move(nt), M, depth + 1))
					return true;
			}
			return false;
		}
		auto next = thread_step(ts.sigma, p, std::nullopt);
		const auto &l = next.g.lab.back();
		std::vector<Timestamp> slots;
		for (auto &q : ts.P)
			if (q.loc == l.loc && q.val == l.val && q.t > ts.V[x])
				slots.push_back(q.t);
		for (auto t : fresh(M, x, ts.V[x]))
			slots.push_back(t);
		for (auto t : slots) {
			auto nt = ts;
			auto nM = M;
			try {
				write_step(nt, p, nM, t);
			} catch (const PromiseError &) {
				continue;
			}
			if (go(std::move(nt), std::move(nM), depth + 1))
				return true;
		}
		return false;
	}
};

} // namespace

CertifyResult certify(const ThreadStateP &ts, const Program &p, const Memory &M, int max_depth)
{
	Search s{p, max_depth, {}, false};
	CertifyResult r;
	r.certified = s.go(ts, M, 0);
	r.inconclusive = !r.certified && s.inconclusive;
	r.states = s.seen.size();
	return r;
}

std::vector<std::int64_t> timestamp_map(const Execution &g)
{
	std::vector<std::int64_t> T(g.size(), -1);
	g.writes().for_each([&](std::size_t w) { T[w] = static_cast<std::int64_t>(g.co.pred(w).size()); });
	return T;
}

std::vector<Val> machine_outcome(const MachineState &ms)
{
	for (auto &ts : ms.TS)
		if (!ts.P.empty())
			throw ContractViolation("unfulfilled promises remain");
	std::map<int, std::pair<Timestamp, Val>> best;
	for (auto &m : ms.M) {
		auto it = best.find(m.loc);
		if (it == best.end() || it->second.first < m.t)
			best[m.loc] = {m.t, m.val};
	}
	std::vector<Val> out;
	for (auto &[x, tv] : best) {
		if (static_cast<std::size_t>(x) != out.size())
			throw ContractViolation("location without messages");
		out.push_back(tv.second);
	}
	return out;
}

std::vector<std::string> check_simulation(const Execution &g, const TraversalConfig &tc, const MachineState &ms,
					  int tid, const std::vector<std::int64_t> &T)
{
	std::vector<std::string> out;
	const auto &ts = ms.TS[tid];
	const auto &I = tc.I, &C = tc.C;
	auto msg = [&](std::size_t w) { return Message{g.lab[w].loc, g.lab[w].val, T[w]}; };

	bool ok = true;
	g.init().for_each([&](std::size_t w) { ok = ok && T[w] == 0; });
	for (auto [a, b] : restrict(g.co, I, I).pairs())
		ok = ok && T[a] <= T[b];
	if (!ok)
		out.push_back("(1) T agrees with co");

	ok = true;
	for (auto &m : ms.M) {
		if (m.t == Timestamp(0))
			continue;
		bool found = false;
		I.for_each([&](std::size_t w) { found = found || (g.lab[w].loc == m.loc && Timestamp(T[w]) == m.t); });
		ok = ok && found;
	}
	if (!ok)
		out.push_back("(2) messages have issued counterparts");

	ok = true;
	I.for_each([&](std::size_t w) { ok = ok && ms.M.count(msg(w)); });
	if (!ok)
		out.push_back("(3) issued writes are in memory");

	auto Ei = g.thread(tid);
	auto pending = (Ei & I) - C;
	ok = true;
	for (auto &m : ts.P) {
		bool found = false;
		pending.for_each([&](std::size_t w) { found = found || msg(w) == m; });
		ok = ok && found;
	}
	if (!ok)
		out.push_back("(4) promises match issued uncovered writes");

	ok = true;
	pending.for_each([&](std::size_t w) { ok = ok && ts.P.count(msg(w)); });
	if (!ok)
		out.push_back("(5) issued uncovered writes are promised");

	auto seen = dom(compose(g.derived().vf_rlx, Rel::identity(Ei & C)));
	ok = true;
	for (std::size_t x = 0; x < g.locs.size(); ++x) {
		std::int64_t best = 0;
		(seen & g.writes() & g.at_loc(static_cast<int>(x))).for_each([&](std::size_t w) { best = std::max(best, T[w]); });
		ok = ok && ts.V[x] == Timestamp(best);
	}
	if (!ok)
		out.push_back("(6) view");

	auto covered = (Ei & C).members();
	auto all = Ei.members();
	ok = covered.size() == ts.sigma.g.lab.size();
	for (std::size_t k = 0; ok && k < covered.size(); ++k)
		ok = covered[k] == all[k] && ts.sigma.g.lab[k] == g.lab[all[k]];
	if (!ok)
		out.push_back("(7) local state matches covered events");
	return out;
}

Simulation simulate_traversal(const Program &p, const Execution &g, const std::vector<TravStep> &steps)
{
	if (!relaxed_program(p) || !relaxed_only(g))
		throw UnsupportedFragment();
	Simulation sim;
	auto T = timestamp_map(g);
	auto ms = initial_machine(p);
	Traversal tr(g, Fragment::relaxed);
	auto tc = initial_config(g);
	const int nthreads = static_cast<int>(p.threads.size());

	auto check_all = [&](std::size_t k) {
		for (int t = 0; t < nthreads; ++t)
			for (auto &d : check_simulation(g, tc, ms, t, T))
				throw PromiseError("step " + std::to_string(k) + ", thread " + std::to_string(t) + ": " + d);
	};
	check_all(0);

	for (std::size_t k = 0; k < steps.size(); ++k) {
		const auto &s = steps[k];
		auto en = tr.enabled_steps(tc);
		if (std::find(en.begin(), en.end(), s) == en.end())
			throw PromiseError("step " + std::to_string(k) + " not enabled");
		const int i = s.tid(g);
		auto &ts = ms.TS[i];
		SimEvent ev{s, "", true};
		const auto &l = g.lab[s.e];
		if (s.kind == StepKind::issue) {
			Message m{l.loc, l.val, T[s.e]};
			promise_step(ts, ms.M, m);
			std::ostringstream os;
			os << "promise " << g.locs[m.loc] << ':' << m.val << '@' << ts_str(m.t);
			ev.action = os.str();
		} else {
			run_silent(ts, p);
			auto evs = g.thread(i).members();
			if (ts.sigma.g.lab.size() >= evs.size() || evs[ts.sigma.g.lab.size()] != s.e)
				throw PromiseError("step " + std::to_string(k) + ": covered event is not the next one");
			std::ostringstream os;
			if (l.kind == Kind::R) {
				auto src = g.rf.pred(s.e).members().front();
				read_step(ts, p, ms.M, T[src]);
				os << "read " << g.locs[l.loc] << ':' << l.val << '@' << T[src];
			} else {
				bool fulfil = ts.P.count(Message{l.loc, l.val, T[s.e]}) > 0;
				write_step(ts, p, ms.M, T[s.e]);
				os << (fulfil ? "fulfil " : "write ") << g.locs[l.loc] << ':' << l.val << '@' << T[s.e];
			}
			ev.action = os.str();
		}
		if (!ts.P.empty()) {
			auto r = certify(ts, p, ms.M);
			++sim.certifications;
			if (r.inconclusive)
				++sim.inconclusive;
			ev.certified = r.certified;
			if (!r.certified)
				throw PromiseError("step " + std::to_string(k) + ": state not certifiable");
		}
		tc = tr.apply(tc, s);
		check_all(k + 1);
		sim.trace.push_back(std::move(ev));
	}

	for (int t = 0; t < nthreads; ++t) {
		auto &ts = ms.TS[t];
		run_silent(ts, p);
		if (!ts.sigma.terminal() || !ts.P.empty())
			throw PromiseError("thread " + std::to_string(t) + " did not finish");
		auto evs = g.thread(t).members();
		if (ts.sigma.g.lab.size() != evs.size())
			throw PromiseError("thread " + std::to_string(t) + " ran a different path");
	}
	sim.outcome = machine_outcome(ms);
	if (sim.outcome != outcome(g))
		throw PromiseError("machine outcome differs from graph outcome");
	sim.final = std::move(ms);
	return sim;
}

} // namespace immlab
