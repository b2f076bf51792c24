#include "immlab/enumerate.hpp"

#include <algorithm>
#include <atomic>
#include <set>
#include <thread>

namespace immlab {

namespace {

constexpr std::size_t step_limit = 4096;

std::vector<std::size_t> psi_of(const ThreadState &s, const Expr &e)
{
	std::set<std::size_t> out;
	for (int r : e.regs())
		out.insert(s.psi.at(r).begin(), s.psi.at(r).end());
	return {out.begin(), out.end()};
}

int location_of(const ThreadState &s, const Program &p, const Expr &e)
{
	Val v = eval_expr(e, s.phi);
	if (v >= p.locations.size())
		throw AddressError("thread " + std::to_string(s.tid) + " line " +
				   std::to_string(s.code->code[s.pc].line) + ": address " + std::to_string(v) +
				   " outside declared locations");
	return static_cast<int>(v);
}

std::size_t add_event(ThreadGraph &g, const Label &l, const std::vector<std::size_t> &rmw,
		      const std::vector<std::size_t> &data, const std::vector<std::size_t> &addr,
		      const std::vector<std::size_t> &ctrl, const std::vector<std::size_t> &casdep)
{
	auto e = g.lab.size();
	g.lab.push_back(l);
	for (auto a : rmw)
		g.rmw.emplace_back(a, e);
	for (auto a : data)
		g.data.emplace_back(a, e);
	for (auto a : addr)
		g.addr.emplace_back(a, e);
	for (auto a : ctrl)
		g.ctrl.emplace_back(a, e);
	for (auto a : casdep)
		g.casdep.emplace_back(a, e);
	return e;
}

} // namespace

bool ThreadState::needs_value() const
{
	if (terminal())
		return false;
	auto k = code->code[pc].kind;
	return k == Instr::Kind::load || k == Instr::Kind::fadd || k == Instr::Kind::cas;
}

int ThreadState::next_location(const Program &p) const
{
	if (terminal())
		return -1;
	const auto &in = code->code[pc];
	switch (in.kind) {
	case Instr::Kind::store:
	case Instr::Kind::load:
	case Instr::Kind::fadd:
	case Instr::Kind::cas:
		return location_of(*this, p, in.e1);
	default:
		return -1;
	}
}

ThreadState initial_state(const Program &p, int tid)
{
	ThreadState s;
	s.code = &p.threads.at(tid);
	s.tid = tid;
	s.g.tid = tid;
	s.phi.assign(s.code->regs.size(), 0);
	s.psi.assign(s.code->regs.size(), {});
	return s;
}

ThreadState thread_step(const ThreadState &s0, const Program &p, std::optional<Val> read_value)
{
	if (s0.terminal())
		throw ContractViolation("step from a terminal state");
	if (s0.needs_value() != read_value.has_value())
		throw ContractViolation("read value supplied iff the instruction reads");
	ThreadState s = s0;
	const auto &in = s.code->code[s.pc];
	const std::vector<std::size_t> none;
	int next = s.pc + 1;
	switch (in.kind) {
	case Instr::Kind::assign:
		s.phi[in.reg] = eval_expr(in.e1, s.phi);
		s.psi[in.reg] = psi_of(s, in.e1);
		break;
	case Instr::Kind::if_goto: {
		if (eval_expr(in.e1, s.phi) != 0) {
			next = in.target;
			if (next <= s.pc)
				++s.backjumps;
		}
		auto deps = psi_of(s, in.e1);
		std::set<std::size_t> merged(s.S.begin(), s.S.end());
		merged.insert(deps.begin(), deps.end());
		s.S.assign(merged.begin(), merged.end());
		break;
	}
	case Instr::Kind::store: {
		int x = location_of(s, p, in.e1);
		add_event(s.g, Label::write(in.mode_w, x, eval_expr(in.e2, s.phi)), none, psi_of(s, in.e2),
			  psi_of(s, in.e1), s.S, none);
		break;
	}
	case Instr::Kind::load: {
		int x = location_of(s, p, in.e1);
		auto e = add_event(s.g, Label::read(in.mode_r, x, *read_value), none, none, psi_of(s, in.e1), s.S, none);
		s.phi[in.reg] = *read_value;
		s.psi[in.reg] = {e};
		break;
	}
	case Instr::Kind::fadd: {
		int x = location_of(s, p, in.e1);
		auto addr = psi_of(s, in.e1);
		auto aR = add_event(s.g, Label::read(in.mode_r, x, *read_value, true), none, none, addr, s.S, none);
		auto data = psi_of(s, in.e2);
		data.push_back(aR);
		std::sort(data.begin(), data.end());
		data.erase(std::unique(data.begin(), data.end()), data.end());
		add_event(s.g, Label::write(in.mode_w, x, *read_value + eval_expr(in.e2, s.phi), in.rmw), {aR}, data, addr,
			  s.S, none);
		s.phi[in.reg] = *read_value;
		s.psi[in.reg] = {aR};
		break;
	}
	case Instr::Kind::cas: {
		int x = location_of(s, p, in.e1);
		auto addr = psi_of(s, in.e1);
		auto aR = add_event(s.g, Label::read(in.mode_r, x, *read_value, true), none, none, addr, s.S,
				    psi_of(s, in.e2));
		if (*read_value == eval_expr(in.e2, s.phi))
			add_event(s.g, Label::write(in.mode_w, x, eval_expr(in.e3, s.phi), in.rmw), {aR}, psi_of(s, in.e3),
				  addr, s.S, none);
		s.phi[in.reg] = *read_value;
		s.psi[in.reg] = {aR};
		break;
	}
	case Instr::Kind::fence:
		add_event(s.g, Label::fence(in.mode_r), none, none, none, s.S, none);
		break;
	}
	s.pc = next;
	return s;
}

ThreadGraphs thread_graphs(const Program &p, int tid, const ValueDomain &dom, const Bounds &b)
{
	ThreadGraphs out;
	out.written.assign(p.locations.size(), {});
	std::vector<std::set<Val>> written(p.locations.size());
	// depth-first, values tried in increasing order so runs come out lexicographically
	struct Frame {
		ThreadState s;
		std::size_t steps;
	};
	std::vector<Frame> stack;
	stack.push_back({initial_state(p, tid), 0});
	while (!stack.empty()) {
		auto [s, steps] = std::move(stack.back());
		stack.pop_back();
		if (s.terminal()) {
			out.runs.push_back({std::move(s.g), std::move(s.phi)});
			continue;
		}
		if (s.backjumps > b.unroll || steps >= step_limit) {
			out.truncated = true;
			continue;
		}
		std::vector<ThreadState> succ;
		if (s.needs_value()) {
			int x = s.next_location(p);
			for (Val v : dom.at(x))
				succ.push_back(thread_step(s, p, v));
		} else {
			succ.push_back(thread_step(s, p, std::nullopt));
		}
		for (auto &n : succ)
			for (std::size_t e = s.g.lab.size(); e < n.g.lab.size(); ++e)
				if (n.g.lab[e].kind == Kind::W)
					written[n.g.lab[e].loc].insert(n.g.lab[e].val);
		for (auto it = succ.rbegin(); it != succ.rend(); ++it)
			stack.push_back({std::move(*it), steps + 1});
	}
	for (std::size_t x = 0; x < written.size(); ++x)
		out.written[x].assign(written[x].begin(), written[x].end());
	return out;
}

ValueDomain read_domain(const Program &p, const Bounds &b, bool *truncated)
{
	ValueDomain dom(p.locations.size(), std::vector<Val>{0});
	bool trunc = false;
	for (;;) {
		std::vector<std::set<Val>> next(p.locations.size(), std::set<Val>{0});
		for (std::size_t t = 0; t < p.threads.size(); ++t) {
			auto tg = thread_graphs(p, static_cast<int>(t), dom, b);
			trunc |= tg.truncated;
			for (std::size_t x = 0; x < tg.written.size(); ++x)
				for (Val v : tg.written[x]) {
					if (v > b.max_val)
						trunc = true;
					else
						next[x].insert(v);
				}
		}
		ValueDomain nd;
		for (auto &s : next)
			nd.emplace_back(s.begin(), s.end());
		if (nd == dom)
			break;
		dom = std::move(nd);
	}
	if (truncated)
		*truncated = trunc;
	return dom;
}

Execution assemble(const Program &p, const std::vector<const ThreadGraph *> &threads)
{
	Execution g;
	g.locs = p.locations;
	for (std::size_t x = 0; x < p.locations.size(); ++x) {
		g.ev.push_back(Event::init(static_cast<int>(x)));
		g.lab.push_back(Label::write(Mode::rlx, static_cast<int>(x), 0));
	}
	std::vector<std::size_t> offset;
	for (auto *t : threads) {
		offset.push_back(g.ev.size());
		for (std::size_t i = 0; i < t->lab.size(); ++i) {
			g.ev.push_back(Event::at(t->tid, static_cast<int>(i)));
			g.lab.push_back(t->lab[i]);
		}
	}
	g.reset_relations();
	for (std::size_t k = 0; k < threads.size(); ++k) {
		auto o = offset[k];
		auto copy = [&](const auto &edges, Rel &r) {
			for (auto [a, b] : edges)
				r.insert(o + a, o + b);
		};
		copy(threads[k]->rmw, g.rmw);
		copy(threads[k]->data, g.data);
		copy(threads[k]->addr, g.addr);
		copy(threads[k]->ctrl, g.ctrl);
		copy(threads[k]->casdep, g.casdep);
	}
	return g;
}

void for_each_completion(const Execution &base, const std::function<bool(Execution &)> &visit)
{
	const auto n = base.size();
	std::vector<std::size_t> reads;
	std::vector<std::vector<std::size_t>> sources;
	for (std::size_t r = 0; r < n; ++r) {
		if (base.lab[r].kind != Kind::R)
			continue;
		std::vector<std::size_t> ws;
		for (std::size_t w = 0; w < n; ++w)
			if (base.lab[w].kind == Kind::W && base.lab[w].loc == base.lab[r].loc &&
			    base.lab[w].val == base.lab[r].val)
				ws.push_back(w);
		if (ws.empty())
			return;
		reads.push_back(r);
		sources.push_back(std::move(ws));
	}
	// per location: init write first, then the permuted rest
	std::vector<std::size_t> init_of(base.locs.size(), n);
	std::vector<std::vector<std::size_t>> perms(base.locs.size());
	for (std::size_t w = 0; w < n; ++w) {
		if (base.lab[w].kind != Kind::W)
			continue;
		if (base.ev[w].is_init())
			init_of[base.lab[w].loc] = w;
		else
			perms[base.lab[w].loc].push_back(w);
	}

	std::vector<std::size_t> rf_choice(reads.size(), 0);
	for (;;) {
		Rel rf(n);
		for (std::size_t i = 0; i < reads.size(); ++i)
			rf.insert(sources[i][rf_choice[i]], reads[i]);
		for (auto &pm : perms)
			std::sort(pm.begin(), pm.end());
		for (;;) {
			Rel co(n);
			for (std::size_t x = 0; x < perms.size(); ++x) {
				std::vector<std::size_t> chain;
				if (init_of[x] < n)
					chain.push_back(init_of[x]);
				chain.insert(chain.end(), perms[x].begin(), perms[x].end());
				for (std::size_t i = 0; i < chain.size(); ++i)
					for (std::size_t j = i + 1; j < chain.size(); ++j)
						co.insert(chain[i], chain[j]);
			}
			Execution g = base;
			g.rf = rf;
			g.co = std::move(co);
			if (!visit(g))
				return;
			// advance the co odometer (last location varies fastest)
			bool advanced = false;
			for (std::size_t x = perms.size(); x-- > 0;) {
				if (std::next_permutation(perms[x].begin(), perms[x].end())) {
					advanced = true;
					break;
				}
			}
			if (!advanced)
				break;
		}
		std::size_t i = reads.size();
		for (;;) {
			if (i == 0)
				return;
			--i;
			if (++rf_choice[i] < sources[i].size())
				break;
			rf_choice[i] = 0;
		}
	}
}

EnumStats for_each_candidate(const Program &p, const Bounds &b, const std::function<bool(const Candidate &)> &visit)
{
	EnumStats st;
	auto dom = read_domain(p, b, &st.truncated);
	std::vector<ThreadGraphs> tg;
	for (std::size_t t = 0; t < p.threads.size(); ++t) {
		tg.push_back(thread_graphs(p, static_cast<int>(t), dom, b));
		st.truncated |= tg.back().truncated;
	}
	std::size_t combos = 1;
	for (auto &t : tg)
		combos *= t.runs.size();
	st.combinations = combos;

	std::atomic<bool> stop{false};
	std::atomic<std::size_t> count{0};
	auto work = [&](std::size_t first, std::size_t stride) {
		for (std::size_t c = first; c < combos && !stop; c += stride) {
			std::vector<const ThreadGraph *> pick;
			std::vector<std::vector<Val>> regs;
			std::size_t rem = c;
			// thread 0 varies slowest
			std::vector<std::size_t> idx(tg.size());
			for (std::size_t t = tg.size(); t-- > 0;) {
				idx[t] = rem % tg[t].runs.size();
				rem /= tg[t].runs.size();
			}
			for (std::size_t t = 0; t < tg.size(); ++t) {
				pick.push_back(&tg[t].runs[idx[t]].g);
				regs.push_back(tg[t].runs[idx[t]].regs);
			}
			auto base = assemble(p, pick);
			std::size_t local = 0;
			for_each_completion(base, [&](Execution &g) {
				Candidate cand{std::move(g), regs, {c, local++}};
				++count;
				if (!visit(cand)) {
					stop = true;
					return false;
				}
				return !stop.load();
			});
		}
	};
	const auto jobs = static_cast<std::size_t>(std::max(1, b.jobs));
	if (jobs == 1 || combos < 2) {
		work(0, 1);
	} else {
		std::vector<std::thread> pool;
		for (std::size_t j = 0; j < jobs; ++j)
			pool.emplace_back(work, j, jobs);
		for (auto &t : pool)
			t.join();
	}
	st.candidates = count;
	return st;
}

} // namespace immlab
