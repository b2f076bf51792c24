#include "immlab/traversal.hpp"

#include <algorithm>

#include "immlab/consistency.hpp"

namespace immlab {

bool relaxed_only(const Execution &g)
{
	if (!g.rmw.empty() || !g.fences().empty())
		return false;
	for (std::size_t e = 0; e < g.size(); ++e)
		if (!g.ev[e].is_init() && g.lab[e].mode != Mode::rlx)
			return false;
	return true;
}

TraversalConfig initial_config(const Execution &g)
{
	return {g.init(), g.init()};
}

TraversalConfig final_config(const Execution &g)
{
	return {g.all(), g.writes()};
}

const char *to_string(StepKind k)
{
	switch (k) {
	case StepKind::cover:
		return "cover";
	case StepKind::rmw_cover:
		return "rmw-cover";
	case StepKind::release_cover:
		return "release-cover";
	case StepKind::issue:
		return "issue";
	}
	return "?";
}

std::string step_name(const Execution &g, const TravStep &s)
{
	std::string out = std::string(to_string(s.kind)) + " " + event_name(g.ev[s.e]);
	if (s.w)
		out += "+" + event_name(g.ev[*s.w]) + (s.issues_w ? " (issue)" : "");
	return out;
}

Execution attach_sc_witness(const Execution &g)
{
	auto sc = imms_sc_order(g);
	if (!sc)
		throw ContractViolation("graph is not IMM_S-consistent");
	Execution out = g;
	out.sc = *sc;
	return out;
}

Traversal::Traversal(const Execution &g, Fragment f) : g_(g), frag_(f)
{
	const auto n = g_.size();
	const auto &d = g_.derived();
	po_ = d.po;
	rf_ = g_.rf;
	rmw_ = g_.rmw;
	W_ = g_.writes();
	R_ = g_.reads();
	Wrel_ = g_.writes_at_least(Mode::rel);
	Fsc_ = g_.fences_at_least(Mode::sc);
	Fweak_ = g_.fences() - Fsc_;
	if (!Fsc_.empty() && !g_.sc)
		throw ContractViolation("sc order required for graphs with sc fences");
	Rel sc = g_.sc ? *g_.sc : Rel(n);

	auto pred_sets = [&](const Rel &r) {
		std::vector<EventSet> out(n, EventSet(n));
		for (auto [a, b] : r.pairs())
			out[b].insert(a);
		return out;
	};
	po_pred_ = pred_sets(po_);
	sc_pred_ = pred_sets(sc);

	Rel cov_rel(n), iss_rel(n);
	if (frag_ == Fragment::relaxed) {
		iss_rel = compose(d.rfe, d.ppo);
	} else {
		cov_rel = compose(Rel::identity(Wrel_), d.po_loc) | compose(Rel::identity(g_.fences()), po_);
		auto into = d.detour | d.rfe;
		iss_rel = compose(into, d.ppo) |
			  compose(compose(into, Rel::identity(g_.reads_at_least(Mode::acq))), po_) |
			  compose(Rel::identity(g_.strong_writes()), po_);
	}
	need_cov_ = pred_sets(cov_rel);
	need_iss_ = pred_sets(iss_rel);
	ar_plus_ = transitive(d.ar_base | sc);
}

bool Traversal::coverable(const TraversalConfig &tc, std::size_t e) const
{
	if (!po_pred_[e].subset_of(tc.C))
		return false;
	if (W_.contains(e))
		return tc.I.contains(e);
	if (R_.contains(e))
		return rf_.pred(e).subset_of(tc.I);
	if (frag_ == Fragment::relaxed)
		return false;
	if (Fweak_.contains(e))
		return true;
	return Fsc_.contains(e) && sc_pred_[e].subset_of(tc.C);
}

bool Traversal::issuable(const TraversalConfig &tc, std::size_t w) const
{
	return W_.contains(w) && need_cov_[w].subset_of(tc.C) && need_iss_[w].subset_of(tc.I);
}

bool Traversal::partial_config(const TraversalConfig &tc) const
{
	if (!g_.init().subset_of(tc.C))
		return false;
	bool ok = true;
	tc.C.for_each([&](std::size_t e) { ok = ok && coverable(tc, e); });
	tc.I.for_each([&](std::size_t w) { ok = ok && issuable(tc, w); });
	return ok;
}

std::vector<std::string> Traversal::check_config(const TraversalConfig &tc) const
{
	std::vector<std::string> out;
	if (!g_.init().subset_of(tc.C))
		out.push_back("init not covered");
	if (!(tc.C & W_).subset_of(tc.I))
		out.push_back("covered write not issued");
	bool cov = true, iss = true;
	tc.C.for_each([&](std::size_t e) { cov = cov && coverable(tc, e); });
	tc.I.for_each([&](std::size_t w) { iss = iss && issuable(tc, w); });
	if (!cov)
		out.push_back("covered event not coverable");
	if (!iss)
		out.push_back("issued event not issuable");
	if (frag_ == Fragment::full) {
		if (!(tc.I & Wrel_).subset_of(tc.C))
			out.push_back("issued release write not covered");
		if (!codom(compose(Rel::identity(tc.C), rmw_)).subset_of(tc.C))
			out.push_back("rmw write of covered read not covered");
	}
	return out;
}

std::vector<TravStep> Traversal::enabled_steps(const TraversalConfig &tc) const
{
	std::vector<TravStep> out;
	const auto n = g_.size();
	for (std::size_t e = 0; e < n; ++e) {
		if (tc.C.contains(e))
			continue;
		if (frag_ == Fragment::relaxed) {
			if (coverable(tc, e))
				out.push_back(TravStep::single(StepKind::cover, e));
			continue;
		}
		auto partner = rmw_.succ(e);
		if (coverable(tc, e)) {
			if (partner.empty()) {
				out.push_back(TravStep::single(StepKind::cover, e));
			} else {
				auto w = partner.members().front();
				if (tc.I.contains(w))
					out.push_back(TravStep::rmw(e, w, false));
				else if (Wrel_.contains(w))
					out.push_back(TravStep::rmw(e, w, true));
			}
		}
		if (Wrel_.contains(e) && !tc.I.contains(e) && po_pred_[e].subset_of(tc.C))
			out.push_back(TravStep::single(StepKind::release_cover, e));
	}
	for (std::size_t w = 0; w < n; ++w)
		if (W_.contains(w) && !tc.I.contains(w) && issuable(tc, w) &&
		    (frag_ == Fragment::relaxed || !Wrel_.contains(w)))
			out.push_back(TravStep::single(StepKind::issue, w));
	return out;
}

TraversalConfig Traversal::apply(const TraversalConfig &tc, const TravStep &s) const
{
	auto out = tc;
	switch (s.kind) {
	case StepKind::cover:
		out.C.insert(s.e);
		break;
	case StepKind::rmw_cover:
		out.C.insert(s.e);
		out.C.insert(*s.w);
		if (s.issues_w)
			out.I.insert(*s.w);
		break;
	case StepKind::release_cover:
		out.C.insert(s.e);
		out.I.insert(s.e);
		break;
	case StepKind::issue:
		out.I.insert(s.e);
		break;
	}
	return out;
}

std::optional<TravStep> Traversal::choose(const TraversalConfig &tc, std::optional<int> prev_tid) const
{
	auto steps = enabled_steps(tc);
	if (steps.empty())
		return std::nullopt;
	auto key = [&](const TravStep &s) {
		bool other = !prev_tid || s.tid(g_) != *prev_tid;
		return std::tuple(static_cast<int>(s.kind), other, s.e);
	};
	return *std::min_element(steps.begin(), steps.end(),
				 [&](const TravStep &a, const TravStep &b) { return key(a) < key(b); });
}

std::optional<TravStep> Traversal::find_next(const TraversalConfig &tc) const
{
	// po-next uncovered event of each thread
	std::vector<std::size_t> next;
	for (int t = 0; t < g_.nthreads(); ++t) {
		auto rest = (g_.thread(t) - tc.C).members();
		if (!rest.empty())
			next.push_back(rest.front());
	}
	if (next.empty())
		return std::nullopt;
	for (auto e : next)
		if (coverable(tc, e))
			return TravStep::single(StepKind::cover, e);
	for (auto e : next)
		if (W_.contains(e) && !tc.I.contains(e) && issuable(tc, e))
			return TravStep::single(StepKind::issue, e);
	auto pending = W_ - tc.I;
	for (auto w : pending.members()) {
		if ((ar_plus_.pred(w) & pending).empty()) {
			if (issuable(tc, w))
				return TravStep::single(StepKind::issue, w);
			break;
		}
	}
	return std::nullopt;
}

TraversalConfig Traversal::small_step(const TraversalConfig &tc, const TravStep &s) const
{
	auto out = tc;
	if (s.kind == StepKind::issue)
		out.I.insert(s.e);
	else
		out.C.insert(s.e);
	return out;
}

std::optional<TravStep> Traversal::lift_to_trav(const TraversalConfig &tc, const TravStep &small) const
{
	if (frag_ == Fragment::relaxed)
		return small;
	const auto e = small.e;
	if (small.kind == StepKind::issue) {
		if (!Wrel_.contains(e))
			return small;
		if (po_pred_[e].subset_of(tc.C))
			return TravStep::single(StepKind::release_cover, e);
		return std::nullopt;
	}
	auto partner = rmw_.succ(e);
	if (partner.empty())
		return TravStep::single(StepKind::cover, e);
	auto w = partner.members().front();
	if (tc.I.contains(w))
		return TravStep::rmw(e, w, false);
	if (Wrel_.contains(w))
		return TravStep::rmw(e, w, true);
	// the write part is neither issued nor release: issue it first
	if (issuable(tc, w))
		return TravStep::single(StepKind::issue, w);
	return std::nullopt;
}

namespace {

template <class Next>
TraversalRun run(const Traversal &t, std::optional<TraversalConfig> start, Next next)
{
	const auto &g = t.graph();
	TraversalRun out;
	auto tc = start ? *start : initial_config(g);
	auto goal = final_config(g);
	out.configs.push_back(tc);
	std::optional<int> prev;
	while (!(tc == goal)) {
		auto s = next(tc, prev);
		if (!s)
			throw TraversalStuck("traversal stuck", tc);
		auto nt = t.apply(tc, *s);
		auto diag = t.check_config(nt);
		if (!diag.empty())
			throw TraversalStuck("after " + step_name(g, *s) + ": " + diag.front(), nt);
		tc = std::move(nt);
		prev = s->tid(g);
		out.steps.push_back(*s);
		out.configs.push_back(tc);
	}
	return out;
}

} // namespace

TraversalRun traverse_to_completion(const Traversal &t, std::optional<TraversalConfig> start)
{
	return run(t, std::move(start), [&](const TraversalConfig &tc, std::optional<int> prev) { return t.choose(tc, prev); });
}

TraversalRun traverse_small_steps(const Traversal &t, std::optional<TraversalConfig> start)
{
	return run(t, std::move(start), [&](const TraversalConfig &tc, std::optional<int>) -> std::optional<TravStep> {
		auto s = t.find_next(tc);
		if (!s)
			return std::nullopt;
		return t.lift_to_trav(tc, *s);
	});
}

std::optional<TraversalConfig> replay(const Traversal &t, const std::vector<TravStep> &steps)
{
	auto tc = initial_config(t.graph());
	for (auto &s : steps) {
		auto en = t.enabled_steps(tc);
		if (std::find(en.begin(), en.end(), s) == en.end())
			return std::nullopt;
		tc = t.apply(tc, s);
	}
	return tc;
}

} // namespace immlab
