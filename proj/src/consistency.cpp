#include "immlab/consistency.hpp"

#include <algorithm>

namespace immlab {

void Verdict::fail(std::string axiom, std::vector<Rel::Pair> witness)
{
	consistent = false;
	violations.push_back({std::move(axiom), std::move(witness)});
}

bool Verdict::violates(const std::string &axiom) const
{
	return std::any_of(violations.begin(), violations.end(), [&](auto &v) { return v.axiom == axiom; });
}

namespace {

// Path a -> ... -> a through r1;r2;...;rk, one edge per segment (identity steps dropped).
std::vector<Rel::Pair> chain_witness(const std::vector<Rel> &chain, std::size_t a)
{
	const auto n = chain.front().universe();
	std::vector<std::vector<std::size_t>> parent(chain.size() + 1, std::vector<std::size_t>(n, n));
	std::vector<EventSet> layer(chain.size() + 1, EventSet(n));
	layer[0].insert(a);
	for (std::size_t k = 0; k < chain.size(); ++k)
		layer[k].for_each([&](std::size_t x) {
			chain[k].succ(x).for_each([&](std::size_t y) {
				if (!layer[k + 1].contains(y)) {
					layer[k + 1].insert(y);
					parent[k + 1][y] = x;
				}
			});
		});
	std::vector<Rel::Pair> out;
	std::size_t cur = a;
	for (std::size_t k = chain.size(); k > 0; --k) {
		auto prev = parent[k][cur];
		if (prev != cur)
			out.emplace_back(prev, cur);
		cur = prev;
	}
	std::reverse(out.begin(), out.end());
	if (out.empty())
		out.emplace_back(a, a);
	return out;
}

void check_chain_irreflexive(const std::vector<Rel> &chain, const std::string &axiom, Verdict &v)
{
	Rel r = chain.front();
	for (std::size_t k = 1; k < chain.size(); ++k)
		r = compose(r, chain[k]);
	for (std::size_t a = 0; a < r.universe(); ++a)
		if (r.contains(a, a)) {
			v.fail(axiom, chain_witness(chain, a));
			return;
		}
}

Rel opt(const Rel &r)
{
	return reflexive(r);
}

} // namespace

void check_rf_complete(const Execution &g, Verdict &v)
{
	auto missing = g.reads() - codom(g.rf);
	if (!missing.empty()) {
		std::vector<Rel::Pair> w;
		missing.for_each([&](std::size_t r) { w.emplace_back(r, r); });
		v.fail("rf-complete", w);
	}
}

void check_co_total(const Execution &g, Verdict &v)
{
	for (std::size_t x = 0; x < g.locs.size(); ++x) {
		auto ws = (g.writes() & g.at_loc(static_cast<int>(x))).members();
		for (std::size_t i = 0; i < ws.size(); ++i)
			for (std::size_t j = i + 1; j < ws.size(); ++j)
				if (!g.co.contains(ws[i], ws[j]) && !g.co.contains(ws[j], ws[i])) {
					v.fail("co-total", {{ws[i], ws[j]}});
					return;
				}
	}
}

void check_irreflexive(const Rel &r, const std::string &axiom, Verdict &v)
{
	check_chain_irreflexive({r}, axiom, v);
}

void check_acyclic(const Rel &r, const std::string &axiom, Verdict &v)
{
	if (!is_acyclic(r))
		v.fail(axiom, cycle_edges(find_cycle(r)));
}

void check_atomicity(const Execution &g, Verdict &v)
{
	const auto &d = g.derived();
	auto bad = g.rmw & compose(d.fre, d.coe);
	if (bad.empty())
		return;
	auto [r, w] = bad.pairs().front();
	auto mid = d.fre.succ(r) & d.coe.pred(w);
	auto m = mid.members().front();
	v.fail("atomicity", {{r, w}, {r, m}, {m, w}});
}

Verdict check_imm(const Execution &g)
{
	Verdict v;
	const auto &d = g.derived();
	check_rf_complete(g, v);
	check_co_total(g, v);
	check_chain_irreflexive({d.hb, opt(d.eco)}, "coherence", v);
	check_atomicity(g, v);
	check_acyclic(d.ar, "no-thin-air", v);
	return v;
}

namespace {

// sc;hb;(eco;hb)? irreflexive and ar_base ∪ sc acyclic
bool sc_order_ok(const Execution &g, const Rel &sc, Verdict *v)
{
	const auto &d = g.derived();
	Verdict local;
	Verdict &out = v ? *v : local;
	auto before = out.violations.size();
	check_chain_irreflexive({sc, d.hb_rc11, opt(compose(d.eco, d.hb_rc11))}, "sc-coherence", out);
	check_acyclic(d.ar_base | sc, "no-thin-air", out);
	return out.violations.size() == before;
}

Rel chain_order(std::size_t n, const std::vector<std::size_t> &order)
{
	Rel r(n);
	for (std::size_t i = 0; i < order.size(); ++i)
		for (std::size_t j = i + 1; j < order.size(); ++j)
			r.insert(order[i], order[j]);
	return r;
}

} // namespace

Verdict check_imms(const Execution &g)
{
	Verdict v;
	const auto &d = g.derived();
	check_rf_complete(g, v);
	check_co_total(g, v);
	check_chain_irreflexive({d.hb_rc11, opt(d.eco)}, "coherence", v);
	check_atomicity(g, v);
	const auto Fsc = g.fences_at_least(Mode::sc);
	if (g.sc) {
		if (!is_total_on(*g.sc, Fsc) || !g.sc->subset_of(Rel::cross(Fsc, Fsc)))
			v.fail("sc-total");
		else if (sc_order_ok(g, *g.sc, &v))
			v.sc_witness = *g.sc;
		return v;
	}
	auto fences = Fsc.members();
	std::sort(fences.begin(), fences.end());
	std::optional<Verdict> first_failure;
	do {
		auto sc = chain_order(g.size(), fences);
		Verdict trial;
		if (sc_order_ok(g, sc, &trial)) {
			v.sc_witness = sc;
			return v;
		}
		if (!first_failure)
			first_failure = trial;
	} while (std::next_permutation(fences.begin(), fences.end()));
	// report the failures of the lexicographically first order
	for (auto &viol : first_failure->violations)
		v.fail(viol.axiom, viol.witness);
	return v;
}

std::optional<Rel> imms_sc_order(const Execution &g)
{
	auto v = check_imms(g);
	if (!v.consistent)
		return std::nullopt;
	return v.sc_witness;
}

Verdict check_c11(const Execution &g)
{
	Verdict v;
	const auto &d = g.derived();
	check_rf_complete(g, v);
	check_co_total(g, v);
	check_chain_irreflexive({d.hb_rc11, opt(d.eco)}, "coherence", v);
	check_atomicity(g, v);
	const auto Fsc = g.fences_at_least(Mode::sc);
	auto hb_eco_hb = compose(compose(d.hb_rc11, d.eco), d.hb_rc11);
	check_acyclic(restrict(d.hb_rc11 | hb_eco_hb, Fsc, Fsc), "sc-fences", v);
	return v;
}

Verdict check_rc11(const Execution &g)
{
	auto v = check_c11(g);
	check_acyclic(g.derived().po | g.rf, "no-thin-air", v);
	return v;
}

} // namespace immlab
