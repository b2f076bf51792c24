#include "immlab/relalg.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace immlab {

EventSet EventSet::full(std::size_t n)
{
	EventSet s(n);
	for (std::size_t i = 0; i < n; ++i)
		s.insert(i);
	return s;
}

EventSet EventSet::of(std::size_t n, const std::vector<std::size_t> &xs)
{
	EventSet s(n);
	for (auto x : xs)
		s.insert(x);
	return s;
}

void EventSet::insert(std::size_t e)
{
	if (e >= n_)
		throw ContractViolation("event id outside universe");
	w_[e >> 6] |= std::uint64_t{1} << (e & 63);
}

void EventSet::erase(std::size_t e)
{
	if (e < n_)
		w_[e >> 6] &= ~(std::uint64_t{1} << (e & 63));
}

std::size_t EventSet::size() const
{
	std::size_t c = 0;
	for (auto w : w_)
		c += static_cast<std::size_t>(__builtin_popcountll(w));
	return c;
}

bool EventSet::empty() const
{
	return std::all_of(w_.begin(), w_.end(), [](auto w) { return w == 0; });
}

std::vector<std::size_t> EventSet::members() const
{
	std::vector<std::size_t> out;
	for_each([&](std::size_t e) { out.push_back(e); });
	return out;
}

bool EventSet::subset_of(const EventSet &o) const
{
	same_universe(o);
	for (std::size_t i = 0; i < w_.size(); ++i)
		if (w_[i] & ~o.w_[i])
			return false;
	return true;
}

bool EventSet::intersects(const EventSet &o) const
{
	same_universe(o);
	for (std::size_t i = 0; i < w_.size(); ++i)
		if (w_[i] & o.w_[i])
			return true;
	return false;
}

EventSet &EventSet::operator|=(const EventSet &o)
{
	same_universe(o);
	for (std::size_t i = 0; i < w_.size(); ++i)
		w_[i] |= o.w_[i];
	return *this;
}

EventSet &EventSet::operator&=(const EventSet &o)
{
	same_universe(o);
	for (std::size_t i = 0; i < w_.size(); ++i)
		w_[i] &= o.w_[i];
	return *this;
}

EventSet &EventSet::operator-=(const EventSet &o)
{
	same_universe(o);
	for (std::size_t i = 0; i < w_.size(); ++i)
		w_[i] &= ~o.w_[i];
	return *this;
}

void EventSet::same_universe(const EventSet &o) const
{
	if (n_ != o.n_)
		throw ContractViolation("event set universe mismatch");
}

Rel Rel::from_pairs(std::size_t n, const std::vector<Pair> &ps)
{
	Rel r(n);
	for (auto [a, b] : ps)
		r.insert(a, b);
	return r;
}

Rel Rel::identity(const EventSet &s)
{
	Rel r(s.universe());
	s.for_each([&](std::size_t e) { r.insert(e, e); });
	return r;
}

Rel Rel::cross(const EventSet &a, const EventSet &b)
{
	Rel r(a.universe());
	a.for_each([&](std::size_t e) { r.rows_[e] = b; });
	return r;
}

void Rel::insert(std::size_t a, std::size_t b)
{
	if (a >= n_ || b >= n_)
		throw ContractViolation("pair endpoint outside universe");
	rows_[a].insert(b);
}

void Rel::erase(std::size_t a, std::size_t b)
{
	if (a < n_)
		rows_[a].erase(b);
}

EventSet Rel::pred(std::size_t b) const
{
	EventSet s(n_);
	for (std::size_t a = 0; a < n_; ++a)
		if (rows_[a].contains(b))
			s.insert(a);
	return s;
}

std::vector<Rel::Pair> Rel::pairs() const
{
	std::vector<Pair> out;
	for (std::size_t a = 0; a < n_; ++a)
		rows_[a].for_each([&](std::size_t b) { out.emplace_back(a, b); });
	return out;
}

std::size_t Rel::size() const
{
	std::size_t c = 0;
	for (auto &r : rows_)
		c += r.size();
	return c;
}

bool Rel::empty() const
{
	return std::all_of(rows_.begin(), rows_.end(), [](auto &r) { return r.empty(); });
}

bool Rel::subset_of(const Rel &o) const
{
	same_universe(o);
	for (std::size_t a = 0; a < n_; ++a)
		if (!rows_[a].subset_of(o.rows_[a]))
			return false;
	return true;
}

Rel &Rel::operator|=(const Rel &o)
{
	same_universe(o);
	for (std::size_t a = 0; a < n_; ++a)
		rows_[a] |= o.rows_[a];
	return *this;
}

Rel &Rel::operator&=(const Rel &o)
{
	same_universe(o);
	for (std::size_t a = 0; a < n_; ++a)
		rows_[a] &= o.rows_[a];
	return *this;
}

Rel &Rel::operator-=(const Rel &o)
{
	same_universe(o);
	for (std::size_t a = 0; a < n_; ++a)
		rows_[a] -= o.rows_[a];
	return *this;
}

void Rel::same_universe(const Rel &o) const
{
	if (n_ != o.n_)
		throw ContractViolation("relation universe mismatch");
}

Rel compose(const Rel &a, const Rel &b)
{
	if (a.universe() != b.universe())
		throw ContractViolation("relation universe mismatch");
	Rel r(a.universe());
	for (std::size_t x = 0; x < a.universe(); ++x) {
		EventSet row(a.universe());
		a.succ(x).for_each([&](std::size_t y) { row |= b.succ(y); });
		row.for_each([&](std::size_t z) { r.insert(x, z); });
	}
	return r;
}

Rel inverse(const Rel &r)
{
	Rel out(r.universe());
	for (auto [a, b] : r.pairs())
		out.insert(b, a);
	return out;
}

EventSet dom(const Rel &r)
{
	EventSet s(r.universe());
	for (std::size_t a = 0; a < r.universe(); ++a)
		if (!r.succ(a).empty())
			s.insert(a);
	return s;
}

EventSet codom(const Rel &r)
{
	EventSet s(r.universe());
	for (std::size_t a = 0; a < r.universe(); ++a)
		s |= r.succ(a);
	return s;
}

Rel restrict(const Rel &r, const EventSet &a, const EventSet &b)
{
	Rel out(r.universe());
	a.for_each([&](std::size_t x) { (r.succ(x) & b).for_each([&](std::size_t y) { out.insert(x, y); }); });
	return out;
}

Rel restrict_loc(const Rel &r, const std::vector<int> &loc)
{
	Rel out(r.universe());
	for (auto [a, b] : r.pairs())
		if (loc[a] >= 0 && loc[a] == loc[b])
			out.insert(a, b);
	return out;
}

Rel reflexive(const Rel &r)
{
	return r | Rel::identity(EventSet::full(r.universe()));
}

// Per-source worklist saturation.
Rel transitive(const Rel &r)
{
	const auto n = r.universe();
	Rel out(n);
	for (std::size_t s = 0; s < n; ++s) {
		EventSet seen(n);
		std::vector<std::size_t> work;
		r.succ(s).for_each([&](std::size_t y) {
			seen.insert(y);
			work.push_back(y);
		});
		while (!work.empty()) {
			auto y = work.back();
			work.pop_back();
			r.succ(y).for_each([&](std::size_t z) {
				if (!seen.contains(z)) {
					seen.insert(z);
					work.push_back(z);
				}
			});
		}
		seen.for_each([&](std::size_t z) { out.insert(s, z); });
	}
	return out;
}

Rel refl_trans(const Rel &r)
{
	return reflexive(transitive(r));
}

Rel immediate(const Rel &r)
{
	return r - compose(r, r);
}

bool is_irreflexive(const Rel &r)
{
	for (std::size_t a = 0; a < r.universe(); ++a)
		if (r.contains(a, a))
			return false;
	return true;
}

bool is_acyclic(const Rel &r)
{
	const auto n = r.universe();
	std::vector<int> indeg(n, 0);
	for (auto [a, b] : r.pairs())
		++indeg[b];
	std::vector<std::size_t> work;
	for (std::size_t i = 0; i < n; ++i)
		if (indeg[i] == 0)
			work.push_back(i);
	std::size_t done = 0;
	while (!work.empty()) {
		auto a = work.back();
		work.pop_back();
		++done;
		r.succ(a).for_each([&](std::size_t b) {
			if (--indeg[b] == 0)
				work.push_back(b);
		});
	}
	return done == n;
}

bool is_total_on(const Rel &r, const EventSet &s)
{
	auto rs = restrict(r, s, s);
	if (!is_irreflexive(rs) || !compose(rs, rs).subset_of(rs))
		return false;
	auto xs = s.members();
	for (std::size_t i = 0; i < xs.size(); ++i)
		for (std::size_t j = i + 1; j < xs.size(); ++j)
			if (!rs.contains(xs[i], xs[j]) && !rs.contains(xs[j], xs[i]))
				return false;
	return true;
}

std::vector<std::size_t> find_cycle(const Rel &r)
{
	const auto n = r.universe();
	std::vector<std::size_t> best;
	for (std::size_t s = 0; s < n; ++s) {
		if (r.succ(s).empty())
			continue;
		std::vector<std::size_t> parent(n, std::numeric_limits<std::size_t>::max());
		std::vector<bool> seen(n, false);
		std::deque<std::size_t> q;
		q.push_back(s);
		seen[s] = true;
		bool found = false;
		std::size_t last = 0;
		while (!q.empty() && !found) {
			auto a = q.front();
			q.pop_front();
			r.succ(a).for_each([&](std::size_t b) {
				if (found)
					return;
				if (b == s) {
					found = true;
					last = a;
					return;
				}
				if (!seen[b]) {
					seen[b] = true;
					parent[b] = a;
					q.push_back(b);
				}
			});
		}
		if (!found)
			continue;
		std::vector<std::size_t> path{s};
		for (auto v = last; v != s; v = parent[v])
			path.push_back(v);
		path.push_back(s);
		std::reverse(path.begin() + 1, path.end() - 1);
		if (best.empty() || path.size() < best.size())
			best = path;
	}
	return best;
}

std::vector<Rel::Pair> cycle_edges(const std::vector<std::size_t> &cycle)
{
	std::vector<Rel::Pair> out;
	for (std::size_t i = 0; i + 1 < cycle.size(); ++i)
		out.emplace_back(cycle[i], cycle[i + 1]);
	return out;
}

std::vector<std::size_t> topo_order(const Rel &r, const EventSet &s)
{
	auto rs = restrict(r, s, s);
	std::vector<int> indeg(r.universe(), 0);
	for (auto [a, b] : rs.pairs())
		++indeg[b];
	std::vector<std::size_t> out;
	std::vector<std::size_t> ready;
	s.for_each([&](std::size_t e) {
		if (indeg[e] == 0)
			ready.push_back(e);
	});
	while (!ready.empty()) {
		auto it = std::min_element(ready.begin(), ready.end());
		auto a = *it;
		ready.erase(it);
		out.push_back(a);
		rs.succ(a).for_each([&](std::size_t b) {
			if (--indeg[b] == 0)
				ready.push_back(b);
		});
	}
	if (out.size() != s.size())
		throw ContractViolation("topological order of a cyclic relation");
	return out;
}

} // namespace immlab
