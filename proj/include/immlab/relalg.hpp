#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

namespace immlab {

struct ContractViolation : std::logic_error {
	using std::logic_error::logic_error;
};

// Dense bitset over event ids 0..n-1.
class EventSet {
public:
	EventSet() = default;
	explicit EventSet(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

	static EventSet full(std::size_t n);
	static EventSet of(std::size_t n, const std::vector<std::size_t> &xs);

	std::size_t universe() const { return n_; }
	bool contains(std::size_t e) const { return e < n_ && ((w_[e >> 6] >> (e & 63)) & 1u); }
	void insert(std::size_t e);
	void erase(std::size_t e);
	std::size_t size() const;
	bool empty() const;
	std::vector<std::size_t> members() const;
	bool subset_of(const EventSet &o) const;

	template <class F> void for_each(F &&f) const
	{
		for (std::size_t i = 0; i < w_.size(); ++i) {
			auto word = w_[i];
			while (word) {
				auto b = static_cast<std::size_t>(__builtin_ctzll(word));
				f(i * 64 + b);
				word &= word - 1;
			}
		}
	}

	EventSet &operator|=(const EventSet &o);
	EventSet &operator&=(const EventSet &o);
	EventSet &operator-=(const EventSet &o);
	friend EventSet operator|(EventSet a, const EventSet &b) { return a |= b; }
	friend EventSet operator&(EventSet a, const EventSet &b) { return a &= b; }
	friend EventSet operator-(EventSet a, const EventSet &b) { return a -= b; }
	friend bool operator==(const EventSet &a, const EventSet &b) { return a.n_ == b.n_ && a.w_ == b.w_; }
	bool intersects(const EventSet &o) const;

	const std::vector<std::uint64_t> &words() const { return w_; }

private:
	void same_universe(const EventSet &o) const;

	std::size_t n_ = 0;
	std::vector<std::uint64_t> w_;
};

// Binary relation over a dense universe, stored as one successor bitset per event.
class Rel {
public:
	using Pair = std::pair<std::size_t, std::size_t>;

	Rel() = default;
	explicit Rel(std::size_t n) : n_(n), rows_(n, EventSet(n)) {}

	static Rel from_pairs(std::size_t n, const std::vector<Pair> &ps);
	static Rel identity(const EventSet &s);
	static Rel cross(const EventSet &a, const EventSet &b);

	std::size_t universe() const { return n_; }
	bool contains(std::size_t a, std::size_t b) const { return a < n_ && rows_[a].contains(b); }
	void insert(std::size_t a, std::size_t b);
	void erase(std::size_t a, std::size_t b);
	const EventSet &succ(std::size_t a) const { return rows_[a]; }
	EventSet pred(std::size_t b) const;
	std::vector<Pair> pairs() const;
	std::size_t size() const;
	bool empty() const;
	bool subset_of(const Rel &o) const;

	Rel &operator|=(const Rel &o);
	Rel &operator&=(const Rel &o);
	Rel &operator-=(const Rel &o);
	friend Rel operator|(Rel a, const Rel &b) { return a |= b; }
	friend Rel operator&(Rel a, const Rel &b) { return a &= b; }
	friend Rel operator-(Rel a, const Rel &b) { return a -= b; }
	friend bool operator==(const Rel &a, const Rel &b) { return a.n_ == b.n_ && a.rows_ == b.rows_; }

private:
	void same_universe(const Rel &o) const;

	std::size_t n_ = 0;
	std::vector<EventSet> rows_;
};

Rel compose(const Rel &a, const Rel &b);
Rel inverse(const Rel &r);
EventSet dom(const Rel &r);
EventSet codom(const Rel &r);
// [A];r;[B]
Rel restrict(const Rel &r, const EventSet &a, const EventSet &b);
// keeps pairs whose endpoints share a location; negative entries have none
Rel restrict_loc(const Rel &r, const std::vector<int> &loc);

Rel reflexive(const Rel &r);
Rel transitive(const Rel &r);
Rel refl_trans(const Rel &r);
Rel immediate(const Rel &r);

bool is_irreflexive(const Rel &r);
bool is_acyclic(const Rel &r);
bool is_total_on(const Rel &r, const EventSet &s);

// Shortest cycle of r as a closed node list (first == last), empty if acyclic.
std::vector<std::size_t> find_cycle(const Rel &r);
std::vector<Rel::Pair> cycle_edges(const std::vector<std::size_t> &cycle);
// Topological order of an acyclic relation over the given set.
std::vector<std::size_t> topo_order(const Rel &r, const EventSet &s);

} // namespace immlab
