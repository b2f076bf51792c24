#pragma once

// Brute-force reference implementations used as test oracles.

#include <cstddef>
#include <random>
#include <vector>

#include "immlab/hwmodels.hpp"
#include "immlab/relalg.hpp"

namespace oracle {

using Matrix = std::vector<std::vector<bool>>;

inline Matrix zeros(std::size_t n) { return Matrix(n, std::vector<bool>(n, false)); }

inline Matrix of(const immlab::Rel &r)
{
	auto m = zeros(r.universe());
	for (std::size_t a = 0; a < m.size(); ++a)
		for (std::size_t b = 0; b < m.size(); ++b)
			m[a][b] = r.contains(a, b);
	return m;
}

inline Matrix product(const Matrix &a, const Matrix &b)
{
	auto n = a.size();
	auto m = zeros(n);
	for (std::size_t i = 0; i < n; ++i)
		for (std::size_t j = 0; j < n; ++j)
			for (std::size_t k = 0; k < n; ++k)
				if (a[i][k] && b[k][j])
					m[i][j] = true;
	return m;
}

inline Matrix join(Matrix a, const Matrix &b)
{
	for (std::size_t i = 0; i < a.size(); ++i)
		for (std::size_t j = 0; j < a.size(); ++j)
			a[i][j] = a[i][j] || b[i][j];
	return a;
}

inline Matrix identity(std::size_t n)
{
	auto m = zeros(n);
	for (std::size_t i = 0; i < n; ++i)
		m[i][i] = true;
	return m;
}

// R ∪ R² ∪ ... by repeated squaring until nothing changes.
inline Matrix plus(const Matrix &r)
{
	auto m = r;
	for (;;) {
		auto next = join(m, product(m, m));
		if (next == m)
			return m;
		m = next;
	}
}

inline Matrix transpose(const Matrix &r)
{
	auto m = zeros(r.size());
	for (std::size_t i = 0; i < r.size(); ++i)
		for (std::size_t j = 0; j < r.size(); ++j)
			m[j][i] = r[i][j];
	return m;
}

// R \ R;R⁺, for a strict partial order.
inline Matrix hasse(const Matrix &r)
{
	auto two = product(r, plus(r));
	auto m = r;
	for (std::size_t i = 0; i < r.size(); ++i)
		for (std::size_t j = 0; j < r.size(); ++j)
			if (two[i][j])
				m[i][j] = false;
	return m;
}

inline bool acyclic(const Matrix &r)
{
	auto p = plus(r);
	for (std::size_t i = 0; i < r.size(); ++i)
		if (p[i][i])
			return false;
	return true;
}

inline immlab::Rel random_rel(std::mt19937_64 &rng, std::size_t n, double density)
{
	std::bernoulli_distribution coin(density);
	immlab::Rel r(n);
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = 0; b < n; ++b)
			if (coin(rng))
				r.insert(a, b);
	return r;
}

// Strict relation that only goes forward in index order (a DAG).
inline immlab::Rel random_dag(std::mt19937_64 &rng, std::size_t n, double density)
{
	std::bernoulli_distribution coin(density);
	immlab::Rel r(n);
	for (std::size_t a = 0; a < n; ++a)
		for (std::size_t b = a + 1; b < n; ++b)
			if (coin(rng))
				r.insert(a, b);
	return r;
}

// Rule table for ii/ic/ci/cc, applied naively until saturation.
struct PowerRules {
	Matrix ii, ic, ci, cc;
};

inline PowerRules power_saturate(const immlab::PowerBase &b, bool armv7 = false)
{
	auto n = b.addr.universe();
	auto addr = of(b.addr), data = of(b.data), rdw = of(b.rdw), rfi = of(b.rfi);
	auto cisync = of(b.ctrl_isync), detour = of(b.detour), ctrl = of(b.ctrl), addr_po = of(b.addr_po),
	     po_loc = of(b.po_loc);
	PowerRules s{zeros(n), zeros(n), zeros(n), zeros(n)};
	for (;;) {
		auto ii = join(join(join(join(addr, data), join(rdw, rfi)), s.ci),
			       join(product(s.ic, s.ci), product(s.ii, s.ii)));
		auto ic = join(join(s.ii, s.cc), join(product(s.ic, s.cc), product(s.ii, s.ic)));
		auto ci = join(join(cisync, detour), join(product(s.ci, s.ii), product(s.cc, s.ci)));
		auto cc = join(join(join(data, ctrl), addr_po), join(s.ci, join(product(s.ci, s.ic), product(s.cc, s.cc))));
		if (!armv7)
			cc = join(cc, po_loc);
		PowerRules next{ii, ic, ci, cc};
		if (next.ii == s.ii && next.ic == s.ic && next.ci == s.ci && next.cc == s.cc)
			return s;
		s = next;
	}
}

inline immlab::PowerBase random_power_base(std::mt19937_64 &rng, std::size_t n)
{
	immlab::PowerBase b;
	b.addr = random_dag(rng, n, 0.12);
	b.data = random_dag(rng, n, 0.12);
	b.rdw = random_dag(rng, n, 0.06);
	b.rfi = random_dag(rng, n, 0.08);
	b.ctrl_isync = random_dag(rng, n, 0.06);
	b.detour = random_dag(rng, n, 0.06);
	b.ctrl = random_dag(rng, n, 0.1);
	b.addr_po = random_dag(rng, n, 0.1);
	b.po_loc = random_dag(rng, n, 0.1);
	return b;
}

} // namespace oracle
