#include <doctest.h>

#include "immlab/enumerate.hpp"
#include "support.hpp"

using namespace immlab;
using support::ev;

TEST_CASE("thread_step rows")
{
	auto t = parse_litmus("prog \"s\"\nlocations x y\nthread 0:\n  a := 1\n  r[rlx] b x\n  cas[rlx,rlx] c y 1 a\n");
	const auto &p = t.program;
	auto s = initial_state(p, 0);
	auto s1 = thread_step(s, p, std::nullopt);
	CHECK(s1.g.lab.empty()); // assignment leaves the graph unchanged
	CHECK(s1.pc == 1);
	CHECK(s1.needs_value());
	auto s2 = thread_step(s1, p, Val{0});
	REQUIRE(s2.g.lab.size() == 1);
	CHECK(s2.g.lab[0].kind == Kind::R);
	CHECK(s2.psi[p.threads[0].reg_index("b")] == std::vector<std::size_t>{0});
	// failing cas: the exclusive read only
	auto fail = thread_step(s2, p, Val{0});
	REQUIRE(fail.g.lab.size() == 2);
	CHECK(fail.g.lab[1].ex);
	CHECK(fail.terminal());
	auto ok = thread_step(s2, p, Val{1});
	REQUIRE(ok.g.lab.size() == 3);
	CHECK(ok.g.lab[2].kind == Kind::W);
	CHECK(ok.g.lab[2].val == 1);
	CHECK(ok.g.rmw == std::vector<std::pair<std::size_t, std::size_t>>{{1, 2}});
}

TEST_CASE("thread graphs")
{
	auto mp = support::corpus("mp.litmus");
	ValueDomain dom{{0, 1}, {0, 1}};
	auto r1 = thread_graphs(mp.program, 1, dom, Bounds{});
	CHECK(r1.runs.size() == 4);
	auto r0 = thread_graphs(mp.program, 0, dom, Bounds{});
	CHECK(r0.runs.size() == 1);

	auto cas = support::corpus("cas.litmus");
	auto eb = effective_bounds(cas.program, {});
	bool trunc = false;
	auto cdom = read_domain(cas.program, eb, &trunc);
	auto runs = thread_graphs(cas.program, 0, cdom, eb).runs;
	std::set<std::size_t> sizes;
	for (auto &r : runs)
		sizes.insert(r.g.lab.size());
	CHECK(sizes == std::set<std::size_t>{3, 4}); // failed cas without a write, successful cas with one
}

TEST_CASE("unroll bound discards long runs")
{
	auto t = parse_litmus("prog \"loop\"\nlocations x\nthread 0:\n  r[rlx] a x\n  if a == 0 goto 0\n");
	Bounds b;
	b.unroll = 2;
	auto g = thread_graphs(t.program, 0, ValueDomain{{0, 1}}, b);
	CHECK(g.truncated);
	CHECK(g.runs.size() == 3); // exits after 1, 2 or 3 reads
}

TEST_CASE("candidates")
{
	auto mp = support::corpus("mp.litmus");
	std::size_t forced = 0;
	for_each_candidate(mp.program, effective_bounds(mp.program, {}), [&](const Candidate &c) {
		const auto &g = c.g;
		CHECK(wellformed(g).empty());
		if (g.lab[ev(g, 1, 0)].val == 1 && g.lab[ev(g, 1, 1)].val == 0) {
			++forced;
			CHECK(support::rf_from(g, {0, 1}, {1, 0}));
			CHECK(g.rf.contains(g.init().members()[0], ev(g, 1, 1)));
		}
		return true;
	});
	CHECK(forced == 1);

	auto one = parse_litmus("prog \"1\"\nlocations x\nthread 0:\n  w[rlx] x 1\nthread 1:\n  r[rlx] a x\n");
	std::size_t reads_one = 0;
	for_each_candidate(one.program, {}, [&](const Candidate &c) {
		reads_one += c.g.lab[ev(c.g, 1, 0)].val == 1;
		return true;
	});
	CHECK(reads_one == 1);

	auto three = parse_litmus(
		"prog \"3\"\nlocations x\nthread 0:\n  w[rlx] x 1\nthread 1:\n  w[rlx] x 1\nthread 2:\n  w[rlx] x 1\n");
	std::size_t n = 0;
	auto st = for_each_candidate(three.program, {}, [&](const Candidate &c) {
		++n;
		CHECK(c.g.co.succ(c.g.init().members()[0]).size() == 3);
		return true;
	});
	CHECK(n == 6);
	CHECK(st.candidates == 6);
}

TEST_CASE("outcomes under IMM")
{
	auto mp = support::corpus("mp.litmus");
	auto r = outcomes(mp.program, Model::imm, {});
	CHECK(r.mem.count({1, 1}));
	CHECK_FALSE(reachable(r, *mp.assertion));
	auto single = parse_litmus("prog \"w\"\nlocations x\nthread 0:\n  w[rlx] x 1\n");
	CHECK(outcomes(single.program, Model::imm, {}).mem == std::set<std::vector<Val>>{{1}});
}

TEST_CASE("parallel enumeration matches sequential")
{
	auto t = support::corpus("iriw_ra.litmus");
	Bounds b1, b4;
	b4.jobs = 4;
	auto a = outcomes(t.program, Model::imm, b1), c = outcomes(t.program, Model::imm, b4);
	CHECK(a.mem == c.mem);
	CHECK(a.finals == c.finals);
	CHECK(a.candidates == c.candidates);
	CHECK(a.consistent == c.consistent);
}
