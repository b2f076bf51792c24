#include <doctest.h>

#include <filesystem>

#include "immlab/promiserlx.hpp"
#include "support.hpp"

using namespace immlab;
using support::ev;

namespace {

Execution lb_data_11(const Program &p)
{
	auto g = support::find_graph(p, [](const Execution &g) {
		return g.lab[ev(g, 0, 0)].val == 1 && g.lab[ev(g, 1, 0)].val == 1;
	});
	REQUIRE(g);
	return *g;
}

} // namespace

TEST_CASE("initial machine")
{
	auto t = support::corpus("lb_data.litmus");
	auto ms = initial_machine(t.program);
	CHECK(ms.M.size() == 2);
	CHECK(ms.TS.size() == 2);
	CHECK(machine_outcome(ms) == std::vector<Val>{0, 0});
	CHECK(relaxed_program(t.program));
	CHECK_FALSE(relaxed_program(support::corpus("mp.litmus").program));
}

TEST_CASE("promises and certification in the load-buffering example")
{
	auto t = support::corpus("lb_data.litmus");
	const auto &p = t.program;
	const int x = 0, y = 1;
	{
		auto ms = initial_machine(p);
		promise_step(ms.TS[0], ms.M, {y, 1, 1});
		CHECK(ms.TS[0].P.size() == 1);
		CHECK(certify(ms.TS[0], p, ms.M).certified);
	}
	{
		auto ms = initial_machine(p);
		promise_step(ms.TS[1], ms.M, {x, 1, 1});
		auto r = certify(ms.TS[1], p, ms.M);
		CHECK_FALSE(r.certified);
		CHECK_FALSE(r.inconclusive);
	}
	{
		auto ms = initial_machine(p);
		CHECK(certify(ms.TS[0], p, ms.M).certified); // nothing promised
	}
}

TEST_CASE("thread steps")
{
	auto t = parse_litmus("prog \"s\"\nlocations x\nthread 0:\n  r[rlx] a x\n  w[rlx] x 1\n  r[rlx] b x\n");
	const auto &p = t.program;
	auto ms = initial_machine(p);
	auto &ts = ms.TS[0];
	read_step(ts, p, ms.M, 0);
	CHECK(ts.V[0] == Timestamp(0));
	CHECK_THROWS_AS(write_step(ts, p, ms.M, 0), PromiseError);
	write_step(ts, p, ms.M, 2);
	CHECK(ts.V[0] == Timestamp(2));
	CHECK(ms.M.count({0, 1, 2}));
	CHECK_THROWS_AS(read_step(ts, p, ms.M, 0), PromiseError); // stale
	read_step(ts, p, ms.M, 2);
	CHECK(ts.sigma.terminal());

	auto ms2 = initial_machine(p);
	promise_step(ms2.TS[0], ms2.M, {0, 1, 3});
	CHECK_THROWS_AS(promise_step(ms2.TS[0], ms2.M, {0, 2, 3}), PromiseError); // occupied
	read_step(ms2.TS[0], p, ms2.M, 0);
	write_step(ms2.TS[0], p, ms2.M, 3); // fulfils
	CHECK(ms2.TS[0].P.empty());
	CHECK(ms2.M.size() == 2);
}

TEST_CASE("timestamps are co ranks")
{
	auto t = parse_litmus("prog \"w\"\nlocations x\nthread 0:\n  w[rlx] x 1\n  w[rlx] x 2\n");
	auto g = support::find_graph(t.program, [](const Execution &) { return true; });
	REQUIRE(g);
	auto T = timestamp_map(*g);
	CHECK(T[g->init().members()[0]] == 0);
	CHECK(T[ev(*g, 0, 0)] == 1);
	CHECK(T[ev(*g, 0, 1)] == 2);
	auto run = traverse_to_completion(Traversal(*g, Fragment::relaxed));
	auto sim = simulate_traversal(t.program, *g, run.steps);
	CHECK(sim.outcome == std::vector<Val>{2});
	std::size_t promises = 0;
	for (auto &e : sim.trace)
		promises += e.action.rfind("promise", 0) == 0;
	CHECK(promises == 2);
}

TEST_CASE("simulating the load-buffering traversal")
{
	auto t = support::corpus("lb_data.litmus");
	auto g = lb_data_11(t.program);
	auto run = traverse_to_completion(Traversal(g, Fragment::relaxed));
	auto sim = simulate_traversal(t.program, g, run.steps);
	REQUIRE(sim.trace.size() == 6);
	CHECK(sim.trace[0].action == "promise y:1@1");
	CHECK(sim.trace[1].action == "read y:1@1");
	CHECK(sim.trace[2].action == "promise x:1@1");
	CHECK(sim.outcome == std::vector<Val>{1, 1});
	CHECK(sim.inconclusive == 0);
	for (int tid = 0; tid < 2; ++tid)
		CHECK(sim.final.TS[tid].sigma.terminal());
}

TEST_CASE("simulation conditions detect a broken state")
{
	auto t = support::corpus("lb_data.litmus");
	auto g = lb_data_11(t.program);
	auto T = timestamp_map(g);
	auto ms = initial_machine(t.program);
	auto tc = initial_config(g);
	CHECK(check_simulation(g, tc, ms, 0, T).empty());
	auto bad = ms;
	bad.TS[0].V[0] = 1;
	CHECK(check_simulation(g, tc, bad, 0, T) == std::vector<std::string>{"(6) view"});
	auto extra = ms;
	extra.M.insert({0, 5, 7});
	auto d = check_simulation(g, tc, extra, 0, T);
	CHECK(std::find(d.begin(), d.end(), "(2) messages have issued counterparts") != d.end());
	TraversalConfig issued{tc.C, tc.I | EventSet::of(g.size(), {ev(g, 0, 1)})};
	d = check_simulation(g, issued, ms, 0, T);
	CHECK(std::find(d.begin(), d.end(), "(3) issued writes are in memory") != d.end());
	CHECK(std::find(d.begin(), d.end(), "(5) issued uncovered writes are promised") != d.end());
}

TEST_CASE("non-relaxed programs are rejected")
{
	auto t = support::corpus("mp.litmus");
	auto g = support::find_graph(t.program, [](const Execution &g) { return check_imm(g).consistent; });
	REQUIRE(g);
	CHECK_THROWS_AS(simulate_traversal(t.program, *g, {}), UnsupportedFragment);
}

TEST_CASE("every relaxed corpus program: IMM outcomes equal simulated outcomes")
{
	std::size_t programs = 0;
	for (auto &f : std::filesystem::directory_iterator(IMMLAB_CORPUS_DIR)) {
		auto t = load_litmus(f.path().string());
		if (!relaxed_program(t.program))
			continue;
		++programs;
		std::set<std::vector<Val>> imm, sim;
		for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
			if (!check_imm(c.g).consistent)
				return true;
			imm.insert(outcome(c.g));
			auto run = traverse_to_completion(Traversal(c.g, Fragment::relaxed));
			auto s = simulate_traversal(t.program, c.g, run.steps);
			CHECK(s.outcome == outcome(c.g));
			CHECK(s.inconclusive == 0);
			sim.insert(s.outcome);
			return true;
		});
		CHECK(imm == sim);
	}
	CHECK(programs >= 2);
}
