#include <doctest.h>

#include <fstream>

#include "immlab/hwmodels.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace immlab;
using support::ev;

namespace {

Execution only_graph(const std::string &src)
{
	auto t = parse_litmus(src);
	auto g = support::find_graph(t.program, [](const Execution &) { return true; });
	REQUIRE(g);
	return *g;
}

std::optional<std::size_t> inserted(const HwExecution &hw, int tid, int whole)
{
	for (std::size_t i = 0; i < hw.size(); ++i)
		if (hw.g.ev[i].tid == tid && hw.g.ev[i].whole == whole && hw.g.ev[i].half == 1)
			return i;
	return std::nullopt;
}

// strong RMW example with a=1, b=1, c=0
Execution strong_rmw_graph(const std::string &file)
{
	auto t = support::corpus(file);
	auto g = support::find_graph(t.program, [](const Execution &g) {
		return g.lab[ev(g, 0, 0)].val == 1 && g.lab[ev(g, 1, 0)].val == 1 && g.lab[ev(g, 1, 1)].val == 0;
	});
	REQUIRE(g);
	return *g;
}

} // namespace

TEST_CASE("split_release")
{
	auto g = only_graph("prog \"r\"\nlocations x\nthread 0:\n  w[rel] x 1\n");
	auto s = split_release(g);
	CHECK(s.size() == g.size() + 1);
	CHECK(s.fences_exactly(Mode::rel).size() == 1);
	CHECK(s.writes_at_least(Mode::rel).empty());
	auto r = only_graph("prog \"r\"\nlocations x\nthread 0:\n  w[rlx] x 1\n");
	CHECK(dump_text(split_release(r)) == dump_text(r));

	// release rmw: the fence goes before the exclusive read and IMM still forbids the outcome
	auto t = support::corpus("release_seq_rmw.litmus");
	for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
		auto sp = split_release(c.g);
		if (check_imm(sp).consistent)
			CHECK(check_imm(c.g).consistent);
		return true;
	});
	auto split = support::corpus("release_seq_rmw_split.litmus");
	CHECK_FALSE(reachable(outcomes(split.program, Model::imm, {}), *split.assertion));
}

TEST_CASE("to_power inserts isync after acquire reads")
{
	auto g = only_graph("prog \"a\"\nlocations x y\nthread 0:\n  r[acq] a x\n  w[rlx] y 1\n");
	auto hw = to_power(g);
	auto f = inserted(hw, 0, 0);
	REQUIRE(f);
	CHECK(hw.mode[*f] == HwMode::isync);
	auto r = 0u, w = 0u;
	for (std::size_t i = 0; i < hw.size(); ++i) {
		if (hw.g.ev[i].tid == 0 && hw.g.ev[i].whole == 0 && hw.g.ev[i].half == 0)
			r = static_cast<unsigned>(i);
		if (hw.g.ev[i].tid == 0 && hw.g.ev[i].whole == 1)
			w = static_cast<unsigned>(i);
	}
	CHECK(hw.g.ctrl.contains(r, w));
	CHECK(correspondence_check(g, hw).empty());

	auto plain = only_graph("prog \"p\"\nlocations x\nthread 0:\n  r[rlx] a x\n  w[rlx] x 1\n");
	CHECK(to_power(plain).size() == plain.size());
	CHECK_THROWS_AS(to_power(only_graph("prog \"r\"\nlocations x\nthread 0:\n  w[rel] x 1\n")), ReleaseWritesPresent);
}

TEST_CASE("casdep becomes ctrl on POWER")
{
	auto t = support::corpus("cas.litmus");
	bool seen = false;
	for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
		if (c.g.casdep.empty())
			return true;
		auto hw = to_power(split_release(c.g));
		for (auto [r, rx] : c.g.casdep.pairs()) {
			(void)rx;
			for (auto [a, b] : hw.g.ctrl.pairs())
				seen = seen || (hw.src_of[a] == r && hw.g.lab[b].kind == Kind::W);
		}
		return !seen;
	});
	CHECK(seen);
}

TEST_CASE("SC-fence fixture is POWER-consistent")
{
	std::ifstream in(support::fixture("sc_fence_cycle.json"));
	auto g = execution_from_json(nlohmann::json::parse(in));
	auto hw = to_power(split_release(g));
	CHECK(hw.mode[ev(hw.g, 0, 1)] == HwMode::sync);
	CHECK(check_power(hw).consistent);
	CHECK(is_acyclic(g.po() | g.rf));
}

TEST_CASE("sc-per-loc violation")
{
	auto t = parse_litmus("prog \"c\"\nlocations x\nthread 0:\n  w[rlx] x 1\n  r[rlx] a x\n");
	auto g = support::find_graph(t.program, [](const Execution &g) { return g.lab[ev(g, 0, 1)].val == 0; });
	REQUIRE(g);
	CHECK(check_power(to_power(*g)).violates("sc-per-loc"));
	CHECK(check_arm(to_arm(*g)).violates("sc-per-loc"));
}

TEST_CASE("ARM: strong RMW gets a dmb.ld")
{
	auto g = strong_rmw_graph("strong_rmw.litmus");
	CHECK_FALSE(check_imm(g).consistent);
	auto hw = to_arm(g);
	auto f = inserted(hw, 1, 2);
	REQUIRE(f);
	CHECK(hw.mode[*f] == HwMode::ld);
	CHECK_FALSE(check_arm(hw).consistent);

	auto n = strong_rmw_graph("strong_rmw_normal.litmus");
	auto hn = to_arm(n);
	CHECK_FALSE(inserted(hn, 1, 2));
	CHECK(check_arm(hn).consistent);
	CHECK(to_arm(only_graph("prog \"w\"\nlocations x\nthread 0:\n  w[rlx] x 1\n")).size() == 2);
	CHECK(check_arm(to_arm(only_graph("prog \"w\"\nlocations x\nthread 0:\n  w[rlx] x 1\n"))).consistent);
}

TEST_CASE("rfi-not-preserved is ARM-consistent")
{
	auto t = support::corpus("rfi_not_preserved.litmus");
	CHECK(reachable(outcomes(t.program, Model::arm, {}), *t.assertion));
}

TEST_CASE("ii/ic/ci/cc fixpoint equals naive saturation")
{
	std::mt19937_64 rng(5);
	for (int k = 0; k < 100; ++k) {
		std::size_t n = 5 + k % 6;
		auto b = oracle::random_power_base(rng, n);
		std::bernoulli_distribution coin(0.5);
		EventSet R(n), W(n);
		for (std::size_t i = 0; i < n; ++i)
			(coin(rng) ? R : W).insert(i);
		for (bool armv7 : {false, true}) {
			auto got = power_ppo(b, R, W, armv7);
			auto want = oracle::power_saturate(b, armv7);
			CHECK(oracle::of(got.ii) == want.ii);
			CHECK(oracle::of(got.ic) == want.ic);
			CHECK(oracle::of(got.ci) == want.ci);
			CHECK(oracle::of(got.cc) == want.cc);
			CHECK(got.ci.subset_of(got.ii));
			CHECK(got.ii.subset_of(got.ic));
			CHECK(got.ci.subset_of(got.cc));
		}
	}
	// 5-event chain
	PowerBase c;
	for (auto *r : {&c.addr, &c.data, &c.rdw, &c.rfi, &c.ctrl_isync, &c.detour, &c.ctrl, &c.addr_po, &c.po_loc})
		*r = Rel(5);
	c.addr.insert(0, 1);
	c.ctrl_isync.insert(1, 2);
	c.data.insert(2, 3);
	c.po_loc.insert(3, 4);
	auto got = power_ppo(c, EventSet::full(5), EventSet(5));
	auto want = oracle::power_saturate(c);
	CHECK(oracle::of(got.ii) == want.ii);
	CHECK(got.ii.contains(0, 3));
}

TEST_CASE("mappings on small programs")
{
	for (auto file : {"mp.litmus", "lb_addr.litmus"})
		for (auto a : {Arch::power, Arch::arm}) {
			auto t = support::corpus(file);
			auto r = empirical_mapping_theorem(t.program, a, effective_bounds(t.program, {}));
			CHECK(r.candidates > 0);
			CHECK(r.counterexamples.empty());
		}
}
