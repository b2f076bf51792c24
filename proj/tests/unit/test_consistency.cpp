#include <doctest.h>

#include <filesystem>

#include "immlab/consistency.hpp"
#include "support.hpp"

using namespace immlab;
using support::ev;

TEST_CASE("corpus expectations for every model")
{
	std::size_t checked = 0;
	for (auto &f : std::filesystem::directory_iterator(IMMLAB_CORPUS_DIR)) {
		auto t = load_litmus(f.path().string());
		REQUIRE(t.assertion);
		for (auto [name, allowed] : t.expect) {
			auto m = parse_model(name);
			REQUIRE(m);
			auto r = outcomes(t.program, *m, {});
			CAPTURE(t.name);
			CAPTURE(name);
			CHECK(reachable(r, *t.assertion) == allowed);
			++checked;
		}
	}
	CHECK(checked >= 30);
}

TEST_CASE("model inclusions on the corpus")
{
	for (auto &f : std::filesystem::directory_iterator(IMMLAB_CORPUS_DIR)) {
		auto t = load_litmus(f.path().string());
		for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
			bool imm = check_imm(c.g).consistent;
			if (imm) {
				CHECK(check_imms(c.g).consistent);
				CHECK(check_c11(c.g).consistent);
			}
			if (check_rc11(c.g).consistent)
				CHECK(check_c11(c.g).consistent);
			return true;
		});
	}
}

TEST_CASE("IMM_S witness")
{
	auto t = support::corpus("iriw_sc.litmus");
	std::size_t with_fences = 0;
	for_each_candidate(t.program, {}, [&](const Candidate &c) {
		auto sc = imms_sc_order(c.g);
		if (!sc)
			return true;
		++with_fences;
		auto f = c.g.fences_exactly(Mode::sc);
		CHECK(is_total_on(*sc, f));
		CHECK(restrict(*sc, f, f) == *sc);
		auto g = c.g;
		g.sc = *sc;
		CHECK(check_imms(g).consistent);
		return true;
	});
	CHECK(with_fences > 0);
}

TEST_CASE("violations name the axiom")
{
	auto t = support::corpus("mp.litmus");
	auto g = support::find_graph(t.program, [](const Execution &g) {
		return g.lab[ev(g, 1, 0)].val == 1 && g.lab[ev(g, 1, 1)].val == 0;
	});
	REQUIRE(g);
	auto v = check_imm(*g);
	CHECK_FALSE(v.consistent);
	CHECK(v.violates("coherence"));
	CHECK(check_c11(*g).violates("coherence"));

	auto lb = support::corpus("lb_data.litmus");
	auto h = support::find_graph(lb.program, [](const Execution &g) {
		return g.lab[ev(g, 0, 0)].val == 1 && g.lab[ev(g, 1, 0)].val == 1;
	});
	REQUIRE(h);
	CHECK(check_imm(*h).consistent);
	CHECK_FALSE(check_rc11(*h).consistent);
}
