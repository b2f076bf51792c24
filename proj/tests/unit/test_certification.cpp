#include <doctest.h>

#include <filesystem>

#include "immlab/certification.hpp"
#include "support.hpp"

using namespace immlab;
using support::ev;
using support::with_init;

namespace {

const char *kCertProg = R"(prog "cert"
locations x y z
vals 0..3
thread 0:
  r[rlx] a x
  w[rlx] y a
  w[rlx] x 2
thread 1:
  w[rlx] x 1
  r[rlx] b y
  r[rlx] c x
  w[rlx] z b
  w[rlx] x 3
)";

struct Fixture {
	LitmusTest t = parse_litmus(kCertProg);
	Execution g;
	TraversalConfig tc;

	Fixture()
	{
		auto found = support::find_graph(t.program, [](const Execution &g) {
			return support::rf_from(g, {1, 0}, {0, 0}) && support::rf_from(g, {0, 1}, {1, 1}) &&
			       support::rf_from(g, {0, 2}, {1, 2}) && check_imm(g).consistent;
		});
		REQUIRE(found);
		g = *found;
		tc = {with_init(g, {{1, 0}}), with_init(g, {{1, 0}, {0, 1}, {1, 3}})};
	}
};

std::size_t orig_to_cert(const CertGraph &cg, std::size_t e)
{
	for (std::size_t i = 0; i < cg.to_orig.size(); ++i)
		if (cg.to_orig[i] == e)
			return i;
	FAIL("event not in the certification graph");
	return 0;
}

} // namespace

TEST_CASE("relaxed certification graph of the worked example")
{
	Fixture f;
	const auto &g = f.g;
	Traversal tr(g, Fragment::relaxed);
	REQUIRE(tr.check_config(f.tc).empty());
	CHECK(threads_to_certify(g, f.tc) == std::vector<int>{0, 1});

	auto det = determined(g, f.tc);
	CHECK(det.contains(ev(g, 1, 1)));
	CHECK_FALSE(det.contains(ev(g, 1, 2)));

	auto cg = build_cert_graph(f.t.program, g, f.tc, 1, Fragment::relaxed);
	CHECK(cg.E == with_init(g, {{0, 1}, {1, 0}, {1, 1}, {1, 2}, {1, 3}}));
	CHECK(cg.D.contains(ev(g, 1, 1)));
	CHECK_FALSE(cg.D.contains(ev(g, 1, 2)));

	const auto &h = cg.g;
	auto e21 = orig_to_cert(cg, ev(g, 1, 0)), e22 = orig_to_cert(cg, ev(g, 1, 1)),
	     e23 = orig_to_cert(cg, ev(g, 1, 2)), e24 = orig_to_cert(cg, ev(g, 1, 3)),
	     e12 = orig_to_cert(cg, ev(g, 0, 1));
	CHECK(h.rf.contains(e21, e23));
	CHECK(h.lab[e23].val == 1);
	CHECK(h.rf.contains(e12, e22));
	CHECK(h.lab[e24].val == 1);
	CHECK(check_cert_compl(f.t.program, g, f.tc, cg).empty());
	CHECK(check_imm(h).consistent);
	CHECK(cg.tc.C.contains(e12));

	Traversal tc(h, Fragment::relaxed);
	auto run = traverse_to_completion(tc, cg.tc);
	for (auto &s : run.steps)
		CHECK(s.tid(h) == 1);
}

TEST_CASE("relaxed and full constructions agree on E, D and bvf for relaxed graphs")
{
	Fixture f;
	for (int tid : threads_to_certify(f.g, f.tc)) {
		auto E = cert_events(f.g, f.tc, tid, Fragment::relaxed);
		CHECK(E == cert_events(f.g, f.tc, tid, Fragment::full));
		auto D = cert_determined(f.g, f.tc, tid, E, Fragment::relaxed);
		CHECK(D == cert_determined(f.g, f.tc, tid, E, Fragment::full));
		CHECK(cert_bvf(f.g, D, Fragment::relaxed) == cert_bvf(f.g, D, Fragment::full));
	}
}

TEST_CASE("full co puts non-issued writes of the thread after the issued ones")
{
	auto t = parse_litmus("prog \"co\"\nlocations x\nvals 0..3\nthread 0:\n  w[rlx] x 2\nthread 1:\n  w[rlx] x 1\n"
			      "  w[rlx] x 3\n");
	auto g = support::find_graph(t.program, [](const Execution &g) {
		return g.co.contains(ev(g, 1, 0), ev(g, 0, 0)) && g.co.contains(ev(g, 0, 0), ev(g, 1, 1));
	});
	REQUIRE(g);
	TraversalConfig tc{g->init(), with_init(*g, {{0, 0}, {1, 1}})};
	REQUIRE(Traversal(*g).check_config(tc).empty());
	auto E = cert_events(*g, tc, 1, Fragment::full);
	auto co = cert_co(*g, tc, 1, E, Fragment::full);
	auto e11 = ev(*g, 0, 0), e21 = ev(*g, 1, 0), e22 = ev(*g, 1, 1);
	CHECK(co.contains(e11, e21));
	CHECK(co.contains(e21, e22));
	CHECK_FALSE(co.contains(e21, e11));
	CHECK(cert_co(*g, tc, 1, E, Fragment::relaxed).contains(e21, e11));
	auto cg = build_cert_graph(t.program, *g, tc, 1, Fragment::full);
	CHECK(check_cert_compl(t.program, *g, tc, cg).empty());
}

TEST_CASE("certification along every corpus traversal")
{
	std::size_t built = 0;
	for (auto &file : std::filesystem::directory_iterator(IMMLAB_CORPUS_DIR)) {
		auto t = load_litmus(file.path().string());
		for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
			if (!check_imms(c.g).consistent)
				return true;
			auto g = attach_sc_witness(c.g);
			Traversal tr(g);
			for (auto &tc : traverse_to_completion(tr).configs)
				for (int tid : threads_to_certify(g, tc)) {
					CAPTURE(t.name);
					auto cg = build_cert_graph(t.program, g, tc, tid);
					++built;
					CHECK(check_cert_compl(t.program, g, tc, cg).empty());
					CHECK(check_imms(cg.g).consistent);
					Traversal ct(cg.g);
					auto run = traverse_to_completion(ct, cg.tc);
					for (auto &s : run.steps)
						CHECK(s.tid(cg.g) == tid);
				}
			return true;
		});
	}
	CHECK(built > 100);
}

TEST_CASE("issued strong write whose rmw read is left out of E_crt")
{
	// thread 0's fadd can read x from init, which is po-before it, so the read counts as rfi from a
	// non-rmw write and stays out of E_crt while the strong write is issued
	auto t = parse_litmus(R"(prog "orphan strong"
locations x y
vals 0..2
thread 0:
  r[acq] r0 y
  fadd[acq,rlx,strong] r1 x 1
thread 1:
  f[acq]
  r[rlx] r2 x
  w[rlx] y 2
  w[rlx] x 2
thread 2:
  f[sc]
  fadd[acq,rlx,strong] r3 y 1
  r[rlx] r4 y
  f[sc]
)");
	std::size_t orphans = 0;
	for_each_candidate(t.program, effective_bounds(t.program, {}), [&](const Candidate &c) {
		if (!check_imms(c.g).consistent)
			return true;
		auto g = attach_sc_witness(c.g);
		for (auto &tc : traverse_to_completion(Traversal(g)).configs)
			for (int tid : threads_to_certify(g, tc)) {
				auto cg = build_cert_graph(t.program, g, tc, tid);
				orphans += !(cg.g.strong_writes() - codom(cg.g.rmw)).empty();
				CHECK(check_cert_compl(t.program, g, tc, cg).empty());
			}
		return true;
	});
	CHECK(orphans > 0);
}
