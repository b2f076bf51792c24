#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "immlab/cli.hpp"
#include "support.hpp"

using namespace immlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name)
{
	auto d = fs::temp_directory_path() / ("immlab-test-" + name);
	fs::remove_all(d);
	fs::create_directories(d);
	return d;
}

} // namespace

TEST_CASE("run: empty corpus")
{
	auto d = scratch("empty");
	auto r = cmd_run({d.string()}, {}, {});
	CHECK(r.tests.empty());
	CHECK(r.expectations == 0);
	CHECK(r.exit_code() == 0);
}

TEST_CASE("run: the corpus meets its expectations")
{
	auto r = cmd_run({IMMLAB_CORPUS_DIR}, {}, {});
	CHECK(r.tests.size() >= 10);
	CHECK(r.expectations >= 30);
	CHECK(r.diffs.empty());
	CHECK(r.exit_code() == 0);
}

TEST_CASE("run: a flipped expectation is reported")
{
	auto d = scratch("flip");
	std::ifstream in(std::string(IMMLAB_CORPUS_DIR) + "/mp.litmus");
	std::string text((std::istreambuf_iterator<char>(in)), {});
	auto at = text.find("imm=forbidden");
	REQUIRE(at != std::string::npos);
	text.replace(at, 13, "imm=allowed");
	std::ofstream(d / "mp.litmus") << text;

	auto r = cmd_run({d.string()}, {Model::imm}, {});
	CHECK(r.exit_code() == 1);
	REQUIRE(r.diffs.size() == 1);
	CHECK(r.diffs[0].find("imm: expected allowed, got forbidden") != std::string::npos);
	CHECK(render(r).find("MISMATCH") != std::string::npos);
	CHECK(to_json(r)["ok"] == false);
}

TEST_CASE("run: parse failure")
{
	auto d = scratch("bad");
	std::ofstream(d / "bad.litmus") << "prog \"bad\"\nthread 0:\n  frobnicate\n";
	auto r = cmd_run({d.string()}, {}, {});
	REQUIRE(r.tests.size() == 1);
	CHECK(r.tests[0].error);
	CHECK(r.exit_code() == 2);
}

TEST_CASE("run: JSON and table agree, and both are reproducible")
{
	CliOptions opt;
	opt.bounds.jobs = 3;
	auto a = cmd_run({IMMLAB_CORPUS_DIR}, {}, opt);
	opt.bounds.jobs = 1;
	auto b = cmd_run({IMMLAB_CORPUS_DIR}, {}, opt);
	CHECK(to_json(a).dump() == to_json(b).dump());
	CHECK(render(a) == render(b));

	auto j = to_json(a);
	CHECK(j["schema"] == 1);
	auto table = render(a);
	for (auto &t : j["tests"])
		for (auto &m : t["models"]) {
			std::string row = t["name"].get<std::string>();
			CHECK(table.find(row) != std::string::npos);
			CHECK(m["verdict"] == m["expected"]);
		}
}

TEST_CASE("compare: model inclusions")
{
	for (auto file : {"iriw_sc.litmus", "lb_data.litmus", "detour.litmus"}) {
		auto t = support::corpus(file);
		auto ab = cmd_compare(t, Model::imm, Model::imms, {});
		CHECK(ab.graphs_included());
		CHECK(ab.outcomes_included());
		auto rc = cmd_compare(t, Model::rc11, Model::c11, {});
		CHECK(rc.graphs_included());
		auto hw = cmd_compare(t, Model::power, Model::imm, {});
		CHECK(hw.graphs_included());
	}
	// LB-data separates IMM from RC11 in one direction only
	auto t = support::corpus("lb_data.litmus");
	auto r = cmd_compare(t, Model::imm, Model::rc11, {});
	CHECK_FALSE(r.graphs_included());
	CHECK(cmd_compare(t, Model::rc11, Model::imm, {}).graphs_included());
	CHECK(render(r, t.program.locations).find("imm only") != std::string::npos);
	CHECK(to_json(r, t.program.locations)["graphs_included"] == false);
}

TEST_CASE("collect_candidates is independent of jobs")
{
	auto t = support::corpus("iriw_ra.litmus");
	Bounds b;
	auto one = collect_candidates(t.program, b);
	b.jobs = 4;
	auto four = collect_candidates(t.program, b);
	REQUIRE(one.size() == four.size());
	for (std::size_t i = 0; i < one.size(); ++i)
		CHECK(to_json(one[i].g) == to_json(four[i].g));
}

TEST_CASE("fuzz: reproducible, no violations")
{
	FuzzOptions fo;
	fo.seed = 11;
	auto a = cmd_fuzz(fo, 15, {});
	CliOptions opt;
	opt.bounds.jobs = 2;
	auto b = cmd_fuzz(fo, 15, opt);
	CHECK(to_json(a) == to_json(b));
	CHECK(a.violations == 0);
	CHECK(a.candidates > 0);
}
