// immlab: command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "immlab/certification.hpp"
#include "immlab/cli.hpp"
#include "immlab/promiserlx.hpp"
#include "immlab/traversal.hpp"

using namespace immlab;
using nlohmann::json;

namespace {

struct Globals {
	Val max_val = 1;
	int unroll = 8;
	int jobs = 1;
	bool json = false;
	std::string dump_dir;
	bool power_at_axiom = false;
	bool armv7 = false;

	CliOptions cli() const
	{
		CliOptions o;
		o.bounds.max_val = max_val;
		o.bounds.unroll = unroll;
		o.bounds.jobs = jobs;
		o.model.power.at_axiom = power_at_axiom;
		o.model.power.armv7 = armv7;
		return o;
	}
};

struct UsageError : std::runtime_error {
	using std::runtime_error::runtime_error;
};

std::string set_names(const Execution &g, const EventSet &s)
{
	std::string out;
	s.for_each([&](std::size_t e) { out += (out.empty() ? "" : " ") + event_name(g.ev[e]); });
	return out;
}

json set_json(const Execution &g, const EventSet &s)
{
	auto j = json::array();
	s.for_each([&](std::size_t e) { j.push_back(event_name(g.ev[e])); });
	return j;
}

std::string witness(const Execution &g, const Violation &v)
{
	std::string out;
	for (auto [a, b] : v.witness)
		out += (out.empty() ? "" : ", ") + event_name(g.ev[a]) + "->" + event_name(g.ev[b]);
	return out;
}

json regs_json(const Program &p, const std::vector<std::vector<Val>> &regs)
{
	json j = json::object();
	for (std::size_t t = 0; t < regs.size(); ++t)
		for (std::size_t r = 0; r < regs[t].size() && r < p.threads[t].regs.size(); ++r)
			j[std::to_string(t) + ":" + p.threads[t].regs[r]] = regs[t][r];
	return j;
}

std::string regs_text(const Program &p, const std::vector<std::vector<Val>> &regs)
{
	std::string out;
	for (std::size_t t = 0; t < regs.size(); ++t)
		for (std::size_t r = 0; r < regs[t].size() && r < p.threads[t].regs.size(); ++r)
			out += (out.empty() ? "" : " ") + std::to_string(t) + ":" + p.threads[t].regs[r] + "=" +
			       std::to_string(regs[t][r]);
	return out;
}

std::string stem(const std::string &file) { return std::filesystem::path(file).stem().string(); }

void dump(const Globals &gl, const std::string &name, const json &j)
{
	if (gl.dump_dir.empty())
		return;
	std::filesystem::create_directories(gl.dump_dir);
	std::ofstream(std::filesystem::path(gl.dump_dir) / (name + ".json")) << j.dump(2) << '\n';
}

json hw_json(const HwExecution &hw)
{
	auto j = to_json(hw.g);
	auto modes = json::array();
	for (auto m : hw.mode)
		modes.push_back(to_string(m));
	j["hw_modes"] = modes;
	return j;
}

Model model_arg(const std::string &s)
{
	auto m = parse_model(s);
	if (!m)
		throw UsageError("unknown model '" + s + "'");
	return *m;
}

struct Loaded {
	LitmusTest t;
	std::vector<Candidate> cands;
	bool truncated = false;
};

Loaded load(const std::string &file, const Globals &gl)
{
	Loaded l;
	l.t = load_litmus(file);
	l.cands = collect_candidates(l.t.program, effective_bounds(l.t.program, gl.cli().bounds), &l.truncated);
	return l;
}

const Candidate &pick(const Loaded &l, int index)
{
	if (index < 0 || static_cast<std::size_t>(index) >= l.cands.size())
		throw UsageError("graph index " + std::to_string(index) + " out of range (" +
				 std::to_string(l.cands.size()) + " candidates)");
	return l.cands[static_cast<std::size_t>(index)];
}

void emit(const Globals &gl, const json &j, const std::string &text)
{
	if (gl.json)
		std::cout << j.dump(2) << '\n';
	else
		std::cout << text;
}

// ---- subcommands ---------------------------------------------------------------------------------

int cmd_enumerate(const Globals &gl, const std::string &file)
{
	auto l = load(file, gl);
	const auto &p = l.t.program;
	json j{{"schema", 1}, {"command", "enumerate"}, {"name", l.t.name}, {"truncated", l.truncated}};
	j["graphs"] = json::array();
	std::ostringstream os;
	os << l.t.name << ": " << l.cands.size() << " candidates" << (l.truncated ? " (truncated)" : "") << '\n';
	for (std::size_t i = 0; i < l.cands.size(); ++i) {
		const auto &c = l.cands[i];
		json jg{{"index", i}, {"outcome", outcome_json(outcome(c.g), p.locations)}, {"regs", regs_json(p, c.regs)}};
		os << "graph " << i << ": " << format_outcome(outcome(c.g), p.locations) << " | " << regs_text(p, c.regs)
		   << " |";
		for (auto m : all_models()) {
			bool ok = check_model(c.g, m, gl.cli().model).consistent;
			jg["consistent"][to_string(m)] = ok;
			if (ok)
				os << ' ' << to_string(m);
		}
		os << '\n';
		j["graphs"].push_back(jg);
		dump(gl, stem(file) + "-" + std::to_string(i), to_json(c.g));
	}
	emit(gl, j, os.str());
	return 0;
}

int cmd_check(const Globals &gl, const std::string &file, const std::string &model)
{
	auto m = model_arg(model);
	auto l = load(file, gl);
	json j{{"schema", 1}, {"command", "check"}, {"name", l.t.name}, {"model", model}};
	j["graphs"] = json::array();
	std::ostringstream os;
	std::size_t ok = 0;
	for (std::size_t i = 0; i < l.cands.size(); ++i) {
		const auto &g = l.cands[i].g;
		auto v = check_model(g, m, gl.cli().model);
		ok += v.consistent;
		json jg{{"index", i}, {"consistent", v.consistent}, {"outcome", outcome_json(outcome(g), l.t.program.locations)}};
		jg["violations"] = json::array();
		os << "graph " << i << " [" << format_outcome(outcome(g), l.t.program.locations)
		   << "]: " << (v.consistent ? "consistent" : "inconsistent") << '\n';
		// power and arm witnesses index the mapped graph, so they are named by axiom only
		bool hw = m == Model::power || m == Model::arm;
		for (auto &viol : v.violations) {
			json jv{{"axiom", viol.axiom}};
			os << "  " << viol.axiom;
			if (!hw) {
				jv["witness"] = witness(g, viol);
				os << ": " << witness(g, viol);
			}
			os << '\n';
			jg["violations"].push_back(jv);
		}
		if (v.sc_witness) {
			auto sc = json::array();
			for (auto [a, b] : v.sc_witness->pairs())
				sc.push_back({event_name(g.ev[a]), event_name(g.ev[b])});
			jg["sc"] = sc;
		}
		j["graphs"].push_back(jg);
		dump(gl, stem(file) + "-" + std::to_string(i), to_json(g));
	}
	j["consistent"] = ok;
	j["candidates"] = l.cands.size();
	os << ok << " of " << l.cands.size() << " candidates " << model << "-consistent\n";
	emit(gl, j, os.str());
	return 0;
}

int cmd_outcomes(const Globals &gl, const std::string &file, const std::string &model)
{
	auto m = model_arg(model);
	auto t = load_litmus(file);
	auto rep = outcomes(t.program, m, gl.cli().bounds, gl.cli().model);
	json j{{"schema", 1},
	       {"command", "outcomes"},
	       {"name", t.name},
	       {"model", model},
	       {"candidates", rep.candidates},
	       {"consistent", rep.consistent},
	       {"lower_bound", rep.lower_bound}};
	j["outcomes"] = json::array();
	std::ostringstream os;
	os << t.name << " under " << model << ": " << rep.mem.size() << " outcomes from " << rep.consistent << " of "
	   << rep.candidates << " candidates" << (rep.lower_bound ? " (lower bound)" : "") << '\n';
	for (auto &o : rep.mem) {
		j["outcomes"].push_back(outcome_json(o, t.program.locations));
		os << "  " << format_outcome(o, t.program.locations) << '\n';
	}
	j["finals"] = json::array();
	os << "final states (" << rep.finals.size() << "):\n";
	for (auto &f : rep.finals) {
		j["finals"].push_back({{"regs", regs_json(t.program, f.regs)}, {"mem", outcome_json(f.mem, t.program.locations)}});
		os << "  " << regs_text(t.program, f.regs) << " | " << format_outcome(f.mem, t.program.locations) << '\n';
	}
	if (t.assertion) {
		bool reach = reachable(rep, *t.assertion);
		j["assertion"] = reach ? "allowed" : "forbidden";
		os << "assertion: " << (reach ? "allowed" : "forbidden") << '\n';
	}
	emit(gl, j, os.str());
	return 0;
}

int cmd_map(const Globals &gl, const std::string &file, const std::string &target, int index)
{
	if (target != "power" && target != "arm")
		throw UsageError("target must be power or arm");
	auto l = load(file, gl);
	auto opt = gl.cli().model;
	json j{{"schema", 1}, {"command", "map"}, {"name", l.t.name}, {"target", target}};
	j["graphs"] = json::array();
	std::ostringstream os;
	for (std::size_t i = 0; i < l.cands.size(); ++i) {
		if (index >= 0 && static_cast<std::size_t>(index) != i)
			continue;
		const auto &g = l.cands[i].g;
		auto hw = target == "power" ? to_power(split_release(g)) : to_arm(g);
		bool hw_ok = target == "power" ? check_power(hw, opt.power).consistent : check_arm(hw).consistent;
		bool imm = check_imm(g).consistent;
		json jg{{"index", i}, {"consistent", hw_ok}, {"imm", imm}};
		os << "graph " << i << ": " << target << (hw_ok ? " consistent" : " inconsistent") << ", imm "
		   << (imm ? "consistent" : "inconsistent") << '\n';
		if (index >= 0) {
			jg["graph"] = hw_json(hw);
			// dump_text numbers events first; tag those lines with the hardware mode
			std::istringstream lines(dump_text(hw.g));
			std::size_t e = 0;
			for (std::string line; std::getline(lines, line);) {
				os << "  " << line;
				if (e < hw.mode.size() && line.rfind(std::to_string(e) + " ", 0) == 0) {
					if (hw.mode[e] != HwMode::plain)
						os << "  (" << to_string(hw.mode[e]) << ')';
					++e;
				}
				os << '\n';
			}
		}
		j["graphs"].push_back(jg);
		dump(gl, stem(file) + "-" + std::to_string(i) + "-" + target, hw_json(hw));
	}
	emit(gl, j, os.str());
	return 0;
}

int cmd_traverse(const Globals &gl, const std::string &file, int index, bool trace)
{
	auto l = load(file, gl);
	auto run_one = [&](std::size_t i, bool lines) {
		auto g = attach_sc_witness(l.cands[i].g);
		auto run = traverse_to_completion(Traversal(g));
		if (lines)
			for (std::size_t k = 0; k < run.steps.size(); ++k) {
				const auto &s = run.steps[k];
				json j{{"schema", 1},
				       {"graph", i},
				       {"step", k},
				       {"kind", to_string(s.kind)},
				       {"event", event_name(g.ev[s.e])},
				       {"name", step_name(g, s)},
				       {"thread", s.tid(g)}};
				if (trace) {
					j["C"] = set_json(g, run.configs[k + 1].C);
					j["I"] = set_json(g, run.configs[k + 1].I);
				}
				std::cout << j.dump() << '\n';
			}
		std::cout << json{{"schema", 1}, {"graph", i}, {"steps", run.steps.size()}, {"complete", true}}.dump()
			  << '\n';
	};
	if (index >= 0) {
		if (!check_imms(pick(l, index).g).consistent)
			throw UsageError("graph " + std::to_string(index) + " is not IMM_S-consistent");
		run_one(static_cast<std::size_t>(index), true);
		return 0;
	}
	for (std::size_t i = 0; i < l.cands.size(); ++i)
		if (check_imms(l.cands[i].g).consistent)
			run_one(i, trace);
	return 0;
}

int cmd_certify(const Globals &gl, const std::string &file, int index, int step, int tid)
{
	auto l = load(file, gl);
	const auto &c = pick(l, index);
	if (!check_imms(c.g).consistent)
		throw UsageError("graph " + std::to_string(index) + " is not IMM_S-consistent");
	auto g = attach_sc_witness(c.g);
	auto run = traverse_to_completion(Traversal(g));
	if (step < 0 || static_cast<std::size_t>(step) >= run.configs.size())
		throw UsageError("step out of range (0.." + std::to_string(run.configs.size() - 1) + ")");
	if (tid < 0 || tid >= g.nthreads())
		throw UsageError("thread out of range");
	const auto &tc = run.configs[static_cast<std::size_t>(step)];
	auto cg = build_cert_graph(l.t.program, g, tc, tid);
	auto diags = check_cert_compl(l.t.program, g, tc, cg);
	json j{{"schema", 1}, {"command", "certify"}, {"name", l.t.name}, {"graph", index}, {"step", step}, {"thread", tid}};
	j["C"] = set_json(g, tc.C);
	j["I"] = set_json(g, tc.I);
	j["E_crt"] = set_json(g, cg.E);
	j["D"] = set_json(g, cg.D);
	j["cert_graph"] = to_json(cg.g);
	j["diagnostics"] = diags;
	std::ostringstream os;
	os << "config C: " << set_names(g, tc.C) << "\n       I: " << set_names(g, tc.I) << '\n';
	os << "E_crt: " << set_names(g, cg.E) << "\nD: " << set_names(g, cg.D) << '\n';
	os << "certification graph:\n" << dump_text(cg.g);
	if (diags.empty())
		os << "cert-compl: ok\n";
	for (auto &d : diags)
		os << "cert-compl: " << d << '\n';
	dump(gl, stem(file) + "-" + std::to_string(index) + "-cert-" + std::to_string(step) + "-" + std::to_string(tid),
	     to_json(cg.g));
	emit(gl, j, os.str());
	return diags.empty() ? 0 : 1;
}

int cmd_simulate(const Globals &gl, const std::string &file, int index, bool trace)
{
	auto l = load(file, gl);
	if (!relaxed_program(l.t.program))
		throw UsageError("simulate needs a program with rlx accesses only");
	const auto &c = pick(l, index);
	if (!check_imm(c.g).consistent)
		throw UsageError("graph " + std::to_string(index) + " is not IMM-consistent");
	auto run = traverse_to_completion(Traversal(c.g, Fragment::relaxed));
	auto sim = simulate_traversal(l.t.program, c.g, run.steps);
	if (trace)
		for (std::size_t k = 0; k < sim.trace.size(); ++k) {
			const auto &e = sim.trace[k];
			std::cout << json{{"schema", 1},
					  {"step", k},
					  {"traversal", step_name(c.g, e.step)},
					  {"thread", e.step.tid(c.g)},
					  {"action", e.action},
					  {"certified", e.certified}}
					     .dump()
				  << '\n';
		}
	std::cout << json{{"schema", 1},
			  {"graph", index},
			  {"outcome", outcome_json(sim.outcome, l.t.program.locations)},
			  {"matches_graph", sim.outcome == outcome(c.g)},
			  {"certifications", sim.certifications},
			  {"inconclusive", sim.inconclusive}}
			     .dump()
		  << '\n';
	return sim.outcome == outcome(c.g) ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
	CLI::App app{"immlab: execution graphs under IMM, C11, POWER and ARM"};
	app.require_subcommand(1);
	app.fallthrough();
	Globals gl;
	app.add_option("--max-val", gl.max_val, "largest value in the read domain")->check(CLI::NonNegativeNumber);
	app.add_option("--unroll", gl.unroll, "backward jumps per thread run")->check(CLI::NonNegativeNumber);
	app.add_option("--jobs", gl.jobs, "worker threads")->check(CLI::PositiveNumber);
	app.add_flag("--json", gl.json, "machine-readable output");
	app.add_option("--dump-graph", gl.dump_dir, "write graphs as JSON into this directory");
	app.add_flag("--power-at-axiom", gl.power_at_axiom, "add the co ∪ [At];po;[At] POWER axiom");
	app.add_flag("--armv7", gl.armv7, "ARMv7 variant of the POWER ppo");

	std::string file, model = "imm", target, model_b;
	std::vector<std::string> paths, models;
	int index = -1, step = 0, tid = 0;
	bool trace = false;
	std::uint64_t seed = 0;
	std::size_t count = 100, max_cands = 2000;
	bool relaxed = false, print = false, timing = false;
	std::function<int()> action;

	auto *en = app.add_subcommand("enumerate", "list candidate graphs with their verdicts");
	en->add_option("file", file)->required();
	en->callback([&] { action = [&] { return cmd_enumerate(gl, file); }; });

	auto *ch = app.add_subcommand("check", "check every candidate against a model");
	ch->add_option("file", file)->required();
	ch->add_option("--model", model, "imm|imms|c11|rc11|power|arm");
	ch->callback([&] { action = [&] { return cmd_check(gl, file, model); }; });

	auto *ou = app.add_subcommand("outcomes", "final memory states allowed by a model");
	ou->add_option("file", file)->required();
	ou->add_option("--model", model, "imm|imms|c11|rc11|power|arm");
	ou->callback([&] { action = [&] { return cmd_outcomes(gl, file, model); }; });

	auto *ma = app.add_subcommand("map", "compile candidates to POWER or ARM");
	ma->add_option("file", file)->required();
	ma->add_option("--target", target, "power|arm")->required();
	ma->add_option("--graph-index", index, "show one mapped graph");
	ma->callback([&] { action = [&] { return cmd_map(gl, file, target, index); }; });

	auto *tr = app.add_subcommand("traverse", "run the traversal strategy (JSON lines)");
	tr->add_option("file", file)->required();
	tr->add_option("--graph-index", index);
	tr->add_flag("--trace", trace, "include the configuration after each step");
	tr->callback([&] { action = [&] { return cmd_traverse(gl, file, index, trace); }; });

	auto *ce = app.add_subcommand("certify", "build and check a certification graph");
	ce->add_option("file", file)->required();
	ce->add_option("--graph-index", index)->required();
	ce->add_option("--step", step, "traversal configuration after this many steps")->required();
	ce->add_option("--thread", tid)->required();
	ce->callback([&] { action = [&] { return cmd_certify(gl, file, index, step, tid); }; });

	auto *si = app.add_subcommand("simulate", "replay a traversal on the promise machine (JSON lines)");
	si->add_option("file", file)->required();
	si->add_option("--graph-index", index)->required();
	si->add_flag("--trace", trace, "one line per machine step");
	si->callback([&] { action = [&] { return cmd_simulate(gl, file, index, trace); }; });

	auto *co = app.add_subcommand("compare", "inclusion between two models");
	co->add_option("file", file)->required();
	co->add_option("model_a", model)->required();
	co->add_option("model_b", model_b)->required();
	co->callback([&] {
		action = [&] {
			auto t = load_litmus(file);
			auto r = cmd_compare(t, model_arg(model), model_arg(model_b), gl.cli());
			emit(gl, to_json(r, t.program.locations), render(r, t.program.locations));
			return 0;
		};
	});

	auto *ru = app.add_subcommand("run", "check corpus expectations");
	ru->add_option("paths", paths, "litmus files or directories")->required();
	ru->add_option("--model", models, "restrict to these models");
	ru->add_flag("--timing", timing, "report wall-clock times");
	ru->callback([&] {
		action = [&] {
			std::vector<Model> ms;
			for (auto &m : models)
				ms.push_back(model_arg(m));
			auto opt = gl.cli();
			opt.timing = timing;
			auto r = cmd_run(paths, ms, opt);
			emit(gl, to_json(r, timing), render(r, timing));
			return r.exit_code();
		};
	});

	auto *fz = app.add_subcommand("fuzz", "random programs checked for inclusions and mappings");
	fz->add_option("--seed", seed)->required();
	fz->add_option("--count", count, "number of programs");
	fz->add_option("--max-candidates", max_cands, "skip programs with more candidates than this");
	fz->add_flag("--relaxed", relaxed, "rlx accesses and branches only");
	fz->add_flag("--print", print, "print the generated programs instead of checking them");
	fz->callback([&] {
		action = [&] {
			FuzzOptions fo;
			fo.seed = seed;
			fo.relaxed_only = relaxed;
			if (print) {
				for (std::size_t k = 0; k < count; ++k)
					std::cout << print_litmus(fuzz_program(fo, k)) << '\n';
				return 0;
			}
			auto r = cmd_fuzz(fo, count, gl.cli(), max_cands);
			emit(gl, to_json(r), render(r));
			return r.violations ? 1 : 0;
		};
	});

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		return app.exit(e);
	}
	try {
		return action();
	} catch (const std::exception &e) {
		std::cerr << "immlab: " << e.what() << '\n';
		return 2;
	}
}
