#include "immlab/cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace immlab {

namespace fs = std::filesystem;

std::vector<Candidate> collect_candidates(const Program &p, const Bounds &b, bool *truncated)
{
	std::vector<Candidate> out;
	std::mutex mu;
	auto st = for_each_candidate(p, b, [&](const Candidate &c) {
		std::lock_guard lock(mu);
		out.push_back(c);
		return true;
	});
	std::sort(out.begin(), out.end(), [](const Candidate &a, const Candidate &b) { return a.key < b.key; });
	if (truncated)
		*truncated = st.truncated;
	return out;
}

std::string format_outcome(const std::vector<Val> &mem, const std::vector<std::string> &locs)
{
	std::ostringstream os;
	for (std::size_t x = 0; x < mem.size(); ++x)
		os << (x ? " " : "") << (x < locs.size() ? locs[x] : "?") << '=' << mem[x];
	return os.str();
}

nlohmann::json outcome_json(const std::vector<Val> &mem, const std::vector<std::string> &locs)
{
	nlohmann::json j = nlohmann::json::object();
	for (std::size_t x = 0; x < mem.size() && x < locs.size(); ++x)
		j[locs[x]] = mem[x];
	return j;
}

namespace {

std::vector<std::string> litmus_files(const std::vector<std::string> &paths)
{
	std::vector<std::string> out;
	for (auto &p : paths) {
		if (fs::is_directory(p)) {
			std::vector<std::string> dir;
			for (auto &e : fs::directory_iterator(p))
				if (e.is_regular_file() && e.path().extension() == ".litmus")
					dir.push_back(e.path().string());
			std::sort(dir.begin(), dir.end());
			out.insert(out.end(), dir.begin(), dir.end());
		} else {
			out.push_back(p);
		}
	}
	return out;
}

TestRun run_one(const std::string &file, const std::vector<Model> &models, const CliOptions &opt,
		std::vector<std::string> &diffs, std::size_t &expectations)
{
	TestRun tr;
	tr.file = file;
	auto t0 = std::chrono::steady_clock::now();
	LitmusTest t;
	try {
		t = load_litmus(file);
	} catch (const std::exception &e) {
		tr.error = e.what();
		diffs.push_back(file + ": " + e.what());
		return tr;
	}
	tr.name = t.name;
	std::vector<Model> ms = models;
	if (ms.empty())
		for (auto m : all_models())
			if (t.expect.count(to_string(m)))
				ms.push_back(m);
	auto b = opt.bounds;
	b.jobs = 1;
	for (auto m : ms) {
		ModelRun mr;
		mr.model = m;
		auto rep = outcomes(t.program, m, b, opt.model);
		mr.outcomes = rep.mem;
		mr.candidates = rep.candidates;
		mr.consistent = rep.consistent;
		mr.lower_bound = rep.lower_bound;
		mr.allowed = t.assertion && reachable(rep, *t.assertion);
		if (auto it = t.expect.find(to_string(m)); it != t.expect.end()) {
			if (!t.assertion) {
				tr.error = "expect line without an assertion";
				diffs.push_back(file + ": expect line without an assertion");
				break;
			}
			mr.expected = it->second;
			++expectations;
			if (mr.allowed != it->second)
				diffs.push_back(file + " (" + t.name + ") " + to_string(m) + ": expected " +
						(it->second ? "allowed" : "forbidden") + ", got " +
						(mr.allowed ? "allowed" : "forbidden"));
		}
		tr.models.push_back(std::move(mr));
	}
	tr.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	return tr;
}

// Runs f(0..n-1) on a pool of `jobs` threads; results are assembled by index.
template <class F> void parallel_for(std::size_t n, int jobs, F &&f)
{
	std::size_t k = static_cast<std::size_t>(std::max(1, jobs));
	if (k == 1 || n < 2) {
		for (std::size_t i = 0; i < n; ++i)
			f(i);
		return;
	}
	std::atomic<std::size_t> next{0};
	std::vector<std::thread> pool;
	for (std::size_t j = 0; j < std::min(k, n); ++j)
		pool.emplace_back([&] {
			for (std::size_t i; (i = next++) < n;)
				f(i);
		});
	for (auto &t : pool)
		t.join();
}

const char *verdict(bool allowed) { return allowed ? "allowed" : "forbidden"; }

} // namespace

int RunReport::exit_code() const
{
	for (auto &t : tests)
		if (t.error)
			return 2;
	return diffs.empty() ? 0 : 1;
}

RunReport cmd_run(const std::vector<std::string> &paths, const std::vector<Model> &models, const CliOptions &opt)
{
	auto files = litmus_files(paths);
	RunReport r;
	r.tests.resize(files.size());
	std::vector<std::vector<std::string>> diffs(files.size());
	std::vector<std::size_t> exps(files.size(), 0);
	parallel_for(files.size(), opt.bounds.jobs,
		     [&](std::size_t i) { r.tests[i] = run_one(files[i], models, opt, diffs[i], exps[i]); });
	for (std::size_t i = 0; i < files.size(); ++i) {
		r.diffs.insert(r.diffs.end(), diffs[i].begin(), diffs[i].end());
		r.expectations += exps[i];
	}
	return r;
}

nlohmann::json to_json(const RunReport &r, bool timing)
{
	nlohmann::json j;
	j["schema"] = 1;
	j["command"] = "run";
	j["tests"] = nlohmann::json::array();
	for (auto &t : r.tests) {
		nlohmann::json jt;
		jt["file"] = t.file;
		jt["name"] = t.name;
		if (t.error)
			jt["error"] = *t.error;
		if (timing)
			jt["seconds"] = t.seconds;
		jt["models"] = nlohmann::json::array();
		for (auto &m : t.models) {
			nlohmann::json jm;
			jm["model"] = to_string(m.model);
			jm["verdict"] = verdict(m.allowed);
			jm["expected"] = m.expected ? nlohmann::json(verdict(*m.expected)) : nlohmann::json(nullptr);
			jm["candidates"] = m.candidates;
			jm["consistent"] = m.consistent;
			jm["lower_bound"] = m.lower_bound;
			jm["outcomes"] = m.outcomes.size();
			jt["models"].push_back(jm);
		}
		j["tests"].push_back(jt);
	}
	j["expectations"] = r.expectations;
	j["mismatches"] = r.diffs;
	j["ok"] = r.exit_code() == 0;
	return j;
}

std::string render(const RunReport &r, bool timing)
{
	std::ostringstream os;
	os << std::left << std::setw(24) << "test" << std::setw(7) << "model" << std::setw(11) << "verdict"
	   << std::setw(11) << "expected" << std::setw(12) << "candidates" << std::setw(11) << "consistent"
	   << "outcomes";
	if (timing)
		os << "  seconds";
	os << '\n';
	for (auto &t : r.tests) {
		if (t.error) {
			os << std::setw(24) << t.file << "error: " << *t.error << '\n';
			continue;
		}
		for (auto &m : t.models) {
			os << std::setw(24) << t.name << std::setw(7) << to_string(m.model) << std::setw(11)
			   << verdict(m.allowed) << std::setw(11) << (m.expected ? verdict(*m.expected) : "-")
			   << std::setw(12) << (std::to_string(m.candidates) + (m.lower_bound ? "+" : "")) << std::setw(11)
			   << m.consistent << m.outcomes.size();
			if (timing)
				os << "  " << std::fixed << std::setprecision(3) << t.seconds;
			os << '\n';
		}
	}
	os << r.tests.size() << " tests, " << r.expectations << " expectations, " << r.diffs.size() << " mismatches\n";
	for (auto &d : r.diffs)
		os << "MISMATCH " << d << '\n';
	return os.str();
}

bool CompareReport::outcomes_included() const
{
	return std::includes(b_outcomes.begin(), b_outcomes.end(), a_outcomes.begin(), a_outcomes.end());
}

CompareReport cmd_compare(const LitmusTest &t, Model a, Model b, const CliOptions &opt)
{
	CompareReport r;
	r.name = t.name;
	r.a = a;
	r.b = b;
	auto cands = collect_candidates(t.program, effective_bounds(t.program, opt.bounds));
	r.candidates = cands.size();
	for (std::size_t i = 0; i < cands.size(); ++i) {
		bool ca = check_model(cands[i].g, a, opt.model).consistent;
		bool cb = check_model(cands[i].g, b, opt.model).consistent;
		r.a_consistent += ca;
		r.b_consistent += cb;
		if (ca) {
			r.a_outcomes.insert(outcome(cands[i].g));
			if (!cb)
				r.a_not_b.push_back(i);
		}
		if (cb) {
			r.b_outcomes.insert(outcome(cands[i].g));
			if (!ca)
				r.b_not_a.push_back(i);
		}
	}
	return r;
}

nlohmann::json to_json(const CompareReport &r, const std::vector<std::string> &locs)
{
	auto outs = [&](const std::set<std::vector<Val>> &s) {
		auto j = nlohmann::json::array();
		for (auto &o : s)
			j.push_back(outcome_json(o, locs));
		return j;
	};
	nlohmann::json j;
	j["schema"] = 1;
	j["command"] = "compare";
	j["name"] = r.name;
	j["a"] = to_string(r.a);
	j["b"] = to_string(r.b);
	j["candidates"] = r.candidates;
	j["a_consistent"] = r.a_consistent;
	j["b_consistent"] = r.b_consistent;
	j["a_not_b"] = r.a_not_b;
	j["b_not_a"] = r.b_not_a;
	j["graphs_included"] = r.graphs_included();
	j["outcomes_included"] = r.outcomes_included();
	j["a_outcomes"] = outs(r.a_outcomes);
	j["b_outcomes"] = outs(r.b_outcomes);
	return j;
}

std::string render(const CompareReport &r, const std::vector<std::string> &locs)
{
	std::ostringstream os;
	auto idx = [](const std::vector<std::size_t> &v) {
		std::string s;
		for (auto i : v)
			s += (s.empty() ? "" : ",") + std::to_string(i);
		return s.empty() ? std::string("none") : s;
	};
	const std::string A = to_string(r.a), B = to_string(r.b);
	os << r.name << ": " << r.candidates << " candidates, " << A << "-consistent " << r.a_consistent << ", " << B
	   << "-consistent " << r.b_consistent << '\n';
	os << A << " ⊆ " << B << " on graphs: " << (r.graphs_included() ? "yes" : "no") << " (" << A << " only: "
	   << idx(r.a_not_b) << "; " << B << " only: " << idx(r.b_not_a) << ")\n";
	os << A << " ⊆ " << B << " on outcomes: " << (r.outcomes_included() ? "yes" : "no") << '\n';
	for (auto &o : r.a_outcomes)
		if (!r.b_outcomes.count(o))
			os << "  " << A << " only: " << format_outcome(o, locs) << '\n';
	for (auto &o : r.b_outcomes)
		if (!r.a_outcomes.count(o))
			os << "  " << B << " only: " << format_outcome(o, locs) << '\n';
	return os.str();
}

FuzzReport cmd_fuzz(const FuzzOptions &fo, std::size_t count, const CliOptions &opt, std::size_t max_candidates)
{
	FuzzReport r;
	r.seed = fo.seed;
	r.cases.resize(count);
	parallel_for(count, opt.bounds.jobs, [&](std::size_t k) {
		auto t = fuzz_program(fo, k);
		auto &fc = r.cases[k];
		fc.name = t.name;
		auto b = effective_bounds(t.program, opt.bounds);
		b.jobs = 1;
		std::size_t n = 0;
		for_each_candidate(t.program, b, [&](const Candidate &) { return ++n <= max_candidates; });
		if (n > max_candidates) {
			fc.skipped = true;
			return;
		}
		std::size_t i = 0;
		for_each_candidate(t.program, b, [&](const Candidate &c) {
			auto flag = [&](const char *what) { fc.violations.push_back(std::string(what) + " graph " + std::to_string(i)); };
			bool imm = check_imm(c.g).consistent;
			if (imm && !check_imms(c.g).consistent)
				flag("IMM⇒IMM_S");
			if (imm && !check_c11(c.g).consistent)
				flag("IMM⇒C11");
			if (check_rc11(c.g).consistent && !check_c11(c.g).consistent)
				flag("RC11⇒C11");
			if (!imm && check_model(c.g, Model::power, opt.model).consistent)
				flag("POWER⇒IMM");
			if (!imm && check_model(c.g, Model::arm, opt.model).consistent)
				flag("ARM⇒IMM");
			++i;
			return true;
		});
		fc.candidates = i;
	});
	for (auto &c : r.cases) {
		r.candidates += c.candidates;
		r.violations += c.violations.size();
		r.skipped += c.skipped;
	}
	return r;
}

nlohmann::json to_json(const FuzzReport &r)
{
	nlohmann::json j;
	j["schema"] = 1;
	j["command"] = "fuzz";
	j["seed"] = r.seed;
	j["programs"] = r.cases.size();
	j["candidates"] = r.candidates;
	j["violations"] = r.violations;
	j["skipped"] = r.skipped;
	j["cases"] = nlohmann::json::array();
	for (auto &c : r.cases)
		j["cases"].push_back({{"name", c.name}, {"candidates", c.candidates}, {"skipped", c.skipped}, {"violations", c.violations}});
	return j;
}

std::string render(const FuzzReport &r)
{
	std::ostringstream os;
	for (auto &c : r.cases)
		for (auto &v : c.violations)
			os << "VIOLATION " << c.name << ": " << v << '\n';
	os << "seed " << r.seed << ": " << r.cases.size() << " programs, " << r.candidates << " candidates, "
	   << r.violations << " violations, " << r.skipped << " programs skipped over the candidate cap\n";
	return os.str();
}

} // namespace immlab
