#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "immlab/fuzz.hpp"
#include "immlab/models.hpp"

namespace immlab {

struct CliOptions {
	Bounds bounds;
	ModelOptions model;
	bool timing = false; // include wall-clock times in reports (off keeps reports reproducible)
};

struct ModelRun {
	Model model = Model::imm;
	bool allowed = false;
	std::optional<bool> expected;
	std::set<std::vector<Val>> outcomes;
	std::size_t candidates = 0, consistent = 0;
	bool lower_bound = false;
};

struct TestRun {
	std::string file, name;
	std::optional<std::string> error; // parse failure
	std::vector<ModelRun> models;
	double seconds = 0;
};

struct RunReport {
	std::vector<TestRun> tests;
	std::size_t expectations = 0;
	std::vector<std::string> diffs;
	// 0 all expectations met, 1 a mismatch, 2 a file failed to parse
	int exit_code() const;
};

// Each path is a .litmus file or a directory of them (not recursive). With no models given, every
// model named in a file's expect line is checked.
RunReport cmd_run(const std::vector<std::string> &paths, const std::vector<Model> &models, const CliOptions &opt);
nlohmann::json to_json(const RunReport &r, bool timing = false);
std::string render(const RunReport &r, bool timing = false);

struct CompareReport {
	std::string name;
	Model a = Model::imm, b = Model::imm;
	std::size_t candidates = 0, a_consistent = 0, b_consistent = 0;
	std::vector<std::size_t> a_not_b, b_not_a; // candidate indices
	std::set<std::vector<Val>> a_outcomes, b_outcomes;
	bool graphs_included() const { return a_not_b.empty(); }
	bool outcomes_included() const;
};

CompareReport cmd_compare(const LitmusTest &t, Model a, Model b, const CliOptions &opt);
nlohmann::json to_json(const CompareReport &r, const std::vector<std::string> &locs);
std::string render(const CompareReport &r, const std::vector<std::string> &locs);

struct FuzzCase {
	std::string name;
	std::size_t candidates = 0;
	bool skipped = false;
	std::vector<std::string> violations; // "IMM⇒C11 graph 4" and the like
};

struct FuzzReport {
	std::uint64_t seed = 0;
	std::vector<FuzzCase> cases;
	std::size_t candidates = 0, violations = 0;
	std::size_t skipped = 0; // programs over the candidate cap
};

// Programs 0..count-1 of the seeded generator, each checked for the model inclusions and mappings.
// Programs with more than max_candidates candidates are skipped.
FuzzReport cmd_fuzz(const FuzzOptions &fo, std::size_t count, const CliOptions &opt,
		    std::size_t max_candidates = 2000);
nlohmann::json to_json(const FuzzReport &r);
std::string render(const FuzzReport &r);

// All candidates in emission order, whatever bounds.jobs is. Indices into this vector are the graph
// indices the CLI prints and accepts.
std::vector<Candidate> collect_candidates(const Program &p, const Bounds &b, bool *truncated = nullptr);

// "x=1 y=0"
std::string format_outcome(const std::vector<Val> &mem, const std::vector<std::string> &locs);
nlohmann::json outcome_json(const std::vector<Val> &mem, const std::vector<std::string> &locs);

} // namespace immlab
