#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "immlab/enumerate.hpp"
#include "immlab/program.hpp"

namespace immlab {

struct FuzzOptions {
	std::uint64_t seed = 0;
	int min_threads = 2;
	int max_threads = 3;
	int max_instrs = 4; // per thread
	int locations = 2;
	Val max_val = 2;
	bool relaxed_only = false; // rlx loads/stores and forward branches only
};

// Random loop-free program, printed in litmus syntax and parsed back. Deterministic in (opt, index).
LitmusTest fuzz_program(const FuzzOptions &opt, std::size_t index);

struct FuzzPopulation {
	std::vector<LitmusTest> tests;
	std::size_t candidates = 0;
	std::size_t skipped = 0; // programs over the per-program cap
};

// Programs 0, 1, ... until the kept ones reach min_candidates in total.
// A program with more than max_per_program candidates is skipped whole.
FuzzPopulation fuzz_population(const FuzzOptions &opt, const Bounds &b, std::size_t min_candidates,
			       std::size_t max_per_program = 2000);

} // namespace immlab
