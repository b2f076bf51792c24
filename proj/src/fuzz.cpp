#include "immlab/fuzz.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace immlab {

namespace {

const char *kModesR[] = {"rlx", "acq"};
const char *kModesW[] = {"rlx", "rel"};
const char *kFences[] = {"acq", "rel", "acqrel", "sc"};

} // namespace

LitmusTest fuzz_program(const FuzzOptions &opt, std::size_t index)
{
	std::mt19937_64 rng(opt.seed ^ (0x9e3779b97f4a7c15ull * (index + 1)));
	auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

	std::vector<std::string> locs;
	for (int x = 0; x < opt.locations; ++x)
		locs.push_back(std::string(1, static_cast<char>('x' + x % 3)) + (x >= 3 ? std::to_string(x / 3) : ""));

	std::ostringstream os;
	os << "prog \"fuzz-" << opt.seed << "-" << index << "\"\n";
	os << "locations";
	for (auto &l : locs)
		os << ' ' << l;
	os << "\nvals 0.." << opt.max_val << "\n";

	const int nthreads = pick(opt.min_threads, opt.max_threads);
	int nregs = 0;
	for (int t = 0; t < nthreads; ++t) {
		os << "thread " << t << ":\n";
		const int n = pick(1, opt.max_instrs);
		std::vector<std::string> regs; // registers bound so far in this thread
		auto loc = [&] { return locs[pick(0, opt.locations - 1)]; };
		auto value = [&]() -> std::string {
			if (!regs.empty() && pick(0, 2) == 0)
				return regs[pick(0, static_cast<int>(regs.size()) - 1)];
			return std::to_string(pick(1, static_cast<int>(opt.max_val)));
		};
		auto fresh = [&] {
			std::string r = "r" + std::to_string(nregs++);
			return r;
		};
		for (int i = 0; i < n; ++i) {
			int kind = opt.relaxed_only ? pick(0, 2) : pick(0, 5);
			// branches need a register and a later instruction to skip
			if (kind == 2 && (regs.empty() || i + 1 >= n))
				kind = 0;
			std::string mr = opt.relaxed_only ? "rlx" : kModesR[pick(0, 1)];
			std::string mw = opt.relaxed_only ? "rlx" : kModesW[pick(0, 1)];
			os << "  ";
			switch (kind) {
			case 0: {
				auto r = fresh();
				os << "r[" << mr << "] " << r << ' ' << loc();
				regs.push_back(r);
				break;
			}
			case 1:
				os << "w[" << mw << "] " << loc() << ' ' << value();
				break;
			case 2:
				os << "if " << regs[pick(0, static_cast<int>(regs.size()) - 1)] << " == 0 goto " << pick(i + 2, n);
				break;
			case 3:
				os << "f[" << kFences[pick(0, 3)] << "]";
				break;
			case 4: {
				auto r = fresh();
				os << "fadd[" << mr << ',' << mw << (pick(0, 1) ? ",strong" : "") << "] " << r << ' ' << loc() << " 1";
				regs.push_back(r);
				break;
			}
			default: {
				auto r = fresh();
				os << "cas[" << mr << ',' << mw << "] " << r << ' ' << loc() << ' ' << pick(0, 1) << ' '
				   << value();
				regs.push_back(r);
				break;
			}
			}
			os << '\n';
		}
	}
	return parse_litmus(os.str());
}

FuzzPopulation fuzz_population(const FuzzOptions &opt, const Bounds &b, std::size_t min_candidates,
			       std::size_t max_per_program)
{
	FuzzPopulation pop;
	for (std::size_t k = 0; pop.candidates < min_candidates && k < 100000; ++k) {
		auto t = fuzz_program(opt, k);
		auto eb = b;
		eb.max_val = std::max(eb.max_val, t.program.max_val);
		std::size_t n = 0;
		for_each_candidate(t.program, eb, [&](const Candidate &) { return ++n <= max_per_program; });
		if (n > max_per_program) {
			++pop.skipped;
			continue;
		}
		pop.candidates += n;
		pop.tests.push_back(std::move(t));
	}
	return pop;
}

} // namespace immlab
