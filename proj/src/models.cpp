#include "immlab/models.hpp"

#include <mutex>

namespace immlab {

const char *to_string(Model m)
{
	switch (m) {
	case Model::imm:
		return "imm";
	case Model::imms:
		return "imms";
	case Model::c11:
		return "c11";
	case Model::rc11:
		return "rc11";
	case Model::power:
		return "power";
	case Model::arm:
		return "arm";
	}
	return "?";
}

std::optional<Model> parse_model(const std::string &s)
{
	for (auto m : all_models())
		if (s == to_string(m))
			return m;
	return std::nullopt;
}

const std::vector<Model> &all_models()
{
	static const std::vector<Model> ms{Model::imm, Model::imms, Model::c11, Model::rc11, Model::power, Model::arm};
	return ms;
}

Verdict check_model(const Execution &g, Model m, const ModelOptions &opt)
{
	switch (m) {
	case Model::imm:
		return check_imm(g);
	case Model::imms:
		return check_imms(g);
	case Model::c11:
		return check_c11(g);
	case Model::rc11:
		return check_rc11(g);
	case Model::power:
		return check_power(to_power(split_release(g)), opt.power);
	case Model::arm:
		return check_arm(to_arm(g));
	}
	return {};
}

Bounds effective_bounds(const Program &p, Bounds b)
{
	b.max_val = std::max(b.max_val, p.max_val);
	return b;
}

OutcomeReport outcomes(const Program &p, Model m, const Bounds &b, const ModelOptions &opt)
{
	OutcomeReport r;
	std::mutex mu;
	auto st = for_each_candidate(p, effective_bounds(p, b), [&](const Candidate &c) {
		bool ok = check_model(c.g, m, opt).consistent;
		if (ok) {
			auto mem = outcome(c.g);
			std::lock_guard lock(mu);
			++r.consistent;
			r.mem.insert(mem);
			r.finals.insert(FinalState{c.regs, mem});
		}
		return true;
	});
	r.candidates = st.candidates;
	r.lower_bound = st.truncated;
	return r;
}

bool reachable(const OutcomeReport &r, const Assertion &a)
{
	for (auto &f : r.finals)
		if (eval_assertion(a, f.regs, f.mem))
			return true;
	return false;
}

MappingReport empirical_mapping_theorem(const Program &p, Arch target, const Bounds &b, const PowerOptions &opt)
{
	MappingReport rep;
	std::mutex mu;
	for_each_candidate(p, effective_bounds(p, b), [&](const Candidate &c) {
		bool hw_ok = target == Arch::power ? check_power(to_power(split_release(c.g)), opt).consistent
						   : check_arm(to_arm(c.g)).consistent;
		bool bad = hw_ok && !check_imm(c.g).consistent;
		std::lock_guard lock(mu);
		++rep.candidates;
		if (hw_ok)
			++rep.target_consistent;
		if (bad)
			rep.counterexamples.push_back(c.g);
		return true;
	});
	return rep;
}

} // namespace immlab
