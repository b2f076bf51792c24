#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace immlab {

using Val = std::uint64_t;

enum class Mode { rlx, acq, rel, acqrel, sc };
enum class RmwMode { normal, strong };

bool mode_leq(Mode a, Mode b);
const char *to_string(Mode m);
const char *to_string(RmwMode m);
std::optional<Mode> parse_mode(const std::string &s);

struct Expr {
	enum class Kind { lit, loc, reg, bin };
	Kind kind = Kind::lit;
	Val value = 0;
	int reg = -1;
	std::string op;
	std::shared_ptr<const Expr> lhs, rhs;

	static Expr literal(Val v);
	static Expr location(int idx);
	static Expr regref(int r);
	static Expr binary(std::string op, Expr a, Expr b);
	// registers this expression reads, sorted and unique
	std::vector<int> regs() const;
};

struct UnboundRegister : std::runtime_error {
	using std::runtime_error::runtime_error;
};

// Naturals; subtraction saturates at 0, comparisons yield 0 or 1.
Val eval_expr(const Expr &e, const std::vector<std::optional<Val>> &regs);
Val eval_expr(const Expr &e, const std::vector<Val> &regs);

struct Instr {
	enum class Kind { assign, if_goto, store, load, fadd, cas, fence };
	Kind kind = Kind::fence;
	Mode mode_r = Mode::rlx; // load/rmw read mode, fence mode
	Mode mode_w = Mode::rlx; // store/rmw write mode
	RmwMode rmw = RmwMode::normal;
	int reg = -1;
	Expr e1, e2, e3; // see parser: location first for memory accesses
	int target = -1;
	int line = 0;
};

struct Thread {
	std::vector<Instr> code;
	std::vector<std::string> regs;
	int reg_index(const std::string &name) const;
};

struct Program {
	std::vector<Thread> threads;
	std::vector<std::string> locations;
	Val max_val = 1;
	int loc_index(const std::string &name) const;
};

struct Atom {
	enum class Kind { reg, loc };
	Kind kind = Kind::reg;
	int tid = -1;
	int idx = -1;
	Val value = 0;
};

struct Assertion {
	bool forbidden = true;
	std::vector<Atom> conj;
};

struct LitmusTest {
	std::string name;
	Program program;
	std::optional<Assertion> assertion;
	std::map<std::string, bool> expect; // model name -> allowed
};

struct ParseError : std::runtime_error {
	int line, column;
	ParseError(int l, int c, const std::string &msg);
};

LitmusTest parse_litmus(const std::string &text);
LitmusTest load_litmus(const std::string &path);
std::string print_litmus(const LitmusTest &t);
std::string print_expr(const Expr &e, const Thread &th, const Program &p);

// Register values of every thread plus final memory.
bool eval_assertion(const Assertion &a, const std::vector<std::vector<Val>> &regs, const std::vector<Val> &mem);

} // namespace immlab
