#include "immlab/program.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace immlab {

namespace {

int rank_of(Mode m)
{
	return static_cast<int>(m);
}

} // namespace

bool mode_leq(Mode a, Mode b)
{
	if (a == b || a == Mode::rlx || b == Mode::sc)
		return true;
	// acq and rel are incomparable, both below acqrel
	if (b == Mode::acqrel)
		return a == Mode::acq || a == Mode::rel;
	return false;
}

const char *to_string(Mode m)
{
	static const char *names[] = {"rlx", "acq", "rel", "acqrel", "sc"};
	return names[rank_of(m)];
}

const char *to_string(RmwMode m)
{
	return m == RmwMode::strong ? "strong" : "normal";
}

std::optional<Mode> parse_mode(const std::string &s)
{
	if (s == "rlx")
		return Mode::rlx;
	if (s == "acq")
		return Mode::acq;
	if (s == "rel")
		return Mode::rel;
	if (s == "acqrel")
		return Mode::acqrel;
	if (s == "sc")
		return Mode::sc;
	return std::nullopt;
}

Expr Expr::literal(Val v)
{
	Expr e;
	e.kind = Kind::lit;
	e.value = v;
	return e;
}

Expr Expr::location(int idx)
{
	Expr e;
	e.kind = Kind::loc;
	e.value = static_cast<Val>(idx);
	return e;
}

Expr Expr::regref(int r)
{
	Expr e;
	e.kind = Kind::reg;
	e.reg = r;
	return e;
}

Expr Expr::binary(std::string op, Expr a, Expr b)
{
	Expr e;
	e.kind = Kind::bin;
	e.op = std::move(op);
	e.lhs = std::make_shared<const Expr>(std::move(a));
	e.rhs = std::make_shared<const Expr>(std::move(b));
	return e;
}

std::vector<int> Expr::regs() const
{
	std::vector<int> out;
	std::vector<const Expr *> work{this};
	while (!work.empty()) {
		auto *e = work.back();
		work.pop_back();
		if (e->kind == Kind::reg)
			out.push_back(e->reg);
		if (e->kind == Kind::bin) {
			work.push_back(e->lhs.get());
			work.push_back(e->rhs.get());
		}
	}
	std::sort(out.begin(), out.end());
	out.erase(std::unique(out.begin(), out.end()), out.end());
	return out;
}

namespace {

Val apply_op(const std::string &op, Val a, Val b)
{
	if (op == "+")
		return a + b;
	if (op == "-")
		return a > b ? a - b : 0;
	if (op == "*")
		return a * b;
	if (op == "^")
		return a ^ b;
	if (op == "==")
		return a == b;
	if (op == "!=")
		return a != b;
	if (op == "<")
		return a < b;
	throw std::logic_error("unknown operator " + op);
}

} // namespace

Val eval_expr(const Expr &e, const std::vector<std::optional<Val>> &regs)
{
	switch (e.kind) {
	case Expr::Kind::lit:
	case Expr::Kind::loc:
		return e.value;
	case Expr::Kind::reg:
		if (e.reg < 0 || static_cast<std::size_t>(e.reg) >= regs.size() || !regs[e.reg])
			throw UnboundRegister("unbound register r" + std::to_string(e.reg));
		return *regs[e.reg];
	case Expr::Kind::bin:
		return apply_op(e.op, eval_expr(*e.lhs, regs), eval_expr(*e.rhs, regs));
	}
	return 0;
}

Val eval_expr(const Expr &e, const std::vector<Val> &regs)
{
	switch (e.kind) {
	case Expr::Kind::lit:
	case Expr::Kind::loc:
		return e.value;
	case Expr::Kind::reg:
		if (e.reg < 0 || static_cast<std::size_t>(e.reg) >= regs.size())
			throw UnboundRegister("unbound register r" + std::to_string(e.reg));
		return regs[e.reg];
	case Expr::Kind::bin:
		return apply_op(e.op, eval_expr(*e.lhs, regs), eval_expr(*e.rhs, regs));
	}
	return 0;
}

int Thread::reg_index(const std::string &name) const
{
	auto it = std::find(regs.begin(), regs.end(), name);
	return it == regs.end() ? -1 : static_cast<int>(it - regs.begin());
}

int Program::loc_index(const std::string &name) const
{
	auto it = std::find(locations.begin(), locations.end(), name);
	return it == locations.end() ? -1 : static_cast<int>(it - locations.begin());
}

ParseError::ParseError(int l, int c, const std::string &msg)
	: std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg), line(l), column(c)
{
}

namespace {

struct Line {
	int no;
	std::string text;
};

std::string trim(const std::string &s)
{
	auto b = s.find_first_not_of(" \t\r");
	if (b == std::string::npos)
		return "";
	auto e = s.find_last_not_of(" \t\r");
	return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string &s)
{
	auto p = s.find('#');
	auto q = s.find("//");
	auto cut = std::min(p, q);
	return cut == std::string::npos ? s : s.substr(0, cut);
}

bool is_ident_start(char c)
{
	return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_ident(char c)
{
	return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

// Splits at whitespace outside parentheses.
std::vector<std::string> operands(const std::string &s)
{
	std::vector<std::string> out;
	std::string cur;
	int depth = 0;
	for (char c : s) {
		if (c == '(')
			++depth;
		if (c == ')')
			--depth;
		if ((c == ' ' || c == '\t') && depth == 0) {
			if (!cur.empty())
				out.push_back(cur);
			cur.clear();
			continue;
		}
		cur += c;
	}
	if (!cur.empty())
		out.push_back(cur);
	return out;
}

class ExprParser {
public:
	ExprParser(const std::string &s, const Thread &th, const Program &p, int line, int col)
		: s_(s), th_(th), p_(p), line_(line), col_(col)
	{
	}

	Expr parse()
	{
		auto e = cmp();
		skip();
		if (i_ != s_.size())
			fail("unexpected '" + s_.substr(i_) + "'");
		return e;
	}

private:
	[[noreturn]] void fail(const std::string &msg) { throw ParseError(line_, col_ + static_cast<int>(i_), msg); }

	void skip()
	{
		while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_])))
			++i_;
	}

	bool eat(const std::string &tok)
	{
		skip();
		if (s_.compare(i_, tok.size(), tok) == 0) {
			i_ += tok.size();
			return true;
		}
		return false;
	}

	Expr cmp()
	{
		auto e = sum();
		for (;;) {
			if (eat("=="))
				e = Expr::binary("==", e, sum());
			else if (eat("!="))
				e = Expr::binary("!=", e, sum());
			else if (eat("<"))
				e = Expr::binary("<", e, sum());
			else
				return e;
		}
	}

	Expr sum()
	{
		auto e = prod();
		for (;;) {
			if (eat("+"))
				e = Expr::binary("+", e, prod());
			else if (eat("-"))
				e = Expr::binary("-", e, prod());
			else if (eat("^"))
				e = Expr::binary("^", e, prod());
			else
				return e;
		}
	}

	Expr prod()
	{
		auto e = atom();
		while (eat("*"))
			e = Expr::binary("*", e, atom());
		return e;
	}

	Expr atom()
	{
		skip();
		if (i_ >= s_.size())
			fail("expression expected");
		if (s_[i_] == '(') {
			++i_;
			auto e = cmp();
			if (!eat(")"))
				fail("')' expected");
			return e;
		}
		if (std::isdigit(static_cast<unsigned char>(s_[i_]))) {
			Val v = 0;
			while (i_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[i_])))
				v = v * 10 + static_cast<Val>(s_[i_++] - '0');
			return Expr::literal(v);
		}
		if (is_ident_start(s_[i_])) {
			auto b = i_;
			while (i_ < s_.size() && is_ident(s_[i_]))
				++i_;
			auto name = s_.substr(b, i_ - b);
			if (auto r = th_.reg_index(name); r >= 0)
				return Expr::regref(r);
			if (auto l = p_.loc_index(name); l >= 0)
				return Expr::location(l);
			i_ = b;
			fail("undeclared register '" + name + "'");
		}
		fail(std::string("unexpected character '") + s_[i_] + "'");
	}

	const std::string &s_;
	const Thread &th_;
	const Program &p_;
	int line_, col_;
	std::size_t i_ = 0;
};

struct Mnemonic {
	std::string op;
	std::vector<std::string> modes;
	std::string rest;
};

std::optional<Mnemonic> split_mnemonic(const std::string &s)
{
	std::size_t i = 0;
	while (i < s.size() && std::isalpha(static_cast<unsigned char>(s[i])))
		++i;
	if (i == 0 || i >= s.size() || s[i] != '[')
		return std::nullopt;
	auto close = s.find(']', i);
	if (close == std::string::npos)
		return std::nullopt;
	Mnemonic m;
	m.op = s.substr(0, i);
	std::stringstream ms(s.substr(i + 1, close - i - 1));
	std::string part;
	while (std::getline(ms, part, ','))
		m.modes.push_back(trim(part));
	m.rest = trim(s.substr(close + 1));
	return m;
}

// Collects register names a thread writes to.
void collect_target(Thread &th, const std::string &text)
{
	auto add = [&](const std::string &r) {
		if (!r.empty() && th.reg_index(r) < 0)
			th.regs.push_back(r);
	};
	if (auto p = text.find(":="); p != std::string::npos) {
		add(trim(text.substr(0, p)));
		return;
	}
	auto m = split_mnemonic(text);
	if (!m)
		return;
	if (m->op == "r" || m->op == "fadd" || m->op == "cas") {
		auto ops = operands(m->rest);
		if (!ops.empty())
			add(ops[0]);
	}
}

Mode require_mode(const std::string &s, int line)
{
	auto m = parse_mode(s);
	if (!m)
		throw ParseError(line, 1, "unknown mode '" + s + "'");
	return *m;
}

Instr parse_instr(const std::string &text, const Thread &th, const Program &p, int line)
{
	Instr in;
	in.line = line;
	auto expr = [&](const std::string &s) { return ExprParser(s, th, p, line, 1).parse(); };
	auto reg = [&](const std::string &s) {
		auto r = th.reg_index(s);
		if (r < 0)
			throw ParseError(line, 1, "undeclared register '" + s + "'");
		return r;
	};
	auto need = [&](const std::vector<std::string> &ops, std::size_t n, const char *what) {
		if (ops.size() != n)
			throw ParseError(line, 1, std::string(what) + " expects " + std::to_string(n) + " operands");
	};

	if (auto pos = text.find(":="); pos != std::string::npos) {
		in.kind = Instr::Kind::assign;
		in.reg = reg(trim(text.substr(0, pos)));
		in.e1 = expr(trim(text.substr(pos + 2)));
		return in;
	}
	if (text.rfind("if ", 0) == 0) {
		auto g = text.rfind(" goto ");
		if (g == std::string::npos)
			throw ParseError(line, 1, "'goto' expected");
		in.kind = Instr::Kind::if_goto;
		in.e1 = expr(trim(text.substr(3, g - 3)));
		auto t = trim(text.substr(g + 6));
		if (t.empty() || !std::all_of(t.begin(), t.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
			throw ParseError(line, 1, "goto target must be a line index");
		in.target = std::stoi(t);
		return in;
	}
	auto m = split_mnemonic(text);
	if (!m)
		throw ParseError(line, 1, "unknown instruction '" + text + "'");
	auto ops = operands(m->rest);
	if (m->op == "w") {
		need(ops, 2, "w");
		in.kind = Instr::Kind::store;
		if (m->modes.size() != 1)
			throw ParseError(line, 1, "w takes one mode");
		in.mode_w = require_mode(m->modes[0], line);
		if (in.mode_w != Mode::rlx && in.mode_w != Mode::rel)
			throw ParseError(line, 1, "write mode must be rlx or rel");
		in.e1 = expr(ops[0]);
		in.e2 = expr(ops[1]);
	} else if (m->op == "r") {
		need(ops, 2, "r");
		in.kind = Instr::Kind::load;
		if (m->modes.size() != 1)
			throw ParseError(line, 1, "r takes one mode");
		in.mode_r = require_mode(m->modes[0], line);
		if (in.mode_r != Mode::rlx && in.mode_r != Mode::acq)
			throw ParseError(line, 1, "read mode must be rlx or acq");
		in.reg = reg(ops[0]);
		in.e1 = expr(ops[1]);
	} else if (m->op == "fadd" || m->op == "cas") {
		bool cas = m->op == "cas";
		need(ops, cas ? 4 : 3, m->op.c_str());
		in.kind = cas ? Instr::Kind::cas : Instr::Kind::fadd;
		if (m->modes.size() < 2 || m->modes.size() > 3)
			throw ParseError(line, 1, m->op + " takes [oR,oW] or [oR,oW,strong]");
		in.mode_r = require_mode(m->modes[0], line);
		in.mode_w = require_mode(m->modes[1], line);
		if (in.mode_r != Mode::rlx && in.mode_r != Mode::acq)
			throw ParseError(line, 1, "read mode must be rlx or acq");
		if (in.mode_w != Mode::rlx && in.mode_w != Mode::rel)
			throw ParseError(line, 1, "write mode must be rlx or rel");
		if (m->modes.size() == 3) {
			if (m->modes[2] == "strong")
				in.rmw = RmwMode::strong;
			else if (m->modes[2] != "normal")
				throw ParseError(line, 1, "rmw mode must be normal or strong");
		}
		in.reg = reg(ops[0]);
		in.e1 = expr(ops[1]);
		in.e2 = expr(ops[2]);
		if (cas)
			in.e3 = expr(ops[3]);
	} else if (m->op == "f") {
		if (!ops.empty() || m->modes.size() != 1)
			throw ParseError(line, 1, "f takes one mode and no operands");
		in.kind = Instr::Kind::fence;
		in.mode_r = require_mode(m->modes[0], line);
		if (in.mode_r == Mode::rlx)
			throw ParseError(line, 1, "fence mode must be acq, rel, acqrel or sc");
	} else {
		throw ParseError(line, 1, "unknown instruction '" + m->op + "'");
	}
	return in;
}

Atom parse_atom(const std::string &s, const Program &p, int line)
{
	auto eq = s.find('=');
	if (eq == std::string::npos)
		throw ParseError(line, 1, "'=' expected in assertion");
	auto lhs = trim(s.substr(0, eq));
	auto rhs = trim(s.substr(eq + 1));
	Atom a;
	try {
		a.value = std::stoull(rhs);
	} catch (...) {
		throw ParseError(line, 1, "value expected in assertion");
	}
	int tid = -1;
	if (auto c = lhs.find(':'); c != std::string::npos) {
		tid = std::stoi(lhs.substr(0, c));
		lhs = trim(lhs.substr(c + 1));
	}
	if (tid < 0) {
		if (auto l = p.loc_index(lhs); l >= 0) {
			a.kind = Atom::Kind::loc;
			a.idx = l;
			return a;
		}
		for (std::size_t t = 0; t < p.threads.size(); ++t) {
			if (p.threads[t].reg_index(lhs) < 0)
				continue;
			if (tid >= 0)
				throw ParseError(line, 1, "ambiguous register '" + lhs + "', qualify as T:" + lhs);
			tid = static_cast<int>(t);
		}
	}
	if (tid < 0 || static_cast<std::size_t>(tid) >= p.threads.size() || p.threads[tid].reg_index(lhs) < 0)
		throw ParseError(line, 1, "undeclared register '" + lhs + "' in assertion");
	a.kind = Atom::Kind::reg;
	a.tid = tid;
	a.idx = p.threads[tid].reg_index(lhs);
	return a;
}

} // namespace

LitmusTest parse_litmus(const std::string &text)
{
	LitmusTest t;
	std::vector<Line> lines;
	{
		std::stringstream ss(text);
		std::string l;
		int no = 0;
		while (std::getline(ss, l)) {
			++no;
			auto s = trim(strip_comment(l));
			if (!s.empty())
				lines.push_back({no, s});
		}
	}

	// first pass: thread boundaries and register targets
	std::vector<std::vector<Line>> bodies;
	std::vector<Line> tail;
	bool vals_seen = false;
	for (auto &ln : lines) {
		auto &s = ln.text;
		if (s.rfind("prog ", 0) == 0) {
			auto q1 = s.find('"'), q2 = s.rfind('"');
			if (q1 == std::string::npos || q2 == q1)
				throw ParseError(ln.no, 6, "quoted program name expected");
			t.name = s.substr(q1 + 1, q2 - q1 - 1);
		} else if (s.rfind("locations", 0) == 0) {
			std::stringstream ss(s.substr(9));
			std::string name;
			while (ss >> name) {
				if (t.program.loc_index(name) >= 0)
					throw ParseError(ln.no, 1, "duplicate location '" + name + "'");
				t.program.locations.push_back(name);
			}
		} else if (s.rfind("vals", 0) == 0) {
			auto r = trim(s.substr(4));
			auto dots = r.find("..");
			if (dots == std::string::npos)
				throw ParseError(ln.no, 1, "expected vals 0..N");
			t.program.max_val = std::stoull(r.substr(dots + 2));
			vals_seen = true;
		} else if (s.rfind("thread", 0) == 0 && s.back() == ':') {
			auto id = std::stoi(trim(s.substr(6, s.size() - 7)));
			if (id != static_cast<int>(bodies.size()))
				throw ParseError(ln.no, 1, "thread ids must be contiguous from 0");
			bodies.emplace_back();
		} else if (s.rfind("assert", 0) == 0 || s.rfind("expect", 0) == 0) {
			tail.push_back(ln);
		} else {
			if (bodies.empty())
				throw ParseError(ln.no, 1, "instruction outside a thread");
			bodies.back().push_back(ln);
		}
	}
	(void)vals_seen;

	t.program.threads.resize(bodies.size());
	for (std::size_t i = 0; i < bodies.size(); ++i)
		for (auto &ln : bodies[i])
			collect_target(t.program.threads[i], ln.text);
	for (std::size_t i = 0; i < bodies.size(); ++i) {
		auto &th = t.program.threads[i];
		for (auto &ln : bodies[i])
			th.code.push_back(parse_instr(ln.text, th, t.program, ln.no));
		for (auto &in : th.code)
			if (in.kind == Instr::Kind::if_goto && (in.target < 0 || in.target > static_cast<int>(th.code.size())))
				throw ParseError(in.line, 1, "goto out of range");
	}

	for (auto &ln : tail) {
		auto &s = ln.text;
		if (s.rfind("assert", 0) == 0) {
			auto c = s.find(':');
			if (c == std::string::npos)
				throw ParseError(ln.no, 1, "':' expected after assert kind");
			auto kind = trim(s.substr(6, c - 6));
			Assertion a;
			if (kind == "forbidden")
				a.forbidden = true;
			else if (kind == "allowed")
				a.forbidden = false;
			else
				throw ParseError(ln.no, 8, "assert kind must be allowed or forbidden");
			auto body = s.substr(c + 1);
			std::size_t pos = 0;
			for (;;) {
				auto n = body.find("/\\", pos);
				auto part = trim(body.substr(pos, n == std::string::npos ? std::string::npos : n - pos));
				if (part != "true")
					a.conj.push_back(parse_atom(part, t.program, ln.no));
				if (n == std::string::npos)
					break;
				pos = n + 2;
			}
			t.assertion = a;
		} else {
			std::stringstream ss(s.substr(6));
			std::string kv;
			while (ss >> kv) {
				auto eq = kv.find('=');
				if (eq == std::string::npos)
					throw ParseError(ln.no, 1, "expected model=allowed|forbidden");
				auto v = kv.substr(eq + 1);
				if (v != "allowed" && v != "forbidden")
					throw ParseError(ln.no, 1, "expected allowed or forbidden");
				t.expect[kv.substr(0, eq)] = v == "allowed";
			}
		}
	}
	return t;
}

LitmusTest load_litmus(const std::string &path)
{
	std::ifstream in(path);
	if (!in)
		throw std::runtime_error("cannot open " + path);
	std::stringstream ss;
	ss << in.rdbuf();
	return parse_litmus(ss.str());
}

std::string print_expr(const Expr &e, const Thread &th, const Program &p)
{
	switch (e.kind) {
	case Expr::Kind::lit:
		return std::to_string(e.value);
	case Expr::Kind::loc:
		return p.locations.at(e.value);
	case Expr::Kind::reg:
		return th.regs.at(e.reg);
	case Expr::Kind::bin:
		return "(" + print_expr(*e.lhs, th, p) + e.op + print_expr(*e.rhs, th, p) + ")";
	}
	return "";
}

std::string print_litmus(const LitmusTest &t)
{
	const auto &p = t.program;
	std::ostringstream os;
	os << "prog \"" << t.name << "\"\n";
	os << "locations";
	for (auto &l : p.locations)
		os << ' ' << l;
	os << "\nvals 0.." << p.max_val << '\n';
	for (std::size_t i = 0; i < p.threads.size(); ++i) {
		const auto &th = p.threads[i];
		os << "thread " << i << ":\n";
		for (auto &in : th.code) {
			auto ex = [&](const Expr &e) { return print_expr(e, th, p); };
			os << "  ";
			switch (in.kind) {
			case Instr::Kind::assign:
				os << th.regs[in.reg] << " := " << ex(in.e1);
				break;
			case Instr::Kind::if_goto:
				os << "if " << ex(in.e1) << " goto " << in.target;
				break;
			case Instr::Kind::store:
				os << "w[" << to_string(in.mode_w) << "] " << ex(in.e1) << ' ' << ex(in.e2);
				break;
			case Instr::Kind::load:
				os << "r[" << to_string(in.mode_r) << "] " << th.regs[in.reg] << ' ' << ex(in.e1);
				break;
			case Instr::Kind::fadd:
			case Instr::Kind::cas:
				os << (in.kind == Instr::Kind::cas ? "cas[" : "fadd[") << to_string(in.mode_r) << ','
				   << to_string(in.mode_w) << (in.rmw == RmwMode::strong ? ",strong" : "") << "] "
				   << th.regs[in.reg] << ' ' << ex(in.e1) << ' ' << ex(in.e2);
				if (in.kind == Instr::Kind::cas)
					os << ' ' << ex(in.e3);
				break;
			case Instr::Kind::fence:
				os << "f[" << to_string(in.mode_r) << "]";
				break;
			}
			os << '\n';
		}
	}
	if (t.assertion) {
		os << "assert " << (t.assertion->forbidden ? "forbidden" : "allowed") << ":";
		if (t.assertion->conj.empty())
			os << " true";
		for (std::size_t i = 0; i < t.assertion->conj.size(); ++i) {
			const auto &a = t.assertion->conj[i];
			os << (i ? " /\\ " : " ");
			if (a.kind == Atom::Kind::loc)
				os << p.locations[a.idx];
			else
				os << a.tid << ':' << p.threads[a.tid].regs[a.idx];
			os << '=' << a.value;
		}
		os << '\n';
	}
	if (!t.expect.empty()) {
		os << "expect";
		for (auto &[k, v] : t.expect)
			os << ' ' << k << '=' << (v ? "allowed" : "forbidden");
		os << '\n';
	}
	return os.str();
}

bool eval_assertion(const Assertion &a, const std::vector<std::vector<Val>> &regs, const std::vector<Val> &mem)
{
	for (auto &at : a.conj) {
		Val v = at.kind == Atom::Kind::loc ? mem.at(at.idx) : regs.at(at.tid).at(at.idx);
		if (v != at.value)
			return false;
	}
	return true;
}

} // namespace immlab
