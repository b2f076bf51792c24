#pragma once

#include <functional>
#include <initializer_list>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "immlab/enumerate.hpp"
#include "immlab/models.hpp"

namespace support {

inline immlab::LitmusTest corpus(const std::string &file)
{
	return immlab::load_litmus(std::string(IMMLAB_CORPUS_DIR) + "/" + file);
}

inline std::string fixture(const std::string &file) { return std::string(IMMLAB_FIXTURE_DIR) + "/" + file; }

// Index of event (tid, sn); throws when absent.
inline std::size_t ev(const immlab::Execution &g, int tid, int sn)
{
	for (std::size_t i = 0; i < g.size(); ++i)
		if (g.ev[i].tid == tid && g.ev[i].whole == sn && g.ev[i].half == 0)
			return i;
	throw std::out_of_range("no event " + std::to_string(tid) + "." + std::to_string(sn));
}

// Init events plus the listed (tid, sn) events.
inline immlab::EventSet with_init(const immlab::Execution &g, std::initializer_list<std::pair<int, int>> es)
{
	auto s = g.init();
	for (auto [t, n] : es)
		s.insert(ev(g, t, n));
	return s;
}

inline bool rf_from(const immlab::Execution &g, std::pair<int, int> w, std::pair<int, int> r)
{
	return g.rf.contains(ev(g, w.first, w.second), ev(g, r.first, r.second));
}

// First candidate satisfying pred.
inline std::optional<immlab::Execution> find_graph(const immlab::Program &p,
						   const std::function<bool(const immlab::Execution &)> &pred)
{
	std::optional<immlab::Execution> out;
	immlab::for_each_candidate(p, immlab::effective_bounds(p, {}), [&](const immlab::Candidate &c) {
		if (!pred(c.g))
			return true;
		out = c.g;
		return false;
	});
	return out;
}

} // namespace support
