#pragma once

// Independent reference implementations used by the tests. Nothing here
// calls the semantics, measure or logic code it is meant to check; only the
// model accessors are shared.

#include "dmc/model.hpp"
#include "dmc/semantics.hpp"

#include <map>
#include <random>
#include <vector>

namespace dmc::testing {

struct random_dmc_options {
  std::size_t max_agents = 4;
  std::size_t max_states = 4;
  std::size_t max_outcomes = 3;
  std::size_t extra_actions = 3;
};

// A random model that passes validate(): every local state belongs to the
// enabling set of exactly one action and every enabled tuple has a
// distribution. Probabilities are small exact fractions.
model random_dmc(std::mt19937_64& rng, const random_dmc_options& opts = {});

// Enabled events found by scanning every action row.
std::vector<event> brute_enabled_events(const model& m, const global_state& s);

// Maximal steps by exhaustive search over subsets of enabled events.
std::vector<step> brute_maximal_steps(const model& m, const global_state& s);

// Successor distribution of the global chain at s built from the brute
// maximal steps; a deadlock maps to itself with probability 1.
std::map<global_state, rational> brute_chain_row(const model& m, const global_state& s);

// Exact probability that the first `bound` moves of `agent` in a run of
// maximal steps visit local state `target` (position 0 included).
rational brute_eventually(const model& m, agent_id agent, local_index target, std::uint32_t bound);

// Uniformly random walk of `length` events in the interleaved system,
// stopping early at a deadlock.
std::vector<event> random_walk(const model& m, const global_state& start, std::size_t length, std::mt19937_64& rng);

}  // namespace dmc::testing
