#pragma once

#include "dmc/model.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace dmc {

// An event (v, a, v'): an outcome of action `a` in the distribution row of
// source v. The outcome index determines the row.
struct event {
  action_id action{};
  std::uint32_t outcome = 0;

  friend bool operator==(const event&, const event&) = default;
  friend auto operator<=>(const event&, const event&) = default;
};

struct event_hash {
  std::size_t operator()(const event& e) const noexcept {
    return (static_cast<std::size_t>(idx(e.action)) << 32) ^ e.outcome;
  }
};

inline std::span<const agent_id> loc(const model& m, const event& e) { return m.action(e.action).loc(); }
inline double prob(const model& m, const event& e) { return m.action(e.action).prob(e.outcome); }
inline const exact_prob& exact(const model& m, const event& e) { return m.action(e.action).exact(e.outcome); }
u_state source_of(const model& m, const event& e);
u_state target_of(const model& m, const event& e);

// Every event of the model: triples with positive probability.
std::vector<event> events_of(const model& m);

// e is enabled at s iff s restricted to loc(e) is e's source.
bool is_enabled(const model& m, const global_state& s, const event& e);

// Actions enabled at s, in declaration order, with the matching row.
struct enabled_action {
  action_id action;
  std::uint32_t row;
};
std::vector<enabled_action> enabled_actions(const model& m, const global_state& s);

std::vector<event> enabled_events(const model& m, const global_state& s);
bool is_deadlock(const model& m, const global_state& s);

// Fires e at s; throws domain_error if e is not enabled at s.
std::pair<global_state, double> fire(const model& m, const global_state& s, const event& e);

// Overwrites the loc(e) components of s with e's target. No enabling check.
void apply_event(const model& m, global_state& s, const event& e);

// A set of pairwise independent events. Stored sorted by (action, outcome).
using step = std::vector<event>;

// All maximal steps at s: one outcome per enabled action, all combinations.
std::vector<step> maximal_steps(const model& m, const global_state& s);

// The u-successor of s. Throws domain_error unless u is a maximal step at s.
global_state u_successor(const model& m, const global_state& s, const step& u);

// Hash-consed global states with dense ids. Move-only.
class state_interner {
 public:
  explicit state_interner(std::size_t width);
  state_interner(state_interner&&) noexcept;
  state_interner& operator=(state_interner&&) noexcept;
  ~state_interner();

  // Returns (id, inserted).
  std::pair<std::uint32_t, bool> intern(std::span<const local_index> s);
  std::optional<std::uint32_t> find(std::span<const local_index> s) const;
  std::span<const local_index> operator[](std::uint32_t id) const;
  global_state state(std::uint32_t id) const {
    const auto v = (*this)[id];
    return {v.begin(), v.end()};
  }
  std::size_t size() const noexcept;

 private:
  struct impl;
  std::unique_ptr<impl> p_;
};

inline constexpr std::size_t default_max_states = 1'000'000;

template <class Num>
class basic_markov_chain;

// Breadth-first construction over maximal steps. Throws
// state_budget_exceeded once more than max_states states are discovered.
template <class Num>
basic_markov_chain<Num> build_markov_chain_as(const model& m, std::size_t max_states = default_max_states);

template <class Num>
struct chain_edge {
  std::uint32_t target;
  Num prob;
};

// The global Markov chain restricted to states reachable from the initial
// state. Deadlocks carry a probability-1 self-loop.
template <class Num>
class basic_markov_chain {
 public:
  explicit basic_markov_chain(std::size_t width) : states_(width) {}

  std::size_t size() const noexcept { return states_.size(); }
  std::uint32_t initial() const noexcept { return 0; }
  global_state state(std::uint32_t id) const { return states_.state(id); }
  std::optional<std::uint32_t> find(const global_state& s) const { return states_.find(s); }
  std::span<const chain_edge<Num>> row(std::uint32_t id) const { return rows_.at(id); }
  bool is_deadlock(std::uint32_t id) const { return deadlock_.at(id); }
  std::size_t edge_count() const;

  // M(s, s'), zero if s' is not a successor.
  Num transition(const global_state& from, const global_state& to) const;

 private:
  template <class N>
  friend basic_markov_chain<N> build_markov_chain_as(const model&, std::size_t);

  state_interner states_;
  std::vector<std::vector<chain_edge<Num>>> rows_;
  std::vector<bool> deadlock_;
};

using markov_chain = basic_markov_chain<double>;
using exact_markov_chain = basic_markov_chain<rational>;

inline markov_chain build_markov_chain(const model& m, std::size_t max_states = default_max_states) {
  return build_markov_chain_as<double>(m, max_states);
}

struct deadlock_witness {
  global_state state;
  std::vector<event> path;  // shortest event sequence from the initial state
};

// Breadth-first search of the interleaved transition system.
std::vector<deadlock_witness> find_reachable_deadlocks(const model& m, std::size_t max_states = default_max_states);

// Number of global states reachable in the interleaved transition system.
std::size_t count_reachable_states(const model& m, std::size_t max_states = default_max_states);

// "(in1,in2)"
std::string format_state(const model& m, const global_state& s);
// Label if the model gives one, else "a1:in1->H1" (tuples joined with '|').
std::string event_name(const model& m, const event& e);

// Plain-text chain export, one "src dst prob" line per edge.
std::string chain_to_text(const model& m, const markov_chain& c);
std::string chain_to_json(const model& m, const markov_chain& c);

}  // namespace dmc
