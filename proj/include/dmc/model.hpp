#pragma once

#include "dmc/probability.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dmc {

// Agents and actions are addressed by their position in the model.
// Names (1-based in the benchmarks) are only used for I/O.
enum class agent_id : std::uint32_t {};
enum class action_id : std::uint32_t {};

constexpr std::size_t idx(agent_id a) noexcept { return static_cast<std::size_t>(a); }
constexpr std::size_t idx(action_id a) noexcept { return static_cast<std::size_t>(a); }

// Index of a local state inside its agent's state list.
using local_index = std::uint32_t;

// One local state per agent, indexed by agent.
using global_state = std::vector<local_index>;

// A u-state: an assignment of local states to a nonempty set of agents.
// `domain` is strictly increasing; values[k] belongs to domain[k].
struct u_state {
  std::vector<agent_id> domain;
  std::vector<local_index> values;

  friend bool operator==(const u_state&, const u_state&) = default;
};

u_state as_u_state(const global_state& s);

// Restriction of `state` to the agents in `onto`. Throws domain_error if
// `onto` is empty or not a subset of the state's domain.
u_state project(const u_state& state, std::span<const agent_id> onto);

struct agent_def {
  std::string name;
  std::vector<std::string> states;
  std::string declared_initial;
  std::optional<local_index> initial;  // unset if declared_initial is not a state
};

struct outcome_spec {
  std::vector<local_index> target;
  exact_prob prob;
  std::string label;
};

// A synchronization action with its enabling set and per-row outcome
// distributions. Tuples are ordered by `loc`, which is strictly increasing.
class action_def {
 public:
  const std::string& name() const noexcept { return name_; }
  std::span<const agent_id> loc() const noexcept { return loc_; }
  std::size_t arity() const noexcept { return loc_.size(); }
  bool involves(agent_id a) const noexcept;
  // Position of `a` inside loc, or arity() if absent.
  std::size_t position_of(agent_id a) const noexcept;

  std::size_t row_count() const noexcept { return row_begin_.size() - 1; }
  std::span<const local_index> source(std::size_t row) const noexcept {
    return {sources_.data() + row * arity(), arity()};
  }
  std::uint32_t outcomes_begin(std::size_t row) const noexcept { return row_begin_[row]; }
  std::uint32_t outcomes_end(std::size_t row) const noexcept { return row_begin_[row + 1]; }
  std::uint32_t row_of(std::uint32_t outcome) const noexcept { return outcome_row_[outcome]; }

  std::size_t outcome_count() const noexcept { return probs_.size(); }
  std::span<const local_index> target(std::uint32_t outcome) const noexcept {
    return {targets_.data() + std::size_t{outcome} * arity(), arity()};
  }
  double prob(std::uint32_t outcome) const noexcept { return probs_[outcome]; }
  const exact_prob& exact(std::uint32_t outcome) const noexcept { return exact_[outcome]; }
  std::string_view label(std::uint32_t outcome) const;

  // Row whose source equals `tuple`, if any.
  std::optional<std::uint32_t> find_row(std::span<const local_index> tuple) const;

  // Same lookup, reading the loc components straight out of a global state.
  std::optional<std::uint32_t> find_row_at(const global_state& s) const;

  bool row_declared_enabled(std::size_t row) const { return declared_[row]; }
  const std::vector<std::vector<local_index>>& enabled_without_row() const noexcept {
    return enabled_without_row_;
  }

 private:
  friend class model_builder;

  std::optional<std::uint64_t> key_of(std::span<const local_index> tuple) const;
  std::string wide_key_of(std::span<const local_index> tuple) const;

  std::string name_;
  std::vector<agent_id> loc_;
  std::vector<std::uint64_t> radix_;
  bool radix_fits_ = true;

  std::vector<local_index> sources_;
  std::vector<std::uint32_t> row_begin_{0};
  std::vector<local_index> targets_;
  std::vector<double> probs_;
  std::vector<exact_prob> exact_;
  std::vector<std::uint32_t> outcome_row_;
  std::unordered_map<std::uint32_t, std::string> labels_;
  std::unordered_map<std::uint64_t, std::uint32_t> row_index_;
  std::unordered_map<std::string, std::uint32_t> row_index_wide_;
  std::vector<bool> declared_;
  std::vector<std::vector<local_index>> enabled_without_row_;
};

struct state_ref {
  agent_id agent;
  local_index local;
};

using ap_id = std::uint32_t;

// The full DMC: agents, synchronization actions and local valuations.
// Immutable once built; build through model_builder or the JSON reader.
class model {
 public:
  std::size_t agent_count() const noexcept { return agents_.size(); }
  std::size_t action_count() const noexcept { return actions_.size(); }
  const agent_def& agent(agent_id a) const { return agents_.at(idx(a)); }
  std::span<const agent_def> agents() const noexcept { return agents_; }
  const action_def& action(action_id a) const { return actions_.at(idx(a)); }
  std::span<const action_def> actions() const noexcept { return actions_; }

  std::optional<agent_id> find_agent(std::string_view name) const;
  std::optional<action_id> find_action(std::string_view name) const;
  std::optional<state_ref> find_state(std::string_view name) const;
  const std::string& state_name(agent_id a, local_index s) const;

  // Throws domain_error when some agent's declared initial state is unknown.
  global_state initial_state() const;

  // act(s) for local state s of agent a. Throws domain_error if s is not a
  // state of a.
  std::span<const action_id> act(agent_id a, local_index s) const;

  // The unique action of a local state in a valid model; nullopt when
  // |act(s)| != 1.
  std::optional<action_id> action_of(agent_id a, local_index s) const noexcept {
    const auto v = unique_action_[idx(a)][s];
    if (v < 0) return std::nullopt;
    return static_cast<action_id>(v);
  }

  // Atomic propositions. Every local state name is an AP of its agent in
  // addition to user-declared valuations.
  std::size_t ap_count() const noexcept { return ap_names_.size(); }
  const std::string& ap_name(ap_id p) const { return ap_names_.at(p); }
  std::optional<ap_id> find_ap(std::string_view name) const;
  // Agents whose valuations mention the AP; more than one is a validation error.
  std::span<const agent_id> ap_owners(ap_id p) const { return ap_owners_.at(p); }
  bool holds(agent_id a, local_index s, ap_id p) const;
  // User-declared valuation labels of a local state (state-name defaults excluded).
  std::span<const std::string> declared_valuation(agent_id a, local_index s) const;

  const std::map<std::string, std::string>& metadata() const noexcept { return metadata_; }

 private:
  friend class model_builder;

  std::vector<agent_def> agents_;
  std::vector<action_def> actions_;
  std::unordered_map<std::string, state_ref> state_lookup_;
  std::unordered_map<std::string, action_id> action_lookup_;
  std::vector<std::vector<std::vector<action_id>>> act_;
  std::vector<std::vector<std::int32_t>> unique_action_;
  std::vector<std::string> ap_names_;
  std::unordered_map<std::string, ap_id> ap_lookup_;
  std::vector<std::vector<agent_id>> ap_owners_;
  std::vector<std::vector<std::vector<ap_id>>> holds_;
  std::vector<std::vector<std::vector<std::string>>> declared_valuations_;
  std::map<std::string, std::string> metadata_;
};

// Incremental construction. Structural problems (unknown names, arity
// mismatches, duplicate rows or targets) throw parse_error immediately;
// semantic invariants are left to validate().
class model_builder {
 public:
  agent_id add_agent(std::string name, std::vector<std::string> states, std::string initial);

  // `loc` in any order; stored sorted. Tuples passed to add_row and
  // declare_enabled must follow the sorted order.
  action_id add_action(std::string name, std::vector<agent_id> loc);

  // Mark a tuple of en_a that has no distribution (yet). A later add_row
  // for the same tuple consumes the mark.
  void declare_enabled(action_id a, std::vector<local_index> source);

  void add_row(action_id a, std::span<const local_index> source, std::span<const outcome_spec> outcomes,
               bool declared_enabled = true);

  void add_valuation(agent_id a, local_index s, std::string ap);
  void set_metadata(std::string key, std::string value);

  std::size_t agent_count() const noexcept { return m_.agents_.size(); }
  const agent_def& agent(agent_id a) const { return m_.agents_.at(idx(a)); }
  const action_def& action(action_id a) const { return m_.actions_.at(idx(a)); }
  std::optional<agent_id> find_agent(std::string_view name) const;
  std::optional<state_ref> find_state(std::string_view name) const;

  model build() &&;

 private:
  model m_;
  std::vector<std::set<std::vector<local_index>>> pending_enabled_;
};

enum class violation_kind {
  missing_initial,
  nondeterministic_state,  // |act(s)| > 1
  state_without_action,    // |act(s)| = 0
  distribution_sum,
  probability_range,
  enabled_without_distribution,
  distribution_without_enabled,
  empty_enabled_set,
  ap_overlap,
};

std::string_view to_string(violation_kind k);

struct violation {
  violation_kind kind;
  std::string message;
  std::optional<agent_id> agent;
  std::optional<local_index> state;
  std::optional<action_id> action;
};

struct validation_report {
  std::vector<violation> errors;
  std::vector<violation> warnings;
  bool ok() const noexcept { return errors.empty(); }
};

struct validation_options {
  // Compare distribution sums exactly instead of within `tolerance`.
  bool exact = false;
  // Report states with empty act(s) as warnings rather than errors.
  bool terminal_states_are_warnings = false;
  double tolerance = 1e-9;
};

validation_report validate(const model& m, const validation_options& opts = {});

}  // namespace dmc
