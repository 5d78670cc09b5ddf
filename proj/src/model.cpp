#include "dmc/model.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace dmc {

u_state as_u_state(const global_state& s) {
  u_state out;
  out.domain.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.domain.push_back(static_cast<agent_id>(i));
  out.values = s;
  return out;
}

u_state project(const u_state& state, std::span<const agent_id> onto) {
  if (onto.empty()) throw domain_error("projection onto an empty agent set");
  u_state out;
  out.domain.assign(onto.begin(), onto.end());
  std::sort(out.domain.begin(), out.domain.end());
  out.domain.erase(std::unique(out.domain.begin(), out.domain.end()), out.domain.end());
  out.values.reserve(out.domain.size());
  for (const auto a : out.domain) {
    const auto it = std::lower_bound(state.domain.begin(), state.domain.end(), a);
    if (it == state.domain.end() || *it != a)
      throw domain_error("projection onto agent " + std::to_string(idx(a) + 1) + " outside the state's domain");
    out.values.push_back(state.values[static_cast<std::size_t>(it - state.domain.begin())]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// action_def

bool action_def::involves(agent_id a) const noexcept { return std::binary_search(loc_.begin(), loc_.end(), a); }

std::size_t action_def::position_of(agent_id a) const noexcept {
  const auto it = std::lower_bound(loc_.begin(), loc_.end(), a);
  if (it == loc_.end() || *it != a) return arity();
  return static_cast<std::size_t>(it - loc_.begin());
}

std::string_view action_def::label(std::uint32_t outcome) const {
  const auto it = labels_.find(outcome);
  return it == labels_.end() ? std::string_view{} : std::string_view{it->second};
}

std::optional<std::uint64_t> action_def::key_of(std::span<const local_index> tuple) const {
  if (!radix_fits_) return std::nullopt;
  std::uint64_t key = 0;
  for (std::size_t k = 0; k < tuple.size(); ++k) key = key * radix_[k] + tuple[k];
  return key;
}

std::string action_def::wide_key_of(std::span<const local_index> tuple) const {
  return std::string(reinterpret_cast<const char*>(tuple.data()), tuple.size() * sizeof(local_index));
}

std::optional<std::uint32_t> action_def::find_row(std::span<const local_index> tuple) const {
  if (tuple.size() != arity()) return std::nullopt;
  for (std::size_t k = 0; k < tuple.size(); ++k)
    if (tuple[k] >= radix_[k]) return std::nullopt;
  if (radix_fits_) {
    const auto it = row_index_.find(*key_of(tuple));
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
  }
  const auto it = row_index_wide_.find(wide_key_of(tuple));
  if (it == row_index_wide_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> action_def::find_row_at(const global_state& s) const {
  if (radix_fits_) {
    std::uint64_t key = 0;
    for (std::size_t k = 0; k < loc_.size(); ++k) key = key * radix_[k] + s[idx(loc_[k])];
    const auto it = row_index_.find(key);
    if (it == row_index_.end()) return std::nullopt;
    return it->second;
  }
  std::vector<local_index> tuple(loc_.size());
  for (std::size_t k = 0; k < loc_.size(); ++k) tuple[k] = s[idx(loc_[k])];
  return find_row(tuple);
}

// ---------------------------------------------------------------------------
// model

std::optional<agent_id> model::find_agent(std::string_view name) const {
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (agents_[i].name == name) return static_cast<agent_id>(i);
  return std::nullopt;
}

std::optional<action_id> model::find_action(std::string_view name) const {
  const auto it = action_lookup_.find(std::string(name));
  if (it == action_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<state_ref> model::find_state(std::string_view name) const {
  const auto it = state_lookup_.find(std::string(name));
  if (it == state_lookup_.end()) return std::nullopt;
  return it->second;
}

const std::string& model::state_name(agent_id a, local_index s) const {
  const auto& states = agent(a).states;
  if (s >= states.size()) throw domain_error("local state index out of range for agent " + agent(a).name);
  return states[s];
}

global_state model::initial_state() const {
  global_state s(agents_.size());
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!agents_[i].initial)
      throw domain_error("agent " + agents_[i].name + " has unknown initial state '" + agents_[i].declared_initial + "'");
    s[i] = *agents_[i].initial;
  }
  return s;
}

std::span<const action_id> model::act(agent_id a, local_index s) const {
  if (idx(a) >= agents_.size()) throw domain_error("unknown agent");
  if (s >= act_[idx(a)].size())
    throw domain_error("local state " + std::to_string(s) + " is not owned by agent " + agents_[idx(a)].name);
  return act_[idx(a)][s];
}

std::optional<ap_id> model::find_ap(std::string_view name) const {
  const auto it = ap_lookup_.find(std::string(name));
  if (it == ap_lookup_.end()) return std::nullopt;
  return it->second;
}

bool model::holds(agent_id a, local_index s, ap_id p) const {
  const auto& v = holds_[idx(a)][s];
  return std::binary_search(v.begin(), v.end(), p);
}

std::span<const std::string> model::declared_valuation(agent_id a, local_index s) const {
  return declared_valuations_.at(idx(a)).at(s);
}

// ---------------------------------------------------------------------------
// model_builder

agent_id model_builder::add_agent(std::string name, std::vector<std::string> states, std::string initial) {
  if (!m_.actions_.empty()) throw parse_error("agents must be declared before actions");
  if (name.empty()) throw parse_error("agent with empty name");
  if (find_agent(name)) throw parse_error("duplicate agent '" + name + "'");
  if (states.empty()) throw parse_error("agent '" + name + "' has no local states");
  const auto id = static_cast<agent_id>(m_.agents_.size());
  agent_def def;
  def.name = std::move(name);
  for (local_index k = 0; k < states.size(); ++k) {
    if (states[k].empty()) throw parse_error("agent '" + def.name + "' has a state with an empty name");
    if (!m_.state_lookup_.emplace(states[k], state_ref{id, k}).second)
      throw parse_error("local state name '" + states[k] + "' is not unique");
    if (states[k] == initial) def.initial = k;
  }
  def.states = std::move(states);
  def.declared_initial = std::move(initial);
  m_.agents_.push_back(std::move(def));
  m_.declared_valuations_.emplace_back(m_.agents_.back().states.size());
  return id;
}

action_id model_builder::add_action(std::string name, std::vector<agent_id> loc) {
  if (name.empty()) throw parse_error("action with empty name");
  if (m_.action_lookup_.count(name)) throw parse_error("duplicate action '" + name + "'");
  if (loc.empty()) throw parse_error("action '" + name + "' has an empty loc");
  std::sort(loc.begin(), loc.end());
  if (std::adjacent_find(loc.begin(), loc.end()) != loc.end())
    throw parse_error("action '" + name + "' lists an agent twice in loc");
  for (const auto a : loc)
    if (idx(a) >= m_.agents_.size()) throw parse_error("action '" + name + "' refers to an unknown agent");

  const auto id = static_cast<action_id>(m_.actions_.size());
  action_def def;
  def.name_ = name;
  def.loc_ = std::move(loc);
  std::uint64_t product = 1;
  for (const auto a : def.loc_) {
    const std::uint64_t r = m_.agents_[idx(a)].states.size();
    def.radix_.push_back(r);
    if (product > std::numeric_limits<std::uint64_t>::max() / r) def.radix_fits_ = false;
    else product *= r;
  }
  m_.actions_.push_back(std::move(def));
  m_.action_lookup_.emplace(std::move(name), id);
  pending_enabled_.emplace_back();
  return id;
}

void model_builder::declare_enabled(action_id a, std::vector<local_index> source) {
  auto& def = m_.actions_.at(idx(a));
  if (source.size() != def.arity()) throw parse_error("enabled tuple of '" + def.name_ + "' has wrong arity");
  for (std::size_t k = 0; k < source.size(); ++k)
    if (source[k] >= def.radix_[k]) throw parse_error("enabled tuple of '" + def.name_ + "' has an out-of-range state");
  if (const auto row = def.find_row(source)) {
    def.declared_[*row] = true;
    return;
  }
  auto& pending = pending_enabled_[idx(a)];
  if (!pending.insert(std::move(source)).second)
    throw parse_error("action '" + def.name_ + "' lists an enabled tuple twice");
}

void model_builder::add_row(action_id a, std::span<const local_index> source, std::span<const outcome_spec> outcomes,
                            bool declared_enabled) {
  auto& def = m_.actions_.at(idx(a));
  const auto n = def.arity();
  if (source.size() != n) throw parse_error("distribution row of '" + def.name_ + "' has wrong source arity");
  for (std::size_t k = 0; k < n; ++k)
    if (source[k] >= def.radix_[k])
      throw parse_error("distribution row of '" + def.name_ + "' has an out-of-range source state");
  if (def.find_row(source)) throw parse_error("action '" + def.name_ + "' has two distribution rows for one source");

  const auto row = static_cast<std::uint32_t>(def.row_count());
  for (std::size_t o = 0; o < outcomes.size(); ++o) {
    const auto& out = outcomes[o];
    if (out.target.size() != n) throw parse_error("outcome of '" + def.name_ + "' has wrong target arity");
    for (std::size_t k = 0; k < n; ++k)
      if (out.target[k] >= def.radix_[k])
        throw parse_error("outcome of '" + def.name_ + "' has an out-of-range target state");
    for (std::size_t p = 0; p < o; ++p)
      if (outcomes[p].target == out.target)
        throw parse_error("action '" + def.name_ + "' lists the same target twice in one row");
  }

  def.sources_.insert(def.sources_.end(), source.begin(), source.end());
  for (const auto& out : outcomes) {
    const auto oid = static_cast<std::uint32_t>(def.probs_.size());
    def.targets_.insert(def.targets_.end(), out.target.begin(), out.target.end());
    def.probs_.push_back(out.prob.to_double());
    def.exact_.push_back(out.prob);
    def.outcome_row_.push_back(row);
    if (!out.label.empty()) def.labels_.emplace(oid, out.label);
  }
  def.row_begin_.push_back(static_cast<std::uint32_t>(def.probs_.size()));

  auto& pending = pending_enabled_[idx(a)];
  const auto it = pending.find(std::vector<local_index>(source.begin(), source.end()));
  if (it != pending.end()) {
    pending.erase(it);
    declared_enabled = true;
  }
  def.declared_.push_back(declared_enabled);
  if (def.radix_fits_) def.row_index_.emplace(*def.key_of(source), row);
  else def.row_index_wide_.emplace(def.wide_key_of(source), row);
}

void model_builder::add_valuation(agent_id a, local_index s, std::string ap) {
  if (idx(a) >= m_.agents_.size() || s >= m_.agents_[idx(a)].states.size())
    throw parse_error("valuation for an unknown state");
  if (ap.empty()) throw parse_error("empty atomic proposition name");
  auto& v = m_.declared_valuations_[idx(a)][s];
  if (std::find(v.begin(), v.end(), ap) == v.end()) v.push_back(std::move(ap));
}

void model_builder::set_metadata(std::string key, std::string value) { m_.metadata_[std::move(key)] = std::move(value); }

std::optional<agent_id> model_builder::find_agent(std::string_view name) const { return m_.find_agent(name); }

std::optional<state_ref> model_builder::find_state(std::string_view name) const { return m_.find_state(name); }

model model_builder::build() && {
  auto& m = m_;
  for (std::size_t a = 0; a < m.actions_.size(); ++a)
    m.actions_[a].enabled_without_row_.assign(pending_enabled_[a].begin(), pending_enabled_[a].end());

  // act(s) from en_a, which includes enabled tuples lacking a row.
  m.act_.assign(m.agents_.size(), {});
  for (std::size_t i = 0; i < m.agents_.size(); ++i) m.act_[i].resize(m.agents_[i].states.size());
  for (std::size_t a = 0; a < m.actions_.size(); ++a) {
    const auto& def = m.actions_[a];
    const auto add = [&](std::span<const local_index> tuple) {
      for (std::size_t k = 0; k < def.arity(); ++k) {
        auto& bucket = m.act_[idx(def.loc_[k])][tuple[k]];
        const auto id = static_cast<action_id>(a);
        if (bucket.empty() || bucket.back() != id) bucket.push_back(id);
      }
    };
    for (std::size_t r = 0; r < def.row_count(); ++r) add(def.source(r));
    for (const auto& t : def.enabled_without_row_) add(t);
  }
  m.unique_action_.assign(m.agents_.size(), {});
  for (std::size_t i = 0; i < m.agents_.size(); ++i) {
    auto& u = m.unique_action_[i];
    u.resize(m.act_[i].size());
    for (std::size_t s = 0; s < u.size(); ++s) {
      auto& bucket = m.act_[i][s];
      std::sort(bucket.begin(), bucket.end());
      bucket.erase(std::unique(bucket.begin(), bucket.end()), bucket.end());
      u[s] = bucket.size() == 1 ? static_cast<std::int32_t>(bucket.front()) : -1;
    }
  }

  // APs: state names first, then declared valuations in declaration order.
  const auto intern_ap = [&](const std::string& name) {
    const auto [it, inserted] = m.ap_lookup_.emplace(name, static_cast<ap_id>(m.ap_names_.size()));
    if (inserted) {
      m.ap_names_.push_back(name);
      m.ap_owners_.emplace_back();
    }
    return it->second;
  };
  m.holds_.assign(m.agents_.size(), {});
  for (std::size_t i = 0; i < m.agents_.size(); ++i) {
    const auto agent = static_cast<agent_id>(i);
    m.holds_[i].resize(m.agents_[i].states.size());
    for (local_index s = 0; s < m.agents_[i].states.size(); ++s) {
      auto& h = m.holds_[i][s];
      h.push_back(intern_ap(m.agents_[i].states[s]));
      for (const auto& ap : m.declared_valuations_[i][s]) h.push_back(intern_ap(ap));
      std::sort(h.begin(), h.end());
      h.erase(std::unique(h.begin(), h.end()), h.end());
      for (const auto p : h) {
        auto& owners = m.ap_owners_[p];
        if (std::find(owners.begin(), owners.end(), agent) == owners.end()) owners.push_back(agent);
      }
    }
  }
  return std::move(m_);
}

// ---------------------------------------------------------------------------
// validation

std::string_view to_string(violation_kind k) {
  switch (k) {
    case violation_kind::missing_initial: return "missing_initial";
    case violation_kind::nondeterministic_state: return "nondeterministic_state";
    case violation_kind::state_without_action: return "state_without_action";
    case violation_kind::distribution_sum: return "distribution_sum";
    case violation_kind::probability_range: return "probability_range";
    case violation_kind::enabled_without_distribution: return "enabled_without_distribution";
    case violation_kind::distribution_without_enabled: return "distribution_without_enabled";
    case violation_kind::empty_enabled_set: return "empty_enabled_set";
    case violation_kind::ap_overlap: return "ap_overlap";
  }
  return "unknown";
}

namespace {

std::string tuple_text(const model& m, const action_def& def, std::span<const local_index> tuple) {
  std::string out = "(";
  for (std::size_t k = 0; k < tuple.size(); ++k) {
    if (k) out += ",";
    out += m.state_name(def.loc()[k], tuple[k]);
  }
  return out + ")";
}

}  // namespace

validation_report validate(const model& m, const validation_options& opts) {
  validation_report report;

  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto& ag = m.agents()[i];
    if (!ag.initial)
      report.errors.push_back({violation_kind::missing_initial,
                               "agent " + ag.name + ": initial state '" + ag.declared_initial + "' is not one of its states",
                               static_cast<agent_id>(i), std::nullopt, std::nullopt});
  }

  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto a = static_cast<agent_id>(i);
    for (local_index s = 0; s < m.agents()[i].states.size(); ++s) {
      const auto acts = m.act(a, s);
      if (acts.size() == 1) continue;
      if (acts.empty()) {
        violation v{violation_kind::state_without_action,
                    "agent " + m.agents()[i].name + ", state " + m.state_name(a, s) + ": no action is compatible (|act(s)| = 0)",
                    a, s, std::nullopt};
        (opts.terminal_states_are_warnings ? report.warnings : report.errors).push_back(std::move(v));
        continue;
      }
      std::string names;
      for (const auto act : acts) names += (names.empty() ? "" : ", ") + m.action(act).name();
      report.errors.push_back({violation_kind::nondeterministic_state,
                               "agent " + m.agents()[i].name + ", state " + m.state_name(a, s) + ": |act(s)| = " +
                                   std::to_string(acts.size()) + " {" + names + "}",
                               a, s, std::nullopt});
    }
  }

  for (std::size_t ai = 0; ai < m.action_count(); ++ai) {
    const auto aid = static_cast<action_id>(ai);
    const auto& def = m.actions()[ai];
    if (def.row_count() == 0 && def.enabled_without_row().empty())
      report.warnings.push_back({violation_kind::empty_enabled_set, "action " + def.name() + " is never enabled",
                                 std::nullopt, std::nullopt, aid});
    for (const auto& t : def.enabled_without_row())
      report.errors.push_back({violation_kind::enabled_without_distribution,
                               "action " + def.name() + ": enabled at " + tuple_text(m, def, t) + " but has no distribution",
                               std::nullopt, std::nullopt, aid});
    for (std::size_t r = 0; r < def.row_count(); ++r) {
      const auto where = tuple_text(m, def, def.source(r));
      if (!def.row_declared_enabled(r))
        report.errors.push_back({violation_kind::distribution_without_enabled,
                                 "action " + def.name() + ": distribution given at " + where + " which is not in en_a",
                                 std::nullopt, std::nullopt, aid});
      rational exact_sum = 0;
      double sum = 0.0;
      bool range_ok = true;
      for (auto o = def.outcomes_begin(r); o < def.outcomes_end(r); ++o) {
        const auto& p = def.exact(o);
        if (p.num() < 0 || p.num() > p.den()) range_ok = false;
        exact_sum += p.to_rational();
        sum += p.to_double();
      }
      if (!range_ok)
        report.errors.push_back({violation_kind::probability_range,
                                 "action " + def.name() + " at " + where + ": probability outside [0, 1]", std::nullopt,
                                 std::nullopt, aid});
      const bool sum_ok = opts.exact ? exact_sum == 1 : std::abs(sum - 1.0) <= opts.tolerance;
      if (!sum_ok)
        report.errors.push_back({violation_kind::distribution_sum,
                                 "action " + def.name() + " at " + where + ": distribution sums to " +
                                     (opts.exact ? exact_sum.str() : std::to_string(sum)),
                                 std::nullopt, std::nullopt, aid});
    }
  }

  for (ap_id p = 0; p < m.ap_count(); ++p) {
    const auto owners = m.ap_owners(p);
    if (owners.size() < 2) continue;
    std::string names;
    for (const auto a : owners) names += (names.empty() ? "" : ", ") + m.agent(a).name;
    report.errors.push_back({violation_kind::ap_overlap,
                             "atomic proposition " + m.ap_name(p) + " belongs to several agents {" + names + "}",
                             owners.front(), std::nullopt, std::nullopt});
  }
  return report;
}

}  // namespace dmc
