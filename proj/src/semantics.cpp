#include "dmc/semantics.hpp"

#include "dmc/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <deque>

namespace dmc {

u_state source_of(const model& m, const event& e) {
  const auto& def = m.action(e.action);
  const auto src = def.source(def.row_of(e.outcome));
  return {{def.loc().begin(), def.loc().end()}, {src.begin(), src.end()}};
}

u_state target_of(const model& m, const event& e) {
  const auto& def = m.action(e.action);
  const auto tgt = def.target(e.outcome);
  return {{def.loc().begin(), def.loc().end()}, {tgt.begin(), tgt.end()}};
}

std::vector<event> events_of(const model& m) {
  std::vector<event> out;
  for (std::size_t a = 0; a < m.action_count(); ++a) {
    const auto& def = m.actions()[a];
    for (std::uint32_t o = 0; o < def.outcome_count(); ++o)
      if (def.exact(o).num() > 0) out.push_back({static_cast<action_id>(a), o});
  }
  return out;
}

bool is_enabled(const model& m, const global_state& s, const event& e) {
  const auto& def = m.action(e.action);
  const auto src = def.source(def.row_of(e.outcome));
  for (std::size_t k = 0; k < def.arity(); ++k)
    if (s[idx(def.loc()[k])] != src[k]) return false;
  return def.exact(e.outcome).num() > 0;
}

std::vector<enabled_action> enabled_actions(const model& m, const global_state& s) {
  std::vector<enabled_action> out;
  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto agent = static_cast<agent_id>(i);
    const auto a = m.action_of(agent, s[i]);
    if (!a) continue;
    const auto& def = m.action(*a);
    if (def.loc().front() != agent) continue;
    if (const auto row = def.find_row_at(s)) out.push_back({*a, *row});
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.action < y.action; });
  return out;
}

std::vector<event> enabled_events(const model& m, const global_state& s) {
  std::vector<event> out;
  for (const auto& ea : enabled_actions(m, s)) {
    const auto& def = m.action(ea.action);
    for (auto o = def.outcomes_begin(ea.row); o < def.outcomes_end(ea.row); ++o)
      if (def.exact(o).num() > 0) out.push_back({ea.action, o});
  }
  return out;
}

bool is_deadlock(const model& m, const global_state& s) { return enabled_events(m, s).empty(); }

void apply_event(const model& m, global_state& s, const event& e) {
  const auto& def = m.action(e.action);
  const auto tgt = def.target(e.outcome);
  for (std::size_t k = 0; k < def.arity(); ++k) s[idx(def.loc()[k])] = tgt[k];
}

std::pair<global_state, double> fire(const model& m, const global_state& s, const event& e) {
  if (!is_enabled(m, s, e))
    throw domain_error("event " + event_name(m, e) + " is not enabled at " + format_state(m, s));
  global_state next = s;
  apply_event(m, next, e);
  return {std::move(next), prob(m, e)};
}

namespace {

// Positive-probability outcomes of each enabled action.
std::vector<std::vector<event>> outcome_choices(const model& m, const global_state& s) {
  std::vector<std::vector<event>> choices;
  for (const auto& ea : enabled_actions(m, s)) {
    const auto& def = m.action(ea.action);
    auto& c = choices.emplace_back();
    for (auto o = def.outcomes_begin(ea.row); o < def.outcomes_end(ea.row); ++o)
      if (def.exact(o).num() > 0) c.push_back({ea.action, o});
    if (c.empty()) choices.pop_back();
  }
  return choices;
}

template <class F>
void for_each_combination(const std::vector<std::vector<event>>& choices, F&& f) {
  if (choices.empty()) return;
  std::vector<std::size_t> pick(choices.size(), 0);
  step u(choices.size());
  while (true) {
    for (std::size_t k = 0; k < choices.size(); ++k) u[k] = choices[k][pick[k]];
    f(u);
    std::size_t k = choices.size();
    while (k > 0) {
      --k;
      if (++pick[k] < choices[k].size()) break;
      pick[k] = 0;
      if (k == 0) return;
    }
  }
}

bool overlaps(std::span<const agent_id> a, std::span<const agent_id> b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

}  // namespace

std::vector<step> maximal_steps(const model& m, const global_state& s) {
  std::vector<step> out;
  for_each_combination(outcome_choices(m, s), [&](const step& u) { out.push_back(u); });
  return out;
}

global_state u_successor(const model& m, const global_state& s, const step& u) {
  if (u.empty()) throw domain_error("empty step");
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!is_enabled(m, s, u[k]))
      throw domain_error("step event " + event_name(m, u[k]) + " is not enabled at " + format_state(m, s));
    for (std::size_t j = 0; j < k; ++j)
      if (overlaps(loc(m, u[j]), loc(m, u[k]))) throw domain_error("step events are not independent");
  }
  for (const auto& e : enabled_events(m, s)) {
    if (std::find(u.begin(), u.end(), e) != u.end()) continue;
    const bool blocked = std::any_of(u.begin(), u.end(), [&](const event& x) { return overlaps(loc(m, x), loc(m, e)); });
    if (!blocked) throw domain_error("step is not maximal at " + format_state(m, s));
  }
  global_state next = s;
  for (const auto& e : u) apply_event(m, next, e);
  return next;
}

// ---------------------------------------------------------------------------
// state_interner

struct state_interner::impl {
  static constexpr std::uint32_t probe_id = 0xffffffffu;

  struct hasher {
    const impl* self;
    std::size_t operator()(std::uint32_t id) const noexcept {
      std::size_t h = 0xcbf29ce484222325ull;
      for (const auto v : self->view(id)) {
        h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      }
      return h;
    }
  };
  struct equal {
    const impl* self;
    bool operator()(std::uint32_t a, std::uint32_t b) const noexcept {
      const auto x = self->view(a);
      const auto y = self->view(b);
      return std::equal(x.begin(), x.end(), y.begin(), y.end());
    }
  };

  explicit impl(std::size_t w) : width(w), ids(16, hasher{this}, equal{this}) {}

  std::span<const local_index> view(std::uint32_t id) const noexcept {
    if (id == probe_id) return probe;
    return {data.data() + std::size_t{id} * width, width};
  }

  std::size_t width;
  std::size_t count = 0;
  std::vector<local_index> data;
  mutable std::span<const local_index> probe;
  std::unordered_set<std::uint32_t, hasher, equal> ids;
};

state_interner::state_interner(std::size_t width) : p_(std::make_unique<impl>(width)) {}
state_interner::state_interner(state_interner&&) noexcept = default;
state_interner& state_interner::operator=(state_interner&&) noexcept = default;
state_interner::~state_interner() = default;

std::pair<std::uint32_t, bool> state_interner::intern(std::span<const local_index> s) {
  if (s.size() != p_->width) throw domain_error("state width mismatch");
  if (const auto id = find(s)) return {*id, false};
  const auto id = static_cast<std::uint32_t>(p_->count);
  p_->data.insert(p_->data.end(), s.begin(), s.end());
  ++p_->count;
  p_->ids.insert(id);
  return {id, true};
}

std::optional<std::uint32_t> state_interner::find(std::span<const local_index> s) const {
  if (s.size() != p_->width) return std::nullopt;
  p_->probe = s;
  const auto it = p_->ids.find(impl::probe_id);
  p_->probe = {};
  if (it == p_->ids.end()) return std::nullopt;
  return *it;
}

std::span<const local_index> state_interner::operator[](std::uint32_t id) const { return p_->view(id); }

std::size_t state_interner::size() const noexcept { return p_->count; }

// ---------------------------------------------------------------------------
// Markov chain

template <class Num>
std::size_t basic_markov_chain<Num>::edge_count() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

template <class Num>
Num basic_markov_chain<Num>::transition(const global_state& from, const global_state& to) const {
  const auto f = find(from);
  const auto t = find(to);
  if (!f || !t) return Num(0);
  for (const auto& e : rows_[*f])
    if (e.target == *t) return e.prob;
  return Num(0);
}

template <class Num>
basic_markov_chain<Num> build_markov_chain_as(const model& m, std::size_t max_states) {
  basic_markov_chain<Num> chain(m.agent_count());
  const auto init = m.initial_state();
  chain.states_.intern(init);
  for (std::uint32_t id = 0; id < chain.states_.size(); ++id) {
    const auto s = chain.states_.state(id);
    const auto choices = outcome_choices(m, s);
    std::vector<chain_edge<Num>> row;
    if (choices.empty()) {
      row.push_back({id, Num(1)});
      chain.deadlock_.push_back(true);
    } else {
      chain.deadlock_.push_back(false);
      global_state next;
      for_each_combination(choices, [&](const step& u) {
        next = s;
        Num p(1);
        for (const auto& e : u) {
          apply_event(m, next, e);
          p *= prob_traits<Num>::from(exact(m, e));
        }
        const auto [target, inserted] = chain.states_.intern(next);
        if (inserted && chain.states_.size() > max_states)
          throw state_budget_exceeded("Markov chain exceeds " + std::to_string(max_states) + " states", max_states);
        row.push_back({target, std::move(p)});
      });
    }
    chain.rows_.push_back(std::move(row));
  }
  return chain;
}

template class basic_markov_chain<double>;
template class basic_markov_chain<rational>;
template markov_chain build_markov_chain_as<double>(const model&, std::size_t);
template exact_markov_chain build_markov_chain_as<rational>(const model&, std::size_t);

// ---------------------------------------------------------------------------
// Interleaved reachability

namespace {

struct ts_search {
  state_interner states;
  std::vector<std::uint32_t> parent;
  std::vector<event> via;
  std::vector<std::uint32_t> deadlocks;
};

ts_search explore_ts(const model& m, std::size_t max_states) {
  ts_search r{state_interner(m.agent_count()), {}, {}, {}};
  r.states.intern(m.initial_state());
  r.parent.push_back(0);
  r.via.push_back({});
  global_state next;
  for (std::uint32_t id = 0; id < r.states.size(); ++id) {
    const auto s = r.states.state(id);
    const auto evs = enabled_events(m, s);
    if (evs.empty()) r.deadlocks.push_back(id);
    for (const auto& e : evs) {
      next = s;
      apply_event(m, next, e);
      const auto [target, inserted] = r.states.intern(next);
      if (!inserted) continue;
      if (r.states.size() > max_states)
        throw state_budget_exceeded("interleaved state space exceeds " + std::to_string(max_states) + " states",
                                    r.states.size() - 1);
      r.parent.push_back(id);
      r.via.push_back(e);
    }
  }
  return r;
}

}  // namespace

std::vector<deadlock_witness> find_reachable_deadlocks(const model& m, std::size_t max_states) {
  const auto r = explore_ts(m, max_states);
  std::vector<deadlock_witness> out;
  for (const auto id : r.deadlocks) {
    deadlock_witness w{r.states.state(id), {}};
    for (auto cur = id; cur != 0; cur = r.parent[cur]) w.path.push_back(r.via[cur]);
    std::reverse(w.path.begin(), w.path.end());
    out.push_back(std::move(w));
  }
  return out;
}

std::size_t count_reachable_states(const model& m, std::size_t max_states) {
  return explore_ts(m, max_states).states.size();
}

// ---------------------------------------------------------------------------
// Formatting and export

std::string format_state(const model& m, const global_state& s) {
  std::string out = "(";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += m.state_name(static_cast<agent_id>(i), s[i]);
  }
  return out + ")";
}

std::string event_name(const model& m, const event& e) {
  const auto& def = m.action(e.action);
  if (const auto label = def.label(e.outcome); !label.empty()) return std::string(label);
  const auto join = [&](std::span<const local_index> t) {
    std::string out;
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k) out += '|';
      out += m.state_name(def.loc()[k], t[k]);
    }
    return out;
  };
  return def.name() + ":" + join(def.source(def.row_of(e.outcome))) + "->" + join(def.target(e.outcome));
}

namespace {

std::string shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string chain_to_text(const model& m, const markov_chain& c) {
  std::string out;
  for (std::uint32_t id = 0; id < c.size(); ++id) {
    const auto from = format_state(m, c.state(id));
    for (const auto& e : c.row(id)) out += from + " " + format_state(m, c.state(e.target)) + " " + shortest(e.prob) + "\n";
  }
  return out;
}

std::string chain_to_json(const model& m, const markov_chain& c) {
  nlohmann::json states = nlohmann::json::array();
  nlohmann::json edges = nlohmann::json::array();
  for (std::uint32_t id = 0; id < c.size(); ++id) {
    states.push_back(format_state(m, c.state(id)));
    for (const auto& e : c.row(id)) edges.push_back({{"src", id}, {"dst", e.target}, {"prob", e.prob}});
  }
  nlohmann::json doc{{"initial", c.initial()}, {"states", std::move(states)}, {"transitions", std::move(edges)}};
  return doc.dump(1);
}

}  // namespace dmc
