#include "dmc/measure.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace dmc {

std::vector<global_state> trajectory::states(const model& m) const {
  std::vector<global_state> out{start};
  for (const auto& e : events) {
    auto next = out.back();
    apply_event(m, next, e);
    out.push_back(std::move(next));
  }
  return out;
}

trajectory make_trajectory(const model& m, global_state start, event_sequence events) {
  if (start.size() != m.agent_count()) throw domain_error("start state has the wrong width");
  auto s = start;
  for (std::size_t k = 0; k < events.size(); ++k) {
    if (!is_enabled(m, s, events[k]))
      throw domain_error("event " + std::to_string(k) + " (" + event_name(m, events[k]) + ") is not enabled at " +
                         format_state(m, s));
    apply_event(m, s, events[k]);
  }
  return {std::move(start), std::move(events)};
}

template <class Num>
Num cylinder_prob(const model& m, const trajectory& rho) {
  Num p(1);
  for (const auto& e : rho.events) p *= prob_traits<Num>::from(exact(m, e));
  return p;
}

namespace {

// Outcome choices at s for maximal steps containing u: forced where u has
// an event of the action, free otherwise. nullopt if some event of u is not
// enabled at s.
std::optional<std::vector<std::vector<event>>> constrained_choices(const model& m, const global_state& s,
                                                                   const std::vector<event>& u) {
  std::vector<std::vector<event>> choices;
  std::size_t matched = 0;
  for (const auto& ea : enabled_actions(m, s)) {
    const auto it = std::find_if(u.begin(), u.end(), [&](const event& e) { return e.action == ea.action; });
    const auto& def = m.action(ea.action);
    if (it != u.end()) {
      if (def.row_of(it->outcome) != ea.row || def.exact(it->outcome).num() == 0) return std::nullopt;
      choices.push_back({*it});
      ++matched;
      continue;
    }
    auto& c = choices.emplace_back();
    for (auto o = def.outcomes_begin(ea.row); o < def.outcomes_end(ea.row); ++o)
      if (def.exact(o).num() > 0) c.push_back({ea.action, o});
    if (c.empty()) choices.pop_back();
  }
  if (matched != u.size()) return std::nullopt;
  return choices;
}

template <class F>
void for_each_pick(const std::vector<std::vector<event>>& choices, F&& f) {
  if (choices.empty()) return;
  std::vector<std::size_t> pick(choices.size(), 0);
  step u(choices.size());
  while (true) {
    for (std::size_t k = 0; k < choices.size(); ++k) u[k] = choices[k][pick[k]];
    f(u);
    std::size_t k = choices.size();
    while (true) {
      if (k == 0) return;
      --k;
      if (++pick[k] < choices[k].size()) break;
      pick[k] = 0;
    }
  }
}

global_state successor(const model& m, const global_state& s, const step& u) {
  global_state next = s;
  for (const auto& e : u) apply_event(m, next, e);
  return next;
}

template <class Num>
Num edge_prob(const basic_markov_chain<Num>& chain, std::uint32_t from, std::uint32_t to) {
  for (const auto& e : chain.row(from))
    if (e.target == to) return e.prob;
  return Num(0);
}

}  // namespace

std::vector<step> step_sequence(const model& m, const finite_path& tau) {
  std::vector<step> out;
  for (std::size_t l = 0; l + 1 < tau.size(); ++l) {
    const auto& s = tau[l];
    const auto& t = tau[l + 1];
    if (is_deadlock(m, s)) {
      if (s != t) throw domain_error("path leaves deadlock " + format_state(m, s));
      out.emplace_back();
      continue;
    }
    bool found = false;
    for (auto& u : maximal_steps(m, s)) {
      if (successor(m, s, u) == t) {
        out.push_back(std::move(u));
        found = true;
        break;
      }
    }
    if (!found)
      throw domain_error("no maximal step leads from " + format_state(m, s) + " to " + format_state(m, t));
  }
  return out;
}

std::vector<finite_path> tp_image(const model& m, const trajectory& rho, std::size_t limit) {
  const auto fn = foata(m, rho.events);
  std::vector<finite_path> out;
  finite_path cur{rho.start};
  const std::function<void(std::size_t)> go = [&](std::size_t level) {
    if (level == fn.steps.size()) {
      if (out.size() >= limit) throw state_budget_exceeded("tp image exceeds " + std::to_string(limit) + " paths", limit);
      out.push_back(cur);
      return;
    }
    const auto choices = constrained_choices(m, cur.back(), fn.steps[level]);
    if (!choices) return;
    for_each_pick(*choices, [&](const step& u) {
      cur.push_back(successor(m, cur.back(), u));
      go(level + 1);
      cur.pop_back();
    });
  };
  go(0);
  return out;
}

template <class Num>
Num path_cylinder_prob(const basic_markov_chain<Num>& chain, const finite_path& tau) {
  Num p(1);
  for (std::size_t l = 0; l + 1 < tau.size(); ++l) {
    const auto q = chain.transition(tau[l], tau[l + 1]);
    if (q == 0) throw domain_error("path uses a transition absent from the chain");
    p *= q;
  }
  return p;
}

template <class Num>
Num tp_image_prob(const model& m, const basic_markov_chain<Num>& chain, const trajectory& rho) {
  const auto start = chain.find(rho.start);
  if (!start) throw domain_error("trajectory start " + format_state(m, rho.start) + " is not a chain state");
  const auto fn = foata(m, rho.events);
  std::map<std::uint32_t, Num> frontier{{*start, Num(1)}};
  for (const auto& u_l : fn.steps) {
    std::map<std::uint32_t, Num> next;
    for (const auto& [id, mass] : frontier) {
      const auto s = chain.state(id);
      const auto choices = constrained_choices(m, s, u_l);
      if (!choices) continue;
      for_each_pick(*choices, [&](const step& u) {
        const auto t = chain.find(successor(m, s, u));
        if (!t) throw domain_error("successor missing from chain");
        auto& slot = next[*t];
        slot += mass * edge_prob(chain, id, *t);
      });
    }
    frontier = std::move(next);
  }
  Num total(0);
  for (const auto& [id, mass] : frontier) total += mass;
  return total;
}

template <class Num>
cylinder_check<Num> check_cylinder_identity(const model& m, const basic_markov_chain<Num>& chain, const trajectory& rho,
                                       double tolerance) {
  cylinder_check<Num> r{cylinder_prob<Num>(m, rho), tp_image_prob(m, chain, rho), false};
  if constexpr (std::is_same_v<Num, double>) r.equal = std::abs(r.lhs - r.rhs) <= tolerance;
  else r.equal = r.lhs == r.rhs;
  return r;
}

template <class Num>
Num union_prob(const model& m, const basic_markov_chain<Num>& chain, const std::vector<trajectory>& generators) {
  const auto n = generators.size();
  if (n > 20) throw domain_error("union_prob supports at most 20 generators");
  std::vector<std::set<finite_path>> images;
  std::vector<std::size_t> depth;
  for (const auto& g : generators) {
    const auto img = tp_image(m, g);
    images.emplace_back(img.begin(), img.end());
    depth.push_back(foata(m, g.events).steps.size());
  }
  Num total(0);
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::size_t deepest = n;
    for (std::size_t i = 0; i < n; ++i)
      if ((mask >> i & 1) && (deepest == n || depth[i] > depth[deepest])) deepest = i;
    Num inter(0);
    for (const auto& path : images[deepest]) {
      bool in_all = true;
      for (std::size_t i = 0; i < n && in_all; ++i) {
        if (!(mask >> i & 1) || i == deepest) continue;
        const finite_path prefix(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(depth[i] + 1));
        in_all = images[i].count(prefix) > 0;
      }
      if (in_all) inter += path_cylinder_prob(chain, path);
    }
    if (std::popcount(mask) % 2 == 1) total += inter;
    else total -= inter;
  }
  return total;
}

void for_each_trajectory(const model& m, const global_state& start, std::size_t depth,
                         const std::function<void(const trajectory&)>& f) {
  trajectory rho{start, {}};
  global_state s = start;
  const std::function<void()> go = [&] {
    f(rho);
    if (rho.events.size() == depth) return;
    for (const auto& e : enabled_events(m, s)) {
      const auto saved = s;
      apply_event(m, s, e);
      rho.events.push_back(e);
      go();
      rho.events.pop_back();
      s = saved;
    }
  };
  go();
}

namespace {

template <class Num>
oracle_report run_oracle_as(const model& m, std::size_t depth, double tolerance, std::size_t max_states) {
  const auto chain = build_markov_chain_as<Num>(m, max_states);
  oracle_report rep;
  rep.depth = depth;
  rep.exact = !std::is_same_v<Num, double>;
  rep.chain_states = chain.size();
  for_each_trajectory(m, m.initial_state(), depth, [&](const trajectory& rho) {
    const auto r = check_cylinder_identity(m, chain, rho, tolerance);
    ++rep.trajectories;
    if (!r.equal) ++rep.mismatches;
    rep.max_discrepancy = std::max(rep.max_discrepancy, std::abs(prob_traits<Num>::to_double(Num(r.lhs - r.rhs))));
  });
  return rep;
}

}  // namespace

oracle_report run_cylinder_oracle(const model& m, std::size_t depth, bool exact, double tolerance,
                                std::size_t max_states) {
  return exact ? run_oracle_as<rational>(m, depth, tolerance, max_states)
               : run_oracle_as<double>(m, depth, tolerance, max_states);
}

#define DMC_MEASURE_INSTANTIATE(Num)                                                                          \
  template Num cylinder_prob<Num>(const model&, const trajectory&);                                          \
  template Num path_cylinder_prob<Num>(const basic_markov_chain<Num>&, const finite_path&);                  \
  template Num tp_image_prob<Num>(const model&, const basic_markov_chain<Num>&, const trajectory&);          \
  template cylinder_check<Num> check_cylinder_identity<Num>(const model&, const basic_markov_chain<Num>&,         \
                                                       const trajectory&, double);                          \
  template Num union_prob<Num>(const model&, const basic_markov_chain<Num>&, const std::vector<trajectory>&);

DMC_MEASURE_INSTANTIATE(double)
DMC_MEASURE_INSTANTIATE(rational)

}  // namespace dmc
