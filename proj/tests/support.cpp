#include "support.hpp"

#include <algorithm>
#include <functional>
#include <set>

namespace dmc::testing {

namespace {

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

}  // namespace

model random_dmc(std::mt19937_64& rng, const random_dmc_options& opts) {
  const auto n = 1 + pick(rng, opts.max_agents);
  std::vector<std::size_t> sizes(n);
  for (auto& k : sizes) k = 1 + pick(rng, opts.max_states);

  // Candidate locs: one singleton per agent plus a few random subsets.
  std::vector<std::vector<std::size_t>> locs;
  for (std::size_t i = 0; i < n; ++i) locs.push_back({i});
  for (std::size_t k = 0; k < opts.extra_actions; ++k) {
    std::vector<std::size_t> l;
    for (std::size_t i = 0; i < n; ++i)
      if (rng() & 1) l.push_back(i);
    if (l.size() >= 2) locs.push_back(l);
  }

  // owner[i][s]: the action whose enabling set holds local state s of agent i.
  std::vector<bool> alive(locs.size(), true);
  std::vector<std::vector<std::size_t>> owner(n);
  const auto reassign = [&](std::size_t i, std::size_t s) {
    std::vector<std::size_t> cands;
    for (std::size_t a = 0; a < locs.size(); ++a)
      if (alive[a] && std::count(locs[a].begin(), locs[a].end(), i)) cands.push_back(a);
    owner[i][s] = cands[pick(rng, cands.size())];
  };
  for (std::size_t i = 0; i < n; ++i) {
    owner[i].resize(sizes[i]);
    for (std::size_t s = 0; s < sizes[i]; ++s) reassign(i, s);
  }
  // Drop shared actions with an empty component until stable. Singletons
  // stay candidates throughout so every state keeps an owner; the unused
  // ones are skipped below.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t a = n; a < locs.size(); ++a) {
      if (!alive[a]) continue;
      bool empty = false;
      for (const auto i : locs[a]) empty = empty || std::count(owner[i].begin(), owner[i].end(), a) == 0;
      if (!empty) continue;
      alive[a] = false;
      changed = true;
      for (const auto i : locs[a])
        for (std::size_t s = 0; s < sizes[i]; ++s)
          if (owner[i][s] == a) reassign(i, s);
    }
  }

  model_builder b;
  std::vector<agent_id> ids;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> names;
    for (std::size_t s = 0; s < sizes[i]; ++s) names.push_back("s" + std::to_string(s) + "_" + std::to_string(i));
    ids.push_back(b.add_agent("A" + std::to_string(i), names, names[pick(rng, names.size())]));
  }
  std::size_t serial = 0;
  for (std::size_t a = 0; a < locs.size(); ++a) {
    if (!alive[a]) continue;
    if (a < n && std::count(owner[a].begin(), owner[a].end(), a) == 0) continue;
    std::vector<agent_id> loc;
    for (const auto i : locs[a]) loc.push_back(ids[i]);
    const auto act = b.add_action("act" + std::to_string(serial++), loc);
    // Enumerate the product of owned states over loc (loc is sorted).
    std::vector<std::vector<local_index>> comps;
    for (const auto i : locs[a]) {
      comps.emplace_back();
      for (std::size_t s = 0; s < sizes[i]; ++s)
        if (owner[i][s] == a) comps.back().push_back(static_cast<local_index>(s));
    }
    std::vector<local_index> tuple(comps.size());
    std::function<void(std::size_t)> rec = [&](std::size_t k) {
      if (k == comps.size()) {
        const auto want = 1 + pick(rng, opts.max_outcomes);
        std::set<std::vector<local_index>> targets;
        for (std::size_t tries = 0; tries < 8 * want && targets.size() < want; ++tries) {
          std::vector<local_index> t;
          for (const auto i : locs[a]) t.push_back(static_cast<local_index>(pick(rng, sizes[i])));
          targets.insert(t);
        }
        std::vector<std::int64_t> weights;
        std::int64_t total = 0;
        for (std::size_t j = 0; j < targets.size(); ++j) total += weights.emplace_back(1 + pick(rng, 3));
        std::vector<outcome_spec> outs;
        std::size_t j = 0;
        for (const auto& t : targets) outs.push_back({t, exact_prob(weights[j++], total), {}});
        b.add_row(act, tuple, outs);
        return;
      }
      for (const auto v : comps[k]) {
        tuple[k] = v;
        rec(k + 1);
      }
    };
    rec(0);
  }
  return std::move(b).build();
}

std::vector<event> brute_enabled_events(const model& m, const global_state& s) {
  std::vector<event> out;
  for (std::size_t a = 0; a < m.action_count(); ++a) {
    const auto& def = m.action(static_cast<action_id>(a));
    for (std::size_t r = 0; r < def.row_count(); ++r) {
      const auto src = def.source(r);
      bool match = true;
      for (std::size_t k = 0; k < def.arity(); ++k) match = match && s[idx(def.loc()[k])] == src[k];
      if (!match) continue;
      for (auto o = def.outcomes_begin(r); o < def.outcomes_end(r); ++o)
        if (def.prob(o) > 0) out.push_back({static_cast<action_id>(a), o});
    }
  }
  return out;
}

namespace {

bool disjoint(const model& m, const event& e, const event& f) {
  for (const auto a : m.action(e.action).loc())
    for (const auto b : m.action(f.action).loc())
      if (a == b) return false;
  return true;
}

}  // namespace

std::vector<step> brute_maximal_steps(const model& m, const global_state& s) {
  const auto en = brute_enabled_events(m, s);
  std::vector<step> out;
  step cur;
  std::function<void(std::size_t)> rec = [&](std::size_t k) {
    if (k == en.size()) {
      if (cur.empty()) return;
      for (const auto& e : en) {
        if (std::find(cur.begin(), cur.end(), e) != cur.end()) continue;
        bool indep = true;
        for (const auto& f : cur) indep = indep && disjoint(m, e, f);
        if (indep) return;  // not maximal
      }
      auto sorted = cur;
      std::sort(sorted.begin(), sorted.end());
      out.push_back(sorted);
      return;
    }
    bool ok = true;
    for (const auto& f : cur) ok = ok && disjoint(m, en[k], f);
    if (ok) {
      cur.push_back(en[k]);
      rec(k + 1);
      cur.pop_back();
    }
    rec(k + 1);
  };
  rec(0);
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

global_state apply(const model& m, global_state s, const event& e) {
  const auto& def = m.action(e.action);
  const auto t = def.target(e.outcome);
  for (std::size_t k = 0; k < def.arity(); ++k) s[idx(def.loc()[k])] = t[k];
  return s;
}

}  // namespace

std::map<global_state, rational> brute_chain_row(const model& m, const global_state& s) {
  std::map<global_state, rational> row;
  const auto steps = brute_maximal_steps(m, s);
  if (steps.empty()) {
    row[s] = 1;
    return row;
  }
  for (const auto& u : steps) {
    auto next = s;
    rational p = 1;
    for (const auto& e : u) {
      next = apply(m, next, e);
      p *= m.action(e.action).exact(e.outcome).to_rational();
    }
    row[next] += p;
  }
  return row;
}

rational brute_eventually(const model& m, agent_id agent, local_index target, std::uint32_t bound) {
  rational total = 0;
  std::function<void(const global_state&, std::uint32_t, const rational&)> rec = [&](const global_state& s,
                                                                                    std::uint32_t moves,
                                                                                    const rational& p) {
    if (s[idx(agent)] == target) {
      total += p;
      return;
    }
    if (moves >= bound) return;
    const auto steps = brute_maximal_steps(m, s);
    for (const auto& u : steps) {
      auto next = s;
      rational q = p;
      bool moved = false;
      for (const auto& e : u) {
        next = apply(m, next, e);
        q *= m.action(e.action).exact(e.outcome).to_rational();
        for (const auto a : m.action(e.action).loc()) moved = moved || a == agent;
      }
      if (!moved && next == s) continue;  // stuck agent, never reaches target
      rec(next, moves + (moved ? 1 : 0), q);
    }
  };
  rec(m.initial_state(), 0, rational(1));
  return total;
}

std::vector<event> random_walk(const model& m, const global_state& start, std::size_t length, std::mt19937_64& rng) {
  std::vector<event> out;
  auto s = start;
  while (out.size() < length) {
    const auto en = brute_enabled_events(m, s);
    if (en.empty()) break;
    const auto& e = en[pick(rng, en.size())];
    s = apply(m, s, e);
    out.push_back(e);
  }
  return out;
}

}  // namespace dmc::testing
