#include "dmc/trace.hpp"

#include "dmc/errors.hpp"

#include <algorithm>

namespace dmc {
namespace {

bool disjoint(std::span<const agent_id> a, std::span<const agent_id> b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return false;
    if (*i < *j) ++i;
    else ++j;
  }
  return true;
}

bool is_prefix(const event_sequence& a, const event_sequence& b) {
  return a.size() <= b.size() && std::equal(a.begin(), a.end(), b.begin());
}

}  // namespace

bool independent(const model& m, const event& e, const event& f) { return disjoint(loc(m, e), loc(m, f)); }

event_sequence proj(const model& m, const event_sequence& xi, agent_id agent) {
  event_sequence out;
  for (const auto& e : xi)
    if (m.action(e.action).involves(agent)) out.push_back(e);
  return out;
}

bool trace_equiv(const model& m, const event_sequence& xi, const event_sequence& other) {
  if (xi.size() != other.size()) return false;
  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto a = static_cast<agent_id>(i);
    if (proj(m, xi, a) != proj(m, other, a)) return false;
  }
  return true;
}

bool trace_prefix(const model& m, const event_sequence& xi, const event_sequence& other) {
  for (std::size_t i = 0; i < m.agent_count(); ++i) {
    const auto a = static_cast<agent_id>(i);
    if (!is_prefix(proj(m, xi, a), proj(m, other, a))) return false;
  }
  return true;
}

bool canonical_less(const model& m, const event& a, const event& b) {
  if (a == b) return false;
  const auto& da = m.action(a.action);
  const auto& db = m.action(b.action);
  if (da.name() != db.name()) return da.name() < db.name();
  const auto names = [&](const action_def& d, std::span<const local_index> t) {
    std::vector<std::string_view> out;
    for (std::size_t k = 0; k < t.size(); ++k) out.push_back(m.state_name(d.loc()[k], t[k]));
    return out;
  };
  const auto ta = names(da, da.target(a.outcome));
  const auto tb = names(db, db.target(b.outcome));
  if (ta != tb) return ta < tb;
  return names(da, da.source(da.row_of(a.outcome))) < names(db, db.source(db.row_of(b.outcome)));
}

void foata_builder::push(const event& e) {
  const auto depends = [&](const std::vector<event>& u) {
    return std::any_of(u.begin(), u.end(), [&](const event& f) { return !independent(*m_, f, e); });
  };
  if (steps_.empty() || depends(steps_.back())) {
    steps_.push_back({e});
    return;
  }
  // Least l such that e is independent of every event in steps l..k.
  std::size_t l = steps_.size() - 1;
  while (l > 0 && !depends(steps_[l - 1])) --l;
  steps_[l].push_back(e);
}

foata_form foata_builder::form() const {
  foata_form f{steps_};
  for (auto& u : f.steps)
    std::sort(u.begin(), u.end(), [&](const event& a, const event& b) { return canonical_less(*m_, a, b); });
  return f;
}

foata_form foata(const model& m, const event_sequence& xi) {
  foata_builder b(m);
  for (const auto& e : xi) b.push(e);
  return b.form();
}

event_sequence flatten(const foata_form& f) {
  event_sequence out;
  for (const auto& u : f.steps) out.insert(out.end(), u.begin(), u.end());
  return out;
}

std::string render(const model& m, const foata_form& f) {
  std::string out;
  for (const auto& u : f.steps) {
    out += '{';
    for (std::size_t k = 0; k < u.size(); ++k) {
      if (k) out += ',';
      out += event_name(m, u[k]);
    }
    out += '}';
  }
  return out;
}

namespace {

global_state run(const model& m, global_state s, const event_sequence& xi) {
  for (const auto& e : xi) {
    if (!is_enabled(m, s, e))
      throw domain_error("event " + event_name(m, e) + " is not enabled at " + format_state(m, s));
    apply_event(m, s, e);
  }
  return s;
}

}  // namespace

bool is_maximal_trace(const model& m, const global_state& start, const event_sequence& xi) {
  return is_deadlock(m, run(m, start, xi));
}

bool is_maximal_trace(const model& m, const global_state& start, const event_sequence& prefix,
                      const event_sequence& cycle, std::size_t horizon) {
  if (cycle.empty()) return is_maximal_trace(m, start, prefix);
  auto s = run(m, start, prefix);
  std::size_t fired = prefix.size();
  do {
    s = run(m, s, cycle);
    fired += cycle.size();
  } while (fired < horizon);

  std::vector<bool> moving(m.agent_count(), false);
  for (const auto& e : cycle)
    for (const auto a : loc(m, e)) moving[idx(a)] = true;
  for (const auto& e : enabled_events(m, s)) {
    const auto l = loc(m, e);
    if (std::none_of(l.begin(), l.end(), [&](agent_id a) { return moving[idx(a)]; })) return false;
  }
  return true;
}

}  // namespace dmc
