#pragma once

#include "dmc/semantics.hpp"

#include <string>
#include <vector>

namespace dmc {

using event_sequence = std::vector<event>;

// e I e' iff loc(e) and loc(e') are disjoint. Irreflexive.
bool independent(const model& m, const event& e, const event& f);

// Subsequence of events in which `agent` participates.
event_sequence proj(const model& m, const event_sequence& xi, agent_id agent);

// Projection equivalence: equal projections on every agent.
bool trace_equiv(const model& m, const event_sequence& xi, const event_sequence& other);

// [xi] is a prefix of [other]: every projection of xi is a prefix of the
// corresponding projection of other.
bool trace_prefix(const model& m, const event_sequence& xi, const event_sequence& other);

// Foata normal form: a sequence of nonempty steps of pairwise independent
// events. Events inside a step are kept in canonical order (action name,
// target state names, source state names), so equal traces compare equal.
struct foata_form {
  std::vector<std::vector<event>> steps;

  friend bool operator==(const foata_form&, const foata_form&) = default;
};

// Incremental construction, one event at a time.
class foata_builder {
 public:
  explicit foata_builder(const model& m) : m_(&m) {}

  void push(const event& e);
  // Canonicalized copy of the form built so far.
  foata_form form() const;
  std::size_t depth() const noexcept { return steps_.size(); }

 private:
  const model* m_;
  std::vector<std::vector<event>> steps_;
};

foata_form foata(const model& m, const event_sequence& xi);

// Concatenation of the steps in canonical order.
event_sequence flatten(const foata_form& f);

// Canonical event order used inside Foata steps.
bool canonical_less(const model& m, const event& a, const event& b);

// "{e_h,e'_t}{ht}{l',w}{w}"
std::string render(const model& m, const foata_form& f);

// A finite trajectory's trace is maximal iff it ends in a deadlock.
// Throws domain_error if xi is not fireable from start.
bool is_maximal_trace(const model& m, const global_state& start, const event_sequence& xi);

// Ultimately periodic event sequence prefix . cycle^omega, unrolled up to
// `horizon` events (at least one full cycle). Fireability is checked along
// the unrolling. The trace is reported maximal iff no event enabled at the
// end of the unrolling is independent of every event of the cycle, i.e. no
// agent outside the cycle is left able to move. Agents inside the cycle are
// assumed to keep moving, which holds exactly when the cycle returns to its
// entry state; otherwise the answer is a horizon-bounded semi-decision.
bool is_maximal_trace(const model& m, const global_state& start, const event_sequence& prefix,
                      const event_sequence& cycle, std::size_t horizon);

}  // namespace dmc
