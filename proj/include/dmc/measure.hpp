#pragma once

#include "dmc/trace.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace dmc {

// A finite run s_0 e_0 s_1 ... e_{k-1} s_k of the interleaved system.
struct trajectory {
  global_state start;
  event_sequence events;

  // s_0 .. s_k. Assumes the trajectory is valid.
  std::vector<global_state> states(const model& m) const;
};

// Checks fireability; throws domain_error naming the first bad event.
trajectory make_trajectory(const model& m, global_state start, event_sequence events);

// Probability of the basic cylinder generated by rho: product of p_e.
template <class Num>
Num cylinder_prob(const model& m, const trajectory& rho);

// s_0 s_1 ... s_m in the Markov chain.
using finite_path = std::vector<global_state>;

// Maximal steps inducing each transition of tau. The deadlock self-loop is
// reported as an empty step. Throws domain_error if some consecutive pair
// is not related by a maximal step.
std::vector<step> step_sequence(const model& m, const finite_path& tau);

// paths(rho): chain paths of length |FN(rho)| whose induced maximal steps
// contain the corresponding Foata steps. Throws state_budget_exceeded past
// `limit` paths.
std::vector<finite_path> tp_image(const model& m, const trajectory& rho, std::size_t limit = 1'000'000);

// Product of chain transition probabilities. Throws domain_error if some
// transition is absent from the chain.
template <class Num>
Num path_cylinder_prob(const basic_markov_chain<Num>& chain, const finite_path& tau);

// Sum of path_cylinder_prob over tp_image(rho), computed level by level
// with paths merged on their current state so the image is never
// materialized.
template <class Num>
Num tp_image_prob(const model& m, const basic_markov_chain<Num>& chain, const trajectory& rho);

template <class Num>
struct cylinder_check {
  Num lhs;
  Num rhs;
  bool equal = false;
};

// lhs = cylinder_prob(rho), rhs = path-space measure of tp(BC(rho)).
// Equality is exact for rationals and within `tolerance` for doubles.
template <class Num>
cylinder_check<Num> check_cylinder_identity(const model& m, const basic_markov_chain<Num>& chain, const trajectory& rho,
                                       double tolerance = 1e-12);

// Measure of the union of the cylinders BC(rho_i), by inclusion-exclusion
// over the generators. Each intersection is evaluated on the chain as the
// set of paths whose prefixes lie in every tp image.
template <class Num>
Num union_prob(const model& m, const basic_markov_chain<Num>& chain, const std::vector<trajectory>& generators);

// Calls f on every fireable event sequence from `start` of length <= depth,
// including the empty one, in depth-first order.
void for_each_trajectory(const model& m, const global_state& start, std::size_t depth,
                         const std::function<void(const trajectory&)>& f);

struct oracle_report {
  std::size_t depth = 0;
  std::size_t trajectories = 0;
  std::size_t mismatches = 0;
  double max_discrepancy = 0;
  bool exact = false;
  std::size_t chain_states = 0;

  bool ok() const noexcept { return mismatches == 0; }
};

// Exhaustive cylinder identity check over all trajectories from the initial state.
oracle_report run_cylinder_oracle(const model& m, std::size_t depth, bool exact, double tolerance = 1e-12,
                                std::size_t max_states = default_max_states);

}  // namespace dmc
