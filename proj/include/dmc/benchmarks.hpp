#pragma once

#include "dmc/model.hpp"

#include <cstdint>
#include <string>

namespace dmc {

// Two players toss coins; equal tosses repeat, otherwise heads wins.
// Agents "1" and "2" with states in/T/H/L/W suffixed by the agent number.
// Actions in declaration order: a1, a2, b, w, l, w', l'.
model build_coin_game();

// The winner-within-7 spec for the coin game.
std::string coin_game_spec(double gamma = 0.99);

// Ring of n processes p1..pn and channels; channel j carries messages from
// p_j to p_{j+1}. Each channel is a cascade of `capacity` one-slot cells.
// Messages are (id, round bit, hop, unique bit) or the token `done` that
// the leader circulates after the election. AP leader_j holds at p_j's
// leader states. Throws domain_error unless n >= 2, id_range >= 2,
// capacity >= 1.
model build_itai_rodeh(std::uint32_t n, std::uint32_t id_range, std::uint32_t capacity = 1);

// Local moves a process makes in one election round at most.
constexpr std::uint32_t itai_rodeh_moves_per_round(std::uint32_t n) { return 2 * n + 2; }

// Some leader is elected within `rounds` rounds: a disjunction over
// F[rounds * moves_per_round] leader_j.
std::string itai_rodeh_spec(std::uint32_t n, double gamma = 0.99, std::uint32_t rounds = 0);

// n philosophers P1..Pn and n forks F1..Fn. Fork F_j sits between P_{j-1}
// and P_j; P_j uses F_j on the left and F_{j+1} on the right. Each agent
// alternates deterministically between its two neighbours, and every
// philosopher-fork sync is the only place fork state is read or written.
// AP eaten_j is set from the first meal on. Throws domain_error if n < 3.
model build_dining_philosophers(std::uint32_t n);

// Default local bound for the eating properties.
inline constexpr std::uint32_t dining_default_bound = 40;

// At least ceil(fraction * n) philosophers have eaten within `bound` local
// moves: disjunction over subsets of conjunctions of F[bound] eaten_j.
std::string dining_fraction_spec(std::uint32_t n, double fraction = 0.4, double gamma = 0.95,
                                 std::uint32_t bound = dining_default_bound);

// Every philosopher eats within `bound` local moves.
std::string dining_all_eat_spec(std::uint32_t n, double gamma = 0.95, std::uint32_t bound = dining_default_bound);

}  // namespace dmc
