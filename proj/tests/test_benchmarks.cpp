#include "dmc/benchmarks.hpp"
#include "dmc/errors.hpp"
#include "dmc/logic.hpp"
#include "dmc/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

#include <deque>
#include <set>

using namespace dmc;

namespace {

// Reachable states of the interleaved system, by an independent BFS.
std::vector<global_state> reachable(const model& m, std::size_t limit) {
  std::set<global_state> seen{m.initial_state()};
  std::deque<global_state> queue{m.initial_state()};
  std::vector<global_state> out;
  while (!queue.empty()) {
    auto s = queue.front();
    queue.pop_front();
    out.push_back(s);
    for (const auto& e : testing::brute_enabled_events(m, s)) {
      auto t = s;
      apply_event(m, t, e);
      if (seen.insert(t).second) {
        REQUIRE(seen.size() <= limit);
        queue.push_back(t);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("builders produce valid models") {
  CHECK(validate(build_coin_game(), {true, false, 1e-9}).ok());
  for (std::uint32_t n = 2; n <= 6; ++n)
    for (std::uint32_t r = 2; r <= 3; ++r)
      for (std::uint32_t cap = 1; cap <= 2; ++cap) {
        const auto r1 = validate(build_itai_rodeh(n, r, cap), {true, false, 1e-9});
        CHECK_MESSAGE(r1.ok(), n << " " << r << " " << cap);
        CHECK(r1.warnings.empty());
      }
  for (std::uint32_t n = 3; n <= 8; ++n) {
    const auto r = validate(build_dining_philosophers(n), {true, false, 1e-9});
    CHECK(r.ok());
    CHECK(r.warnings.empty());
  }
  CHECK_THROWS_AS(build_itai_rodeh(1, 2), domain_error);
  CHECK_THROWS_AS(build_itai_rodeh(3, 1), domain_error);
  CHECK_THROWS_AS(build_itai_rodeh(3, 2, 0), domain_error);
  CHECK_THROWS_AS(build_dining_philosophers(2), domain_error);
}

TEST_CASE("builders are deterministic") {
  CHECK(serialize_model(build_coin_game()) == serialize_model(build_coin_game()));
  CHECK(serialize_model(build_itai_rodeh(4, 3, 2)) == serialize_model(build_itai_rodeh(4, 3, 2)));
  CHECK(serialize_model(build_dining_philosophers(5)) == serialize_model(build_dining_philosophers(5)));
}

TEST_CASE("itai-rodeh never elects two leaders") {
  for (std::uint32_t n = 2; n <= 4; ++n) {
    const auto m = build_itai_rodeh(n, n == 4 ? 2 : n);
    std::vector<ap_id> leaders;
    for (std::uint32_t j = 1; j <= n; ++j) leaders.push_back(*m.find_ap("leader_" + std::to_string(j)));
    const auto states = reachable(m, 2'000'000);
    bool some_leader = false;
    for (const auto& s : states) {
      int count = 0;
      for (std::uint32_t j = 0; j < n; ++j) count += m.holds(agent_id{j}, s[j], leaders[j]);
      CHECK(count <= 1);
      some_leader = some_leader || count == 1;
      CHECK(!testing::brute_enabled_events(m, s).empty());
    }
    CHECK(some_leader);
    CHECK(m.metadata().at("moves_per_round") == std::to_string(2 * n + 2));
  }
}

TEST_CASE("dining philosophers with three seats never deadlock") {
  const auto m = build_dining_philosophers(3);
  const auto states = reachable(m, 100'000);
  for (const auto& s : states) CHECK(!testing::brute_enabled_events(m, s).empty());
  CHECK(states.size() == count_reachable_states(m));
  CHECK(find_reachable_deadlocks(m).empty());
}

TEST_CASE("generated specs parse against their models") {
  const auto coin = build_coin_game();
  CHECK(threshold_leaves(parse_spec(coin, coin_game_spec())).size() == 1);
  const auto ir = build_itai_rodeh(4, 4);
  const auto irs = parse_spec(ir, itai_rodeh_spec(4, 0.99));
  const auto k = bound_vector_of(threshold_leaves(irs)[0]->formula, ir.agent_count());
  CHECK(k[0] == 4 * (2 * 4 + 2) + 1);
  const auto dp = build_dining_philosophers(5);
  const auto f = parse_spec(dp, dining_fraction_spec(5, 0.4));
  // two of five: C(5,2) conjunctions
  CHECK(to_string(dp, threshold_leaves(f)[0]->formula).find("eaten_1") != std::string::npos);
  CHECK_NOTHROW(parse_spec(dp, dining_all_eat_spec(5)));
}
