#include "dmc/benchmarks.hpp"
#include "dmc/errors.hpp"
#include "dmc/trace.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace dmc;

namespace {

event by_label(const model& m, std::string_view label) {
  for (const auto& e : events_of(m))
    if (event_name(m, e) == label) return e;
  FAIL("no event " << label);
  return {};
}

event_sequence seq(const model& m, std::initializer_list<const char*> labels) {
  event_sequence out;
  for (const auto* l : labels) out.push_back(by_label(m, l));
  return out;
}

}  // namespace

TEST_CASE("independence is disjointness of locations") {
  const auto m = build_coin_game();
  CHECK(independent(m, by_label(m, "e_h"), by_label(m, "e'_t")));
  CHECK_FALSE(independent(m, by_label(m, "e_h"), by_label(m, "e_t")));
  CHECK_FALSE(independent(m, by_label(m, "e_h"), by_label(m, "e_h")));
  CHECK_FALSE(independent(m, by_label(m, "ht"), by_label(m, "w")));
}

TEST_CASE("coin game normal form") {
  const auto m = build_coin_game();
  const auto xi = seq(m, {"e_h", "e'_t", "ht", "l'", "w", "w"});
  const auto f = foata(m, xi);
  CHECK(render(m, f) == "{e_h,e'_t}{ht}{l',w}{w}");
  CHECK(f.steps.size() == 4);
  CHECK(foata(m, seq(m, {"e'_t", "e_h", "ht", "w", "l'", "w"})) == f);
  CHECK(trace_equiv(m, xi, flatten(f)));
  CHECK(foata(m, {}).steps.empty());
}

TEST_CASE("projections, equivalence and prefixes") {
  const auto m = build_coin_game();
  const auto xi = seq(m, {"e_h", "e'_t", "ht", "l'"});
  CHECK(proj(m, xi, agent_id{0}) == seq(m, {"e_h", "ht"}));
  CHECK(proj(m, xi, agent_id{1}) == seq(m, {"e'_t", "ht", "l'"}));
  CHECK(trace_equiv(m, xi, seq(m, {"e'_t", "e_h", "ht", "l'"})));
  CHECK_FALSE(trace_equiv(m, xi, seq(m, {"e_h", "ht", "e'_t", "l'"})));
  CHECK(trace_prefix(m, seq(m, {"e'_t"}), xi));
  CHECK(trace_prefix(m, seq(m, {"e'_t", "e_h"}), xi));
  CHECK_FALSE(trace_prefix(m, seq(m, {"e'_h"}), xi));
  CHECK_FALSE(trace_prefix(m, xi, seq(m, {"e_h"})));
}

TEST_CASE("foata steps are pairwise independent and each later event depends on the previous step") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 100; ++k) {
    const auto m = testing::random_dmc(rng);
    const auto xi = testing::random_walk(m, m.initial_state(), 12, rng);
    const auto f = foata(m, xi);
    std::size_t total = 0;
    for (std::size_t i = 0; i < f.steps.size(); ++i) {
      const auto& u = f.steps[i];
      total += u.size();
      REQUIRE_FALSE(u.empty());
      for (std::size_t a = 0; a < u.size(); ++a)
        for (std::size_t b = a + 1; b < u.size(); ++b) CHECK(independent(m, u[a], u[b]));
      if (i == 0) continue;
      for (const auto& e : u) {
        bool depends = false;
        for (const auto& g : f.steps[i - 1]) depends = depends || !independent(m, e, g);
        CHECK(depends);
      }
    }
    CHECK(total == xi.size());
    CHECK(trace_equiv(m, xi, flatten(f)));
    foata_builder fb(m);
    for (const auto& e : xi) fb.push(e);
    CHECK(fb.form() == f);
  }
}

TEST_CASE("maximality of finite and lasso traces") {
  const auto m = build_coin_game();
  const auto s0 = m.initial_state();
  CHECK_FALSE(is_maximal_trace(m, s0, seq(m, {"e_h", "e'_t", "ht"})));
  CHECK_THROWS_AS(is_maximal_trace(m, s0, seq(m, {"ht"})), domain_error);
  // (W1,L2) with both agents looping forever
  CHECK(is_maximal_trace(m, s0, seq(m, {"e_h", "e'_t", "ht"}), seq(m, {"w", "l'"}), 20));
  // only agent 1 keeps moving, agent 2 could still fire l'
  CHECK_FALSE(is_maximal_trace(m, s0, seq(m, {"e_h", "e'_t", "ht"}), seq(m, {"w"}), 20));
}
