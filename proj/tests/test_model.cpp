#include "dmc/benchmarks.hpp"
#include "dmc/errors.hpp"
#include "dmc/model_io.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace dmc;

namespace {

const char* two_agent_json = R"({
  "agents": [ {"name": "x", "states": ["x0", "x1"], "initial": "x0"},
              {"name": "y", "states": ["y0", "y1"], "initial": "y0"} ],
  "actions": [
    {"name": "sync", "loc": ["y", "x"], "enabled": [["y0", "x0"]],
     "distribution": [ {"from": ["y0", "x0"], "to": [[["y1", "x1"], "0.25"], [["y0", "x0"], "3/4"]]} ]},
    {"name": "ix", "loc": ["x"], "enabled": [["x1"]],
     "distribution": [ {"from": ["x1"], "to": [[["x1"], 1]]} ]},
    {"name": "iy", "loc": ["y"], "enabled": [["y1"]],
     "distribution": [ {"from": ["y1"], "to": [[["y0"], "1"]]} ]}
  ],
  "valuations": {"x1": ["done"]}
})";

bool has_kind(const validation_report& r, violation_kind k) {
  for (const auto& v : r.errors)
    if (v.kind == k) return true;
  return false;
}

}  // namespace

TEST_CASE("exact probability literals") {
  CHECK(exact_prob::parse("1/2") == exact_prob(1, 2));
  CHECK(exact_prob::parse("0.25") == exact_prob(1, 4));
  CHECK(exact_prob::parse("2/4").str() == "1/2");
  CHECK(exact_prob::parse("1").str() == "1");
  CHECK(exact_prob::parse(".5") == exact_prob(1, 2));
  CHECK(exact_prob::parse("0.125").to_double() == doctest::Approx(0.125));
  CHECK(exact_prob::parse("1/3").to_rational() == rational(1, 3));
  CHECK_THROWS_AS(exact_prob::parse("abc"), parse_error);
  CHECK_THROWS_AS(exact_prob::parse("1/0"), parse_error);
  CHECK_THROWS_AS(exact_prob::parse(""), parse_error);
}

TEST_CASE("json model loading sorts loc and keeps exact fractions") {
  const auto m = parse_model(two_agent_json);
  REQUIRE(m.agent_count() == 2);
  const auto& sync = m.action(*m.find_action("sync"));
  REQUIRE(sync.arity() == 2);
  CHECK(sync.loc()[0] == *m.find_agent("x"));
  // tuples were given in (y, x) order and must be reordered
  const auto row = sync.find_row(std::vector<local_index>{0, 0});
  REQUIRE(row);
  CHECK(sync.exact(sync.outcomes_begin(*row)) == exact_prob(1, 4));
  CHECK(m.action_of(*m.find_agent("x"), 0) == m.find_action("sync"));
  CHECK(validate(m).ok());
  const auto done = m.find_ap("done");
  REQUIRE(done);
  CHECK(m.holds(*m.find_agent("x"), 1, *done));
  CHECK_FALSE(m.holds(*m.find_agent("x"), 0, *done));
  // state names are APs too
  CHECK(m.find_ap("y1"));
}

TEST_CASE("serialization round-trips") {
  for (const auto& m : {parse_model(two_agent_json), build_coin_game(), build_itai_rodeh(3, 2, 2),
                        build_dining_philosophers(3)}) {
    const auto text = serialize_model(m);
    CHECK(serialize_model(parse_model(text)) == text);
  }
}

TEST_CASE("malformed models are parse errors") {
  CHECK_THROWS_AS(parse_model("{"), parse_error);
  CHECK_THROWS_AS(parse_model("[]"), parse_error);
  CHECK_THROWS_AS(parse_model(R"({"agents": []})"), parse_error);
  CHECK_THROWS_AS(parse_model(R"({"agents": [{"name": "a", "states": ["s"], "initial": "s"}],
     "actions": [{"name": "x", "loc": ["b"], "enabled": [], "distribution": []}]})"),
                  parse_error);
  CHECK_THROWS_AS(parse_model(R"({"agents": [{"name": "a", "states": ["s"], "initial": "s"}],
     "actions": [{"name": "x", "loc": ["a"], "enabled": [["s"]],
                  "distribution": [{"from": ["s"], "to": [[["s"], "zz"]]}]}]})"),
                  parse_error);
  CHECK_THROWS_AS(load_model("/nonexistent/model.json"), io_error);
}

TEST_CASE("validate reports each invariant") {
  model_builder b;
  const auto a = b.add_agent("a", {"s0", "s1", "s2"}, "s0");
  const auto c = b.add_agent("c", {"t0"}, "t9");
  const auto x = b.add_action("x", {a});
  const auto y = b.add_action("y", {a});
  const auto z = b.add_action("z", {c});
  const std::vector<outcome_spec> half{{{1}, exact_prob(1, 2), {}}, {{0}, exact_prob(1, 3), {}}};
  b.add_row(x, std::vector<local_index>{0}, half);
  b.add_row(y, std::vector<local_index>{0}, std::vector<outcome_spec>{{{0}, exact_prob(1, 1), {}}});
  b.declare_enabled(z, {0});
  b.add_valuation(a, 0, "shared");
  b.add_valuation(c, 0, "shared");
  const auto m = std::move(b).build();
  const auto r = validate(m);
  CHECK_FALSE(r.ok());
  CHECK(has_kind(r, violation_kind::missing_initial));
  CHECK(has_kind(r, violation_kind::nondeterministic_state));
  CHECK(has_kind(r, violation_kind::state_without_action));
  CHECK(has_kind(r, violation_kind::distribution_sum));
  CHECK(has_kind(r, violation_kind::enabled_without_distribution));
  CHECK(has_kind(r, violation_kind::ap_overlap));

  validation_options soft;
  soft.terminal_states_are_warnings = true;
  const auto r2 = validate(m, soft);
  bool warned = false;
  for (const auto& w : r2.warnings) warned = warned || w.kind == violation_kind::state_without_action;
  CHECK(warned);
}

TEST_CASE("exact validation catches sums that floats accept") {
  model_builder b;
  const auto a = b.add_agent("a", {"s0"}, "s0");
  const auto x = b.add_action("x", {a});
  // 1 - 1e-12 is within the float tolerance but not exactly 1
  b.add_row(x, std::vector<local_index>{0},
            std::vector<outcome_spec>{{{0}, exact_prob(999999999999, 1000000000000), {}}});
  const auto m = std::move(b).build();
  CHECK(validate(m).ok());
  validation_options ex;
  ex.exact = true;
  CHECK_FALSE(validate(m, ex).ok());
}

TEST_CASE("u-state projection") {
  const auto s = as_u_state({3, 1, 4});
  const std::vector<agent_id> onto{agent_id{0}, agent_id{2}};
  const auto p = project(s, onto);
  CHECK(p.values == std::vector<local_index>{3, 4});
  CHECK_THROWS_AS(project(p, std::vector<agent_id>{agent_id{1}}), domain_error);
  CHECK_THROWS_AS(project(s, std::vector<agent_id>{}), domain_error);
}

TEST_CASE("random generator yields valid models") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    const auto m = testing::random_dmc(rng);
    const auto r = validate(m, {true, false, 1e-9});
    CHECK_MESSAGE(r.ok(), serialize_model(m));
  }
}
