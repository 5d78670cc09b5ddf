// Acceptance suite: one PASS/FAIL line per criterion.

#include "commands.hpp"
#include "dmc/benchmarks.hpp"
#include "dmc/logic.hpp"
#include "dmc/measure.hpp"
#include "dmc/model_io.hpp"
#include "dmc/smc.hpp"
#include "dmc/trace.hpp"
#include "support.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace dmc;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct result {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

event by_label(const model& m, std::string_view label) {
  for (const auto& e : events_of(m))
    if (event_name(m, e) == label) return e;
  throw std::runtime_error("no event " + std::string(label));
}

trajectory coin_traj(const model& m, std::initializer_list<const char*> labels) {
  event_sequence xi;
  for (const auto* l : labels) xi.push_back(by_label(m, l));
  return make_trajectory(m, m.initial_state(), xi);
}

struct cli_run {
  int code;
  std::string out;
  std::string err;
};

cli_run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

void strip_timing(json& j) {
  if (j.is_object()) {
    j.erase("timing");
    for (auto& [k, v] : j.items()) strip_timing(v);
  } else if (j.is_array()) {
    for (auto& v : j) strip_timing(v);
  }
}

fs::path work_dir() {
  static const auto dir = [] {
    auto d = fs::temp_directory_path() / ("dmc_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// ---------------------------------------------------------------------------

result cylinder_identity() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<model> models{build_coin_game()};
  std::mt19937_64 rng(2024);
  while (models.size() < 26) models.push_back(testing::random_dmc(rng));
  std::size_t trajectories = 0;
  double worst = 0;
  for (const auto& m : models) {
    const auto ex = run_cylinder_oracle(m, 4, true);
    const auto fl = run_cylinder_oracle(m, 4, false, 1e-12);
    if (!ex.ok() || ex.max_discrepancy != 0)
      return {false, fmt("exact mismatch on a model with %zu agents", m.agent_count())};
    if (!fl.ok() || fl.max_discrepancy > 1e-12)
      return {false, fmt("float discrepancy %.3g", fl.max_discrepancy)};
    trajectories += ex.trajectories;
    worst = std::max(worst, fl.max_discrepancy);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {secs < 60, fmt("26 models, %zu trajectories up to depth 4, exact equal, float max discrepancy %.3g",
                         trajectories, worst)};
}

result coin_measures() {
  const auto m = build_coin_game();
  const auto c = build_markov_chain_as<rational>(m);
  const auto xt = coin_traj(m, {"e_t"});
  const auto xh = coin_traj(m, {"e_h"});
  const auto xh2 = coin_traj(m, {"e'_h"});
  const rational a = union_prob<rational>(m, c, {xt});
  const rational b = union_prob<rational>(m, c, {xh, xt});
  const rational d = union_prob<rational>(m, c, {xh, xh2});
  const bool ok = a == rational(1, 2) && b == 1 && d == rational(3, 4);
  std::ostringstream s;
  s << "cylinders e_t: " << a << ", e_h or e_t: " << b << ", e_h or e'_h: " << d;
  return {ok, s.str()};
}

result foata_suite() {
  const auto coin = build_coin_game();
  event_sequence xi;
  for (const auto* l : {"e_h", "e'_t", "ht", "l'", "w", "w"}) xi.push_back(by_label(coin, l));
  const auto rendered = render(coin, foata(coin, xi));
  if (rendered != "{e_h,e'_t}{ht}{l',w}{w}") return {false, "coin normal form " + rendered};

  std::vector<model> models{build_coin_game(), build_itai_rodeh(3, 2), build_dining_philosophers(3)};
  std::mt19937_64 rng(77);
  while (models.size() < 6) models.push_back(testing::random_dmc(rng));
  std::size_t equal_pairs = 0, unequal_pairs = 0;
  for (const auto& m : models) {
    for (int k = 0; k < 10'000; ++k) {
      const auto len = 2 + rng() % 14;
      const auto base = testing::random_walk(m, m.initial_state(), len, rng);
      // shuffle by adjacent swaps of independent events
      auto same = base;
      const auto swaps = rng() % (2 * same.size() + 1);
      for (std::size_t t = 0; t + 1 < same.size() && t < swaps; ++t) {
        const auto i = rng() % (same.size() - 1);
        if (independent(m, same[i], same[i + 1])) std::swap(same[i], same[i + 1]);
      }
      if (!trace_equiv(m, base, same) || !(foata(m, base) == foata(m, same)))
        return {false, "independent swaps changed the trace"};
      ++equal_pairs;
      // an arbitrary second sequence, or one dependent swap
      auto other = testing::random_walk(m, m.initial_state(), len, rng);
      if (rng() & 1 && base.size() >= 2) {
        other = base;
        const auto i = rng() % (other.size() - 1);
        std::swap(other[i], other[i + 1]);
      }
      const bool eq = trace_equiv(m, base, other);
      if (eq != (foata(m, base) == foata(m, other))) return {false, "equivalence and normal form disagree"};
      if (eq) ++equal_pairs;
      else ++unequal_pairs;
    }
  }
  return {true, fmt("normal form %s; %zu models x 10000 sequences, %zu equivalent and %zu distinct pairs agree",
                    rendered.c_str(), models.size(), equal_pairs, unequal_pairs)};
}

result stochasticity() {
  std::vector<std::pair<std::string, model>> models;
  models.emplace_back("coin", build_coin_game());
  for (std::uint32_t n = 2; n <= 4; ++n) models.emplace_back(fmt("itai-rodeh %u", n), build_itai_rodeh(n, n));
  models.emplace_back("dining 3", build_dining_philosophers(3));
  std::mt19937_64 rng(4);
  std::string detail;
  for (const auto& [name, m] : models) {
    const auto c = build_markov_chain(m);
    double worst = 0;
    for (std::uint32_t s = 0; s < c.size(); ++s) {
      double sum = 0;
      for (const auto& e : c.row(s)) sum += e.prob;
      worst = std::max(worst, std::abs(sum - 1));
    }
    if (worst > 1e-9) return {false, name + fmt(" row error %.3g", worst)};
    const std::size_t probes = std::min<std::size_t>(100, c.size());
    for (std::size_t k = 0; k < probes; ++k) {
      const auto id = static_cast<std::uint32_t>(c.size() <= 100 ? k : rng() % c.size());
      const auto want = testing::brute_chain_row(m, c.state(id));
      std::map<global_state, double> got;
      for (const auto& e : c.row(id)) got[c.state(e.target)] += e.prob;
      if (got.size() != want.size()) return {false, name + " successor sets differ"};
      for (const auto& [t, p] : want) {
        const auto it = got.find(t);
        if (it == got.end() || std::abs(it->second - static_cast<double>(p)) > 1e-12)
          return {false, name + " transition probabilities differ"};
      }
    }
    detail += fmt("%s: %zu states, max row error %.2g; ", name.c_str(), c.size(), worst);
  }
  detail += "up to 100 states per model match the brute-force enumerator";
  return {true, detail};
}

result calibration() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = build_coin_game();
  const auto w1 = *m.find_state("W1");
  const rational exact = testing::brute_eventually(m, w1.agent, w1.local, 7);
  const double p = static_cast<double>(exact);
  const auto f = parse_bltl(m, "F[7] W1");
  sprt_config cfg;
  cfg.alpha = cfg.beta = 0.05;
  cfg.delta = 0.02;
  const int trials = 500;
  int wrong_high = 0, wrong_low = 0;
  std::uint64_t samples = 0;
  for (int t = 0; t < trials; ++t) {
    cfg.seed = 1000 + t;
    const auto hi = sprt_run(m, f, p + 0.1, cfg);  // truth below: reject expected
    const auto lo = sprt_run(m, f, p - 0.1, cfg);  // truth above: accept expected
    wrong_high += hi.result != verdict::reject;
    wrong_low += lo.result != verdict::accept;
    samples += hi.samples + lo.samples;
  }
  const double rh = double(wrong_high) / trials, rl = double(wrong_low) / trials;
  std::ostringstream s;
  s << "p* = " << exact << "; wrong verdicts at p*+0.1: " << rh << ", at p*-0.1: " << rl << ", mean samples "
    << double(samples) / (2 * trials);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {rh <= 0.10 && rl <= 0.10 && secs < 300, s.str()};
}

result leader_election() {
  const auto dir = work_dir();
  const auto model = (dir / "ir16.json").string();
  const auto spec = (dir / "ir16.spec").string();
  const auto t0 = std::chrono::steady_clock::now();
  if (cli({"gen", "itai-rodeh", "--n", "16", "--gamma", "0.99", "--out", model, "--spec-out", spec}).code != 0)
    return {false, "gen failed"};
  std::vector<json> leaves;
  for (int rep = 0; rep < 2; ++rep) {
    const auto r = cli({"check", "--model", model, "--spec", spec, "--delta", "0.005", "--seed", "42"});
    if (r.code != 0) return {false, fmt("check exit code %d: %s", r.code, r.err.c_str())};
    leaves.push_back(json::parse(r.out)["result"]["tree"]);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (leaves[0]["samples"] != leaves[1]["samples"] || leaves[0]["positives"] != leaves[1]["positives"])
    return {false, "sample counts differ between identical runs"};

  // throughput at N = 100, one election round, for regression tracking
  const auto big = (dir / "ir100.json").string();
  const auto big_spec = (dir / "ir100.spec").string();
  if (cli({"gen", "itai-rodeh", "--n", "100", "--id-range", "2", "--rounds", "1", "--gamma", "0.5", "--out", big,
           "--spec-out", big_spec})
          .code != 0)
    return {false, "gen n=100 failed"};
  const auto tp = cli({"check", "--model", big, "--spec", big_spec, "--seed", "1", "--max-samples", "40"});
  if (tp.code > 2) return {false, "n=100 check failed: " + tp.err};
  const auto timing = json::parse(tp.out)["result"]["tree"]["timing"];
  fs::remove(big);
  return {secs < 60, fmt("n=16 accept, %llu samples twice, %.1f s; n=100 throughput %.1f samples/s, %.3g events/s",
                         leaves[0]["samples"].get<unsigned long long>(), secs,
                         timing["samples_per_second"].get<double>(), timing["events_per_second"].get<double>())};
}

result dining() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto small = build_dining_philosophers(3);
  const auto deadlocks = find_reachable_deadlocks(small, 100'000);
  const auto states = count_reachable_states(small, 100'000);
  const auto m = build_dining_philosophers(10);
  const auto spec = parse_spec(m, dining_fraction_spec(10, 0.4, 0.95));
  sprt_config cfg;
  cfg.seed = 7;
  const auto r = check_spec(m, spec, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& leaf = *r.leaf;
  return {deadlocks.empty() && r.result == verdict::accept && secs < 120,
          fmt("n=3: %zu reachable states, %zu deadlocks; n=10 fraction 0.4 at 0.95: %s after %llu samples, %.1f s",
              states, deadlocks.size(), std::string(to_string(r.result)).c_str(),
              static_cast<unsigned long long>(leaf.samples), secs)};
}

result bound_soundness() {
  struct subject {
    model m;
    std::vector<bltl> formulas;
  };
  std::vector<subject> subjects;
  {
    auto m = build_coin_game();
    std::vector<bltl> fs;
    fs.push_back(threshold_leaves(parse_spec(m, coin_game_spec()))[0]->formula);
    fs.push_back(parse_bltl(m, "G[4] !L1 | F[2] W2"));
    fs.push_back(parse_bltl(m, "(in1 | T1) U[5] W1 & !(in2 U[3] L2)"));
    subjects.push_back({std::move(m), std::move(fs)});
  }
  {
    auto m = build_itai_rodeh(3, 2);
    std::vector<bltl> fs{threshold_leaves(parse_spec(m, itai_rodeh_spec(3, 0.9, 1)))[0]->formula};
    subjects.push_back({std::move(m), std::move(fs)});
  }
  {
    auto m = build_dining_philosophers(4);
    std::vector<bltl> fs{threshold_leaves(parse_spec(m, dining_fraction_spec(4, 0.5, 0.9, 12)))[0]->formula,
                         parse_bltl(m, "G[6] !eaten_1 | F[3] eaten_2")};
    subjects.push_back({std::move(m), std::move(fs)});
  }
  std::mt19937_64 rng(8);
  std::size_t total = 0, positives = 0;
  for (std::size_t i = 0; total < 1000; ++i) {
    const auto& sub = subjects[i % subjects.size()];
    const auto& f = sub.formulas[(i / subjects.size()) % sub.formulas.size()];
    auto srng = sample_rng(5, i);
    const auto r = sample_trajectory(sub.m, bound_vector_of(f, sub.m.agent_count()), {}, srng);
    const bool v = eval_trajectory(sub.m, f, r.traj);
    const auto states = r.traj.states(sub.m);
    for (int ext = 0; ext < 3; ++ext) {
      auto longer = r.traj;
      const auto more = testing::random_walk(sub.m, states.back(), 1 + rng() % 40, rng);
      longer.events.insert(longer.events.end(), more.begin(), more.end());
      if (eval_trajectory(sub.m, f, longer) != v) return {false, "extension changed the verdict of " + to_string(sub.m, f)};
    }
    ++total;
    positives += v;
  }
  return {true, fmt("%zu sampled trajectories (%zu satisfying), 3 random extensions each, verdicts unchanged", total,
                    positives)};
}

result determinism() {
  const auto dir = work_dir();
  const auto coin = (dir / "coin.json").string();
  const auto ring = (dir / "ir4.json").string();
  const auto ring_spec = (dir / "ir4.spec").string();
  cli({"gen", "coin", "--out", coin});
  cli({"gen", "itai-rodeh", "--n", "4", "--gamma", "0.95", "--out", ring, "--spec-out", ring_spec});
  const std::vector<std::vector<std::string>> cases{
      {"check", "--model", coin, "--formula", "P>=0.45 [F[7] W1]", "--delta", "0.02"},
      {"check", "--model", coin, "--formula", "P>=0.3 [F[7] W1] | P>=0.3 [F[7] W2]"},
      {"check", "--model", ring, "--spec", ring_spec},
  };
  std::size_t runs = 0;
  for (const auto& base : cases) {
    json first_tree;
    for (const auto* workers : {"1", "4"}) {
      json reports[2];
      for (int rep = 0; rep < 2; ++rep) {
        auto args = base;
        for (const auto* extra : {"--seed", "12345", "--workers", workers}) args.push_back(extra);
        const auto r = cli(args);
        if (r.code > 2) return {false, "check failed: " + r.err};
        reports[rep] = json::parse(r.out);
        strip_timing(reports[rep]);
        ++runs;
      }
      if (reports[0] != reports[1]) return {false, "repeated reports differ"};
      auto tree = reports[0]["result"];
      if (first_tree.is_null()) first_tree = tree;
      else if (tree != first_tree) return {false, "worker counts disagree"};
    }
  }
  return {true, fmt("%zu check runs: identical reports modulo timing for repeats, and for workers 1 and 4", runs)};
}

}  // namespace

// With an argument N only criterion N runs.
int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<result()>>> criteria{
      {"cylinder oracle equivalence", cylinder_identity},
      {"coin game measure values", coin_measures},
      {"foata and trace equivalence", foata_suite},
      {"chain stochasticity", stochasticity},
      {"sprt calibration", calibration},
      {"leader election", leader_election},
      {"dining philosophers", dining},
      {"bound vector soundness", bound_soundness},
      {"determinism", determinism},
  };
  std::size_t first = 0, last = criteria.size();
  if (argc > 1) {
    first = std::stoul(argv[1]) - 1;
    last = first + 1;
    if (first >= criteria.size()) return 2;
  }
  int failures = 0;
  for (std::size_t i = first; i < last; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "criterion " << i + 1 << " [" << (r.pass ? "PASS" : "FAIL") << "] " << criteria[i].first << " ("
              << fmt("%.1f s", secs) << "): " << r.detail << std::endl;
    failures += !r.pass;
  }
  fs::remove_all(work_dir());
  return failures == 0 ? 0 : 1;
}
