#include "commands.hpp"

#include "dmc/benchmarks.hpp"
#include "dmc/errors.hpp"
#include "dmc/model_io.hpp"
#include "dmc/smc.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <random>

namespace dmc::cli {
namespace {

using json = nlohmann::ordered_json;
using clock_type = std::chrono::steady_clock;

std::shared_ptr<spdlog::logger> log() {
  static const auto logger = [] {
    auto l = spdlog::stderr_color_mt("dmc");
    l->set_pattern("[%l] %v");
    const char* env = std::getenv("DMC_LOG");
    l->set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
    return l;
  }();
  return logger;
}

double since(clock_type::time_point t0) { return std::chrono::duration<double>(clock_type::now() - t0).count(); }

struct common_opts {
  std::string format = "json";
};

void emit(std::ostream& out, const common_opts& c, const json& report, const std::vector<std::string>& human) {
  if (c.format == "human") {
    for (const auto& line : human) out << line << '\n';
  } else {
    out << report.dump(2) << '\n';
  }
}

json base_report(const std::string& command) {
  return json{{"format_version", report_format_version}, {"command", command}};
}

json violations_json(const std::vector<violation>& vs) {
  json arr = json::array();
  for (const auto& v : vs) arr.push_back({{"kind", std::string(to_string(v.kind))}, {"message", v.message}});
  return arr;
}

// ---------------------------------------------------------------------------
// validate

struct validate_opts {
  std::string model;
  bool exact = false;
  bool terminal_warnings = false;
};

int cmd_validate(const validate_opts& o, const common_opts& c, std::ostream& out) {
  const auto t0 = clock_type::now();
  const auto m = load_model(o.model);
  const auto rep = validate(m, {o.exact, o.terminal_warnings, 1e-9});
  auto r = base_report("validate");
  r["config"] = {{"model", o.model}, {"exact_rational", o.exact}, {"terminal_states_are_warnings", o.terminal_warnings},
                 {"tolerance", 1e-9}};
  r["result"] = {{"ok", rep.ok()},
                 {"agents", m.agent_count()},
                 {"actions", m.action_count()},
                 {"errors", violations_json(rep.errors)}};
  r["warnings"] = violations_json(rep.warnings);
  r["timing"] = {{"seconds", since(t0)}};
  std::vector<std::string> human{rep.ok() ? "ok" : "invalid"};
  for (const auto& v : rep.errors) human.push_back("error: " + v.message);
  for (const auto& v : rep.warnings) human.push_back("warning: " + v.message);
  emit(out, c, r, human);
  return rep.ok() ? exit_ok : exit_invalid;
}

// ---------------------------------------------------------------------------
// check

struct check_opts {
  std::string model;
  std::string spec;
  std::string formula;
  double alpha = 0.01;
  double beta = 0.01;
  double delta = 0.01;
  std::optional<std::uint64_t> seed;
  std::uint64_t max_samples = 0;
  unsigned workers = 1;
  std::string dead = "never";
  std::size_t dead_budget = 100'000;
  std::uint64_t max_events = 10'000'000;
  bool trace = false;
  bool exact = false;
};

json leaf_json(const model& m, const pbltl& p, const check_result& r) {
  json j{{"kind", "threshold"}, {"gamma", p->gamma}, {"formula", to_string(m, p->formula)},
         {"leaf_index", r.leaf_index}};
  if (r.skipped) {
    j["skipped"] = true;
    return j;
  }
  const auto& o = *r.leaf;
  j["verdict"] = std::string(to_string(o.result));
  j["seed"] = o.seed;
  j["samples"] = o.samples;
  j["positives"] = o.positives;
  j["score"] = o.score;
  j["log_accept"] = o.log_accept;
  j["log_reject"] = o.log_reject;
  j["events"] = o.events;
  j["dead_fallbacks"] = o.dead_fallbacks;
  if (!o.scores.empty()) j["scores"] = o.scores;
  const double secs = o.seconds > 0 ? o.seconds : 1e-9;
  j["timing"] = {{"seconds", o.seconds},
                 {"samples_per_second", static_cast<double>(o.samples) / secs},
                 {"events_per_second", static_cast<double>(o.events) / secs}};
  return j;
}

json tree_json(const model& m, const pbltl& p, const check_result& r) {
  if (p->kind == pbltl_kind::threshold) return leaf_json(m, p, r);
  json j{{"kind", p->kind == pbltl_kind::negation ? "not" : "or"}};
  if (r.skipped) j["skipped"] = true;
  else j["verdict"] = std::string(to_string(r.result));
  json kids = json::array();
  kids.push_back(tree_json(m, p->lhs, r.children.at(0)));
  if (p->rhs) kids.push_back(tree_json(m, p->rhs, r.children.at(1)));
  j["children"] = std::move(kids);
  return j;
}

void human_tree(const model& m, const pbltl& p, const check_result& r, const std::string& indent,
                std::vector<std::string>& lines) {
  if (p->kind == pbltl_kind::threshold) {
    std::string line = indent + to_string(m, p) + ": ";
    if (r.skipped) line += "skipped";
    else
      line += std::string(to_string(r.result)) + " (samples " + std::to_string(r.leaf->samples) + ", positives " +
              std::to_string(r.leaf->positives) + ")";
    lines.push_back(line);
    return;
  }
  lines.push_back(indent + (p->kind == pbltl_kind::negation ? "not" : "or") + ": " +
                  (r.skipped ? "skipped" : std::string(to_string(r.result))));
  human_tree(m, p->lhs, r.children.at(0), indent + "  ", lines);
  if (p->rhs) human_tree(m, p->rhs, r.children.at(1), indent + "  ", lines);
}

int cmd_check(check_opts o, const common_opts& c, std::ostream& out, std::ostream& err) {
  const auto t0 = clock_type::now();
  if (!o.seed) o.seed = (std::uint64_t{std::random_device{}()} << 32) ^ std::random_device{}();
  const auto mode = parse_dead_mode(o.dead);
  if (!mode) throw domain_error("--dead-mode must be never or exact");
  if (o.spec.empty() == o.formula.empty()) throw domain_error("give exactly one of --spec and --formula");

  log()->info("loading model {}", o.model);
  const auto m = load_model(o.model);
  const auto rep = validate(m, {o.exact, false, 1e-9});
  if (!rep.ok()) {
    for (const auto& v : rep.errors) err << "error: " << v.message << '\n';
    return exit_invalid;
  }
  const auto text = o.spec.empty() ? o.formula : read_text_file(o.spec);
  const auto spec = parse_spec(m, text);

  sprt_config cfg;
  cfg.alpha = o.alpha;
  cfg.beta = o.beta;
  cfg.delta = o.delta;
  cfg.seed = *o.seed;
  cfg.max_samples = o.max_samples;
  cfg.workers = o.workers;
  cfg.sampler = {*mode, o.dead_budget, o.max_events};
  cfg.record_scores = o.trace;
  log()->info("checking {} with seed {}", to_string(m, spec), cfg.seed);
  const auto result = check_spec(m, spec, cfg);

  auto r = base_report("check");
  r["config"] = {{"model", o.model},
                 {"spec", o.spec.empty() ? json(nullptr) : json(o.spec)},
                 {"formula", to_string(m, spec)},
                 {"alpha", o.alpha},
                 {"beta", o.beta},
                 {"delta", o.delta},
                 {"seed", cfg.seed},
                 {"max_samples", o.max_samples},
                 {"workers", o.workers},
                 {"dead_mode", o.dead},
                 {"dead_budget", o.dead_budget},
                 {"max_events", o.max_events},
                 {"trace", o.trace},
                 {"exact_rational", o.exact}};
  r["result"] = {{"verdict", std::string(to_string(result.result))}, {"tree", tree_json(m, spec, result)}};
  r["warnings"] = violations_json(rep.warnings);
  r["timing"] = {{"seconds", since(t0)}};

  std::vector<std::string> human{"verdict: " + std::string(to_string(result.result)),
                                 "seed: " + std::to_string(cfg.seed)};
  human_tree(m, spec, result, "  ", human);
  emit(out, c, r, human);
  switch (result.result) {
    case verdict::accept: return exit_ok;
    case verdict::reject: return exit_reject;
    case verdict::inconclusive: return exit_inconclusive;
  }
  return exit_inconclusive;
}

// ---------------------------------------------------------------------------
// chain

struct chain_opts {
  std::string model;
  std::size_t max_states = default_max_states;
  std::string export_format = "text";
  std::string out;
  bool exact = false;
};

int cmd_chain(const chain_opts& o, const common_opts& c, std::ostream& out) {
  const auto t0 = clock_type::now();
  const auto m = load_model(o.model);
  if (const auto rep = validate(m, {o.exact, false, 1e-9}); !rep.ok())
    throw domain_error("model is invalid; run validate for details");
  const auto chain = build_markov_chain(m, o.max_states);
  double max_row_error = 0;
  std::size_t deadlocks = 0;
  for (std::uint32_t s = 0; s < chain.size(); ++s) {
    double sum = 0;
    for (const auto& e : chain.row(s)) sum += e.prob;
    max_row_error = std::max(max_row_error, std::abs(sum - 1));
    deadlocks += chain.is_deadlock(s);
  }
  json exact_check = nullptr;
  if (o.exact) {
    const auto ex = build_markov_chain_as<rational>(m, o.max_states);
    std::size_t bad = 0;
    for (std::uint32_t s = 0; s < ex.size(); ++s) {
      rational sum(0);
      for (const auto& e : ex.row(s)) sum += e.prob;
      bad += sum != 1;
    }
    exact_check = {{"rows_not_summing_to_one", bad}};
  }
  if (!o.out.empty())
    write_text_file(o.out, o.export_format == "json" ? chain_to_json(m, chain) : chain_to_text(m, chain));

  auto r = base_report("chain");
  r["config"] = {{"model", o.model}, {"max_states", o.max_states}, {"export", o.export_format},
                 {"out", o.out.empty() ? json(nullptr) : json(o.out)}, {"exact_rational", o.exact}};
  r["result"] = {{"states", chain.size()},
                 {"edges", chain.edge_count()},
                 {"deadlocks", deadlocks},
                 {"initial", format_state(m, chain.state(chain.initial()))},
                 {"max_row_error", max_row_error},
                 {"exact", exact_check}};
  r["timing"] = {{"seconds", since(t0)}};
  emit(out, c, r,
       {"states: " + std::to_string(chain.size()), "edges: " + std::to_string(chain.edge_count()),
        "deadlocks: " + std::to_string(deadlocks)});
  if (o.out.empty() && c.format == "human") out << chain_to_text(m, chain);
  return exit_ok;
}

// ---------------------------------------------------------------------------
// gen

struct gen_opts {
  std::string family;
  std::uint32_t n = 0;
  std::uint32_t id_range = 0;
  std::uint32_t capacity = 1;
  std::optional<double> gamma;
  std::uint32_t rounds = 0;
  std::uint32_t bound = dining_default_bound;
  double fraction = 0.4;
  std::string property = "fraction";
  std::string out;
  std::string spec_out;
};

int cmd_gen(gen_opts o, const common_opts& c, std::ostream& out) {
  const auto t0 = clock_type::now();
  std::optional<model> m;
  std::string spec;
  json params;
  if (o.family == "coin-game" || o.family == "coin") {
    m = build_coin_game();
    spec = coin_game_spec(o.gamma.value_or(0.99));
  } else if (o.family == "itai-rodeh" || o.family == "ir") {
    if (o.n == 0) o.n = 4;
    if (o.id_range == 0) o.id_range = o.n;
    m = build_itai_rodeh(o.n, o.id_range, o.capacity);
    spec = itai_rodeh_spec(o.n, o.gamma.value_or(0.99), o.rounds);
    params = {{"n", o.n}, {"id_range", o.id_range}, {"channel_capacity", o.capacity},
              {"rounds", o.rounds ? o.rounds : o.n}};
  } else if (o.family == "dining-philosophers" || o.family == "dining") {
    if (o.n == 0) o.n = 3;
    m = build_dining_philosophers(o.n);
    spec = o.property == "all" ? dining_all_eat_spec(o.n, o.gamma.value_or(0.95), o.bound)
                               : dining_fraction_spec(o.n, o.fraction, o.gamma.value_or(0.95), o.bound);
    params = {{"n", o.n}, {"bound", o.bound}, {"property", o.property}, {"fraction", o.fraction}};
  } else {
    throw domain_error("unknown family '" + o.family + "' (coin-game, itai-rodeh, dining-philosophers)");
  }
  const auto text = serialize_model(*m);
  if (!o.spec_out.empty()) write_text_file(o.spec_out, spec);
  if (o.out.empty()) {
    out << text;
    return exit_ok;
  }
  write_text_file(o.out, text);
  auto r = base_report("gen");
  r["config"] = {{"family", o.family}, {"params", params}, {"out", o.out},
                 {"spec_out", o.spec_out.empty() ? json(nullptr) : json(o.spec_out)}};
  r["result"] = {{"agents", m->agent_count()}, {"actions", m->action_count()}, {"bytes", text.size()}};
  r["timing"] = {{"seconds", since(t0)}};
  emit(out, c, r, {"wrote " + o.out});
  return exit_ok;
}

// ---------------------------------------------------------------------------
// oracle

struct oracle_opts {
  std::string model;
  std::size_t depth = 4;
  bool exact = false;
  double tolerance = 1e-12;
  std::size_t max_states = default_max_states;
};

int cmd_oracle(const oracle_opts& o, const common_opts& c, std::ostream& out) {
  const auto t0 = clock_type::now();
  const auto m = load_model(o.model);
  if (const auto rep = validate(m, {o.exact, false, 1e-9}); !rep.ok())
    throw domain_error("model is invalid; run validate for details");
  const auto rep = run_cylinder_oracle(m, o.depth, o.exact, o.tolerance, o.max_states);
  auto r = base_report("oracle");
  r["config"] = {{"model", o.model}, {"depth", o.depth}, {"exact_rational", o.exact}, {"tolerance", o.tolerance},
                 {"max_states", o.max_states}};
  r["result"] = {{"ok", rep.ok()},
                 {"trajectories", rep.trajectories},
                 {"mismatches", rep.mismatches},
                 {"max_discrepancy", rep.max_discrepancy},
                 {"chain_states", rep.chain_states}};
  r["timing"] = {{"seconds", since(t0)}};
  emit(out, c, r,
       {std::string(rep.ok() ? "ok" : "MISMATCH") + ": " + std::to_string(rep.trajectories) +
        " trajectories, max discrepancy " + std::to_string(rep.max_discrepancy)});
  return rep.ok() ? exit_ok : exit_invalid;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Distributed Markov chains: validation, chain export and statistical model checking", "dmc"};
  app.require_subcommand(1);
  common_opts common;
  const auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", common.format, "Report format")->check(CLI::IsMember({"json", "human"}));
  };

  validate_opts vo;
  auto* v = app.add_subcommand("validate", "Check the structural invariants of a model");
  v->add_option("model,--model", vo.model, "Model JSON file")->required();
  v->add_flag("--exact-rational", vo.exact, "Compare distribution sums exactly");
  v->add_flag("--terminal-warnings", vo.terminal_warnings, "Report states without actions as warnings");
  add_format(v);

  check_opts co;
  auto* ck = app.add_subcommand("check", "Statistical model checking of a PBLTL spec");
  ck->add_option("--model", co.model, "Model JSON file")->required();
  ck->add_option("--spec", co.spec, "Spec file");
  ck->add_option("--formula", co.formula, "Inline spec");
  ck->add_option("--alpha", co.alpha, "Type I error bound")->capture_default_str();
  ck->add_option("--beta", co.beta, "Type II error bound")->capture_default_str();
  ck->add_option("--delta", co.delta, "Half width of the indifference region")->capture_default_str();
  ck->add_option("--seed", co.seed, "Random seed (generated and echoed if absent)");
  ck->add_option("--max-samples", co.max_samples, "Per-test sample cap, 0 for none")->capture_default_str();
  ck->add_option("--workers", co.workers, "Sampling threads")->check(CLI::PositiveNumber)->capture_default_str();
  ck->add_option("--dead-mode", co.dead, "Dead agent detection")->check(CLI::IsMember({"never", "exact"}));
  ck->add_option("--dead-budget", co.dead_budget, "State budget per exact dead-agent search");
  ck->add_option("--max-events", co.max_events, "Per-sample event cap")->capture_default_str();
  ck->add_flag("--trace", co.trace, "Record the score after every sample");
  ck->add_flag("--exact-rational", co.exact, "Validate distribution sums exactly");
  add_format(ck);

  chain_opts cho;
  auto* ch = app.add_subcommand("chain", "Build the global Markov chain");
  ch->add_option("--model", cho.model, "Model JSON file")->required();
  ch->add_option("--max-states", cho.max_states, "State budget")->capture_default_str();
  ch->add_option("--export", cho.export_format, "Export format")->check(CLI::IsMember({"text", "json"}));
  ch->add_option("--out", cho.out, "Export file");
  ch->add_flag("--exact-rational", cho.exact, "Also check row sums with exact rationals");
  add_format(ch);

  gen_opts go;
  auto* g = app.add_subcommand("gen", "Generate a benchmark model");
  g->add_option("family", go.family, "coin-game | itai-rodeh | dining-philosophers")->required();
  g->add_option("--n", go.n, "Processes or philosophers");
  g->add_option("--id-range", go.id_range, "Identity range (itai-rodeh, default n)");
  g->add_option("--capacity", go.capacity, "Channel capacity (itai-rodeh)")->check(CLI::PositiveNumber);
  g->add_option("--gamma", go.gamma, "Threshold of the generated spec");
  g->add_option("--rounds", go.rounds, "Election rounds in the spec (itai-rodeh, default n)");
  g->add_option("--bound", go.bound, "Local bound of the eating spec (dining)")->capture_default_str();
  g->add_option("--fraction", go.fraction, "Fraction of philosophers that must eat")->capture_default_str();
  g->add_option("--property", go.property, "Dining spec")->check(CLI::IsMember({"fraction", "all"}));
  g->add_option("--out", go.out, "Model file (stdout if absent)");
  g->add_option("--spec-out", go.spec_out, "Spec file");
  add_format(g);

  oracle_opts oo;
  auto* orc = app.add_subcommand("oracle", "Exhaustive cylinder-measure cross-check");
  orc->add_option("--model", oo.model, "Model JSON file")->required();
  orc->add_option("--depth", oo.depth, "Trajectory length")->capture_default_str();
  orc->add_flag("--exact-rational", oo.exact, "Use exact rationals");
  orc->add_option("--tolerance", oo.tolerance, "Float tolerance")->capture_default_str();
  orc->add_option("--max-states", oo.max_states, "State budget")->capture_default_str();
  add_format(orc);

  std::vector<const char*> argv{"dmc"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_input_error;
  }

  try {
    if (*v) return cmd_validate(vo, common, out);
    if (*ck) return cmd_check(co, common, out, err);
    if (*ch) return cmd_chain(cho, common, out);
    if (*g) return cmd_gen(go, common, out);
    if (*orc) return cmd_oracle(oo, common, out);
  } catch (const parse_error& e) {
    err << "parse error: " << e.what() << '\n';
  } catch (const io_error& e) {
    err << "i/o error: " << e.what() << '\n';
  } catch (const state_budget_exceeded& e) {
    err << "state budget exceeded after " << e.states_explored() << " states: " << e.what() << '\n';
  } catch (const sampling_error& e) {
    err << "sampling error: " << e.what() << '\n';
  } catch (const domain_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return exit_input_error;
}

}  // namespace dmc::cli
