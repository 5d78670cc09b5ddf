#include "dmc/smc.hpp"

#include "dmc/errors.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <map>
#include <thread>
#include <unordered_set>

namespace dmc {

std::string_view to_string(dead_mode d) { return d == dead_mode::exact ? "exact" : "never"; }

std::optional<dead_mode> parse_dead_mode(std::string_view s) {
  if (s == "never") return dead_mode::never;
  if (s == "exact") return dead_mode::exact;
  return std::nullopt;
}

std::string_view to_string(verdict v) {
  switch (v) {
    case verdict::accept: return "accept";
    case verdict::reject: return "reject";
    case verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

std::optional<std::vector<bool>> dead_agents(const model& m, const global_state& s, dead_mode mode,
                                             std::size_t budget) {
  const auto n = m.agent_count();
  if (mode == dead_mode::never) return std::vector<bool>(n, false);
  std::vector<bool> live(n, false);
  std::size_t live_count = 0;
  state_interner seen(n);
  seen.intern(s);
  std::deque<std::uint32_t> queue{0};
  while (!queue.empty() && live_count < n) {
    const auto cur = seen.state(queue.front());
    queue.pop_front();
    for (const auto& e : enabled_events(m, cur)) {
      for (const auto a : loc(m, e))
        if (!live[idx(a)]) {
          live[idx(a)] = true;
          ++live_count;
        }
      auto next = cur;
      apply_event(m, next, e);
      const auto [id, inserted] = seen.intern(next);
      if (!inserted) continue;
      if (seen.size() > budget) return std::nullopt;
      queue.push_back(id);
    }
  }
  std::vector<bool> dead(n);
  for (std::size_t i = 0; i < n; ++i) dead[i] = !live[i];
  return dead;
}

namespace {

std::uint32_t draw_outcome(const action_def& def, std::uint32_t row, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0;
  std::uint32_t last = def.outcomes_begin(row);
  for (auto o = def.outcomes_begin(row); o < def.outcomes_end(row); ++o) {
    if (def.prob(o) <= 0) continue;
    last = o;
    acc += def.prob(o);
    if (u < acc) return o;
  }
  return last;
}

}  // namespace

sample_result sample_trajectory(const model& m, const bound_vector& bounds, const sampler_options& opts,
                                std::mt19937_64& rng) {
  const auto n = m.agent_count();
  sample_result r;
  r.traj.start = m.initial_state();
  r.counts.assign(n, 0);
  r.dead.assign(n, false);
  auto& s = r.traj.start;
  global_state cur = s;
  bool exact_dead = opts.mode == dead_mode::exact;
  std::map<global_state, std::vector<bool>> dead_cache;

  const auto satisfied = [&](std::size_t i) { return r.counts[i] >= bounds.at(i) || r.dead[i]; };
  std::vector<bool> moving(n);
  while (true) {
    bool done = true;
    for (std::size_t i = 0; i < n && done; ++i) done = satisfied(i);
    if (done) return r;

    const auto acts = enabled_actions(m, cur);
    if (exact_dead) {
      std::fill(moving.begin(), moving.end(), false);
      for (const auto& ea : acts)
        for (const auto a : m.action(ea.action).loc()) moving[idx(a)] = true;
      bool stalled = false;
      for (std::size_t i = 0; i < n; ++i) stalled = stalled || (!satisfied(i) && !moving[i]);
      if (stalled) {
        auto it = dead_cache.find(cur);
        if (it == dead_cache.end()) {
          if (auto d = dead_agents(m, cur, dead_mode::exact, opts.dead_budget)) it = dead_cache.emplace(cur, *d).first;
        }
        if (it == dead_cache.end()) {
          ++r.dead_fallbacks;
          exact_dead = false;
        } else {
          for (std::size_t i = 0; i < n; ++i) r.dead[i] = r.dead[i] || it->second[i];
          bool now_done = true;
          for (std::size_t i = 0; i < n && now_done; ++i) now_done = satisfied(i);
          if (now_done) return r;
        }
      }
    }
    if (acts.empty()) throw sampling_error("sampled run reached deadlock " + format_state(m, cur));

    for (const auto& ea : acts) {
      const auto& def = m.action(ea.action);
      const event e{ea.action, draw_outcome(def, ea.row, rng)};
      apply_event(m, cur, e);
      for (const auto a : def.loc()) ++r.counts[idx(a)];
      r.traj.events.push_back(e);
    }
    if (r.traj.events.size() > opts.max_events)
      throw sampling_error("sample exceeded " + std::to_string(opts.max_events) + " events");
  }
}

void check_config(const sprt_config& cfg, double gamma) {
  const auto in01 = [](double x) { return x > 0 && x < 1; };
  if (!in01(cfg.alpha) || !in01(cfg.beta)) throw domain_error("alpha and beta must lie in (0, 1)");
  if (cfg.alpha + cfg.beta >= 1) throw domain_error("alpha + beta must be below 1");
  if (!(cfg.delta > 0)) throw domain_error("delta must be positive");
  if (!in01(gamma)) throw domain_error("threshold must lie in (0, 1)");
  if (!(gamma - cfg.delta > 0) || !(gamma + cfg.delta < 1))
    throw domain_error("indifference region (" + std::to_string(gamma - cfg.delta) + ", " +
                       std::to_string(gamma + cfg.delta) + ") must lie inside (0, 1)");
  if (cfg.workers == 0) throw domain_error("workers must be at least 1");
}

namespace {

struct sample_summary {
  bool positive = false;
  std::uint64_t events = 0;
  std::size_t dead_fallbacks = 0;
};

sample_summary run_sample(const model& m, const bltl& f, const bound_vector& bounds, const sprt_config& cfg,
                          std::uint64_t index) {
  auto rng = sample_rng(cfg.seed, index);
  const auto r = sample_trajectory(m, bounds, cfg.sampler, rng);
  return {eval_trajectory(m, f, r.traj), r.traj.events.size(), r.dead_fallbacks};
}

// Samples [first, first + out.size()) on `workers` threads.
void fill_batch(const model& m, const bltl& f, const bound_vector& bounds, const sprt_config& cfg,
                std::uint64_t first, std::vector<sample_summary>& out) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  const auto work = [&] {
    while (!failed) {
      const auto k = next.fetch_add(1);
      if (k >= out.size()) return;
      try {
        out[k] = run_sample(m, f, bounds, cfg, first + k);
      } catch (...) {
        if (!failed.exchange(true)) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < cfg.workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

sprt_outcome sprt_run(const model& m, const bltl& f, double gamma, const sprt_config& cfg) {
  check_config(cfg, gamma);
  const auto t0 = std::chrono::steady_clock::now();
  const auto bounds = bound_vector_of(f, m.agent_count());
  const double hi = gamma + cfg.delta;
  const double lo = gamma - cfg.delta;
  const double log_pos = std::log(hi / lo);
  const double log_neg = std::log((1 - hi) / (1 - lo));

  sprt_outcome out;
  out.gamma = gamma;
  out.seed = cfg.seed;
  out.log_accept = std::log((1 - cfg.beta) / cfg.alpha);
  out.log_reject = std::log(cfg.beta / (1 - cfg.alpha));

  const std::size_t batch = cfg.workers > 1 ? 16 * std::size_t{cfg.workers} : 1;
  std::vector<sample_summary> buf;
  bool decided = false;
  while (!decided) {
    std::size_t want = batch;
    if (cfg.max_samples) want = std::min<std::uint64_t>(want, cfg.max_samples - out.samples);
    buf.assign(want, {});
    if (cfg.workers > 1) fill_batch(m, f, bounds, cfg, out.samples, buf);
    else buf[0] = run_sample(m, f, bounds, cfg, out.samples);
    for (const auto& x : buf) {
      ++out.samples;
      out.events += x.events;
      out.dead_fallbacks += x.dead_fallbacks;
      if (x.positive) ++out.positives;
      out.score += x.positive ? log_pos : log_neg;
      if (cfg.record_scores) out.scores.push_back(out.score);
      if (out.score >= out.log_accept) {
        out.result = verdict::accept;
        decided = true;
      } else if (out.score <= out.log_reject) {
        out.result = verdict::reject;
        decided = true;
      } else if (cfg.max_samples && out.samples >= cfg.max_samples) {
        out.result = verdict::inconclusive;
        decided = true;
      }
      if (decided) break;
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

std::uint64_t leaf_seed(std::uint64_t seed, std::size_t leaf_index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (std::uint64_t{leaf_index} + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

namespace {

verdict negate(verdict v) {
  if (v == verdict::accept) return verdict::reject;
  if (v == verdict::reject) return verdict::accept;
  return v;
}

check_result skipped_tree(const pbltl& p, std::size_t& next_leaf) {
  check_result r;
  r.kind = p->kind;
  r.skipped = true;
  if (p->kind == pbltl_kind::threshold) {
    r.leaf_index = next_leaf++;
    return r;
  }
  r.children.push_back(skipped_tree(p->lhs, next_leaf));
  if (p->rhs) r.children.push_back(skipped_tree(p->rhs, next_leaf));
  return r;
}

check_result check(const model& m, const pbltl& p, const sprt_config& cfg, std::size_t& next_leaf) {
  check_result r;
  r.kind = p->kind;
  switch (p->kind) {
    case pbltl_kind::threshold: {
      r.leaf_index = next_leaf++;
      r.leaf_seed = leaf_seed(cfg.seed, r.leaf_index);
      auto leaf_cfg = cfg;
      leaf_cfg.seed = r.leaf_seed;
      r.leaf = sprt_run(m, p->formula, p->gamma, leaf_cfg);
      r.result = r.leaf->result;
      break;
    }
    case pbltl_kind::negation:
      r.children.push_back(check(m, p->lhs, cfg, next_leaf));
      r.result = negate(r.children[0].result);
      break;
    case pbltl_kind::disjunction:
      r.children.push_back(check(m, p->lhs, cfg, next_leaf));
      if (r.children[0].result == verdict::accept) {
        r.children.push_back(skipped_tree(p->rhs, next_leaf));
        r.result = verdict::accept;
        break;
      }
      r.children.push_back(check(m, p->rhs, cfg, next_leaf));
      if (r.children[1].result == verdict::accept) r.result = verdict::accept;
      else if (r.children[0].result == verdict::reject && r.children[1].result == verdict::reject)
        r.result = verdict::reject;
      else r.result = verdict::inconclusive;
      break;
  }
  return r;
}

void validate_leaves(const pbltl& p, const sprt_config& cfg) {
  for (const auto& leaf : threshold_leaves(p)) check_config(cfg, leaf->gamma);
}

}  // namespace

check_result check_spec(const model& m, const pbltl& spec, const sprt_config& cfg) {
  validate_leaves(spec, cfg);
  std::size_t next_leaf = 0;
  return check(m, spec, cfg, next_leaf);
}

}  // namespace dmc
