#pragma once

#include "dmc/logic.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace dmc {

enum class dead_mode { never, exact };

std::string_view to_string(dead_mode d);
std::optional<dead_mode> parse_dead_mode(std::string_view s);

// Generator for sample `index` under `seed`. Streams for distinct indices are
// seeded independently, so sample contents do not depend on scheduling.
std::mt19937_64 sample_rng(std::uint64_t seed, std::uint64_t index);

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Agents with no event reachable from s. Mode never always answers "none".
// In exact mode the interleaved system is searched from s; nullopt if more
// than `budget` states would be visited.
std::optional<std::vector<bool>> dead_agents(const model& m, const global_state& s, dead_mode mode,
                                             std::size_t budget = 100'000);

struct sampler_options {
  dead_mode mode = dead_mode::never;
  std::size_t dead_budget = 100'000;
  std::uint64_t max_events = 10'000'000;
};

struct sample_result {
  trajectory traj;
  std::vector<std::uint64_t> counts;  // moves per agent
  std::vector<bool> dead;
  std::size_t dead_fallbacks = 0;  // exact dead checks that ran out of budget
};

// Rounds of "fire every enabled action once, in declaration order" until
// each agent has made bounds[i] moves or is dead. Throws sampling_error on a
// deadlock with unsatisfied live agents or when max_events is exceeded.
sample_result sample_trajectory(const model& m, const bound_vector& bounds, const sampler_options& opts,
                                std::mt19937_64& rng);

struct sprt_config {
  double alpha = 0.01;
  double beta = 0.01;
  double delta = 0.01;
  std::uint64_t seed = 0;
  std::uint64_t max_samples = 0;  // 0: no cap
  unsigned workers = 1;
  sampler_options sampler;
  bool record_scores = false;
};

// Throws domain_error unless alpha, beta lie in (0,1) with alpha + beta < 1,
// delta > 0, and 0 < gamma - delta, gamma + delta < 1.
void check_config(const sprt_config& cfg, double gamma);

enum class verdict { accept, reject, inconclusive };
std::string_view to_string(verdict v);

struct sprt_outcome {
  verdict result = verdict::inconclusive;
  std::uint64_t samples = 0;
  std::uint64_t positives = 0;
  double score = 0;  // log likelihood ratio
  double log_accept = 0;
  double log_reject = 0;
  double gamma = 0;
  std::uint64_t seed = 0;
  std::uint64_t events = 0;  // over all consumed samples
  std::size_t dead_fallbacks = 0;
  double seconds = 0;
  std::vector<double> scores;  // after each sample, if recorded
};

// Sequential test of Pr(f) >= gamma with indifference region
// (gamma - delta, gamma + delta). Samples are consumed in index order.
sprt_outcome sprt_run(const model& m, const bltl& f, double gamma, const sprt_config& cfg);

// Verdict tree mirroring the spec. Leaves carry their test outcome; a leaf
// skipped by short-circuiting has no outcome.
struct check_result {
  pbltl_kind kind = pbltl_kind::threshold;
  verdict result = verdict::inconclusive;
  std::optional<sprt_outcome> leaf;
  std::uint64_t leaf_seed = 0;
  std::size_t leaf_index = 0;
  std::vector<check_result> children;
  bool skipped = false;
};

// Leaf i (preorder) runs with seed leaf_seed(cfg.seed, i).
std::uint64_t leaf_seed(std::uint64_t seed, std::size_t leaf_index);
check_result check_spec(const model& m, const pbltl& spec, const sprt_config& cfg);

}  // namespace dmc
