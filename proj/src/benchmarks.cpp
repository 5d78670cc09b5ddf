#include "dmc/benchmarks.hpp"

#include "dmc/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <tuple>

namespace dmc {
namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, r.ptr};
}

// Two-agent action whose tuples are written in (first, second) order
// regardless of how the builder sorts loc.
class sync2 {
 public:
  sync2(model_builder& b, std::string name, agent_id first, agent_id second)
      : b_(b), id_(b.add_action(std::move(name), {first, second})), swap_(second < first) {}

  struct out {
    local_index first, second;
    exact_prob p;
    std::string label = {};
  };

  void row(local_index first, local_index second, const std::vector<out>& outs) {
    std::vector<outcome_spec> specs;
    for (const auto& o : outs) specs.push_back({order(o.first, o.second), o.p, o.label});
    b_.add_row(id_, order(first, second), specs);
  }

 private:
  std::vector<local_index> order(local_index x, local_index y) const {
    return swap_ ? std::vector<local_index>{y, x} : std::vector<local_index>{x, y};
  }

  model_builder& b_;
  action_id id_;
  bool swap_;
};

void internal(model_builder& b, action_id a, local_index from, std::vector<outcome_spec> outs) {
  for (auto& o : outs) o.target = {o.target.front()};
  b.add_row(a, std::vector<local_index>{from}, outs);
}

const exact_prob one{1, 1};
const exact_prob half{1, 2};

}  // namespace

// ---------------------------------------------------------------------------
// Coin game

model build_coin_game() {
  enum : local_index { in, T, H, L, W };
  model_builder b;
  const auto p1 = b.add_agent("1", {"in1", "T1", "H1", "L1", "W1"}, "in1");
  const auto p2 = b.add_agent("2", {"in2", "T2", "H2", "L2", "W2"}, "in2");

  const auto a1 = b.add_action("a1", {p1});
  internal(b, a1, in, {{{T}, half, "e_t"}, {{H}, half, "e_h"}});
  const auto a2 = b.add_action("a2", {p2});
  internal(b, a2, in, {{{T}, half, "e'_t"}, {{H}, half, "e'_h"}});

  sync2 sb(b, "b", p1, p2);
  sb.row(T, T, {{in, in, one, "tt"}});
  sb.row(H, H, {{in, in, one, "hh"}});
  sb.row(H, T, {{W, L, one, "ht"}});
  sb.row(T, H, {{L, W, one, "th"}});

  internal(b, b.add_action("w", {p1}), W, {{{W}, one, "w"}});
  internal(b, b.add_action("l", {p1}), L, {{{L}, one, "l"}});
  internal(b, b.add_action("w'", {p2}), W, {{{W}, one, "w'"}});
  internal(b, b.add_action("l'", {p2}), L, {{{L}, one, "l'"}});

  b.set_metadata("family", "\"coin-game\"");
  return std::move(b).build();
}

std::string coin_game_spec(double gamma) {
  return "P>=" + num(gamma) + " [ (F[7] L1 & F[7] W2) | (F[7] W1 & F[7] L2) ]\n";
}

// ---------------------------------------------------------------------------
// Itai-Rodeh

namespace {

class ring_layout {
 public:
  ring_layout(std::uint32_t n, std::uint32_t r) : n_(n), r_(r) {}

  // Messages (id, bit, hop, uniq) then `done`.
  std::uint32_t messages() const { return r_ * 2 * n_ * 2 + 1; }
  std::uint32_t done() const { return messages() - 1; }
  std::uint32_t msg(std::uint32_t id, std::uint32_t bit, std::uint32_t hop, std::uint32_t uniq) const {
    return (((id - 1) * 2 + bit) * n_ + (hop - 1)) * 2 + uniq;
  }
  std::tuple<std::uint32_t, std::uint32_t, std::uint32_t, std::uint32_t> decode(std::uint32_t m) const {
    const auto uniq = m % 2;
    m /= 2;
    const auto hop = m % n_ + 1;
    m /= n_;
    return {m / 2 + 1, m % 2, hop, uniq};
  }
  std::string msg_name(std::uint32_t m) const {
    if (m == done()) return "done";
    const auto [id, bit, hop, uniq] = decode(m);
    return "m" + std::to_string(id) + "." + std::to_string(bit) + "." + std::to_string(hop) + "." +
           std::to_string(uniq);
  }

  // Process state indices.
  local_index start() const { return 0; }
  local_index active(std::uint32_t id, std::uint32_t bit) const { return 1 + (id - 1) * 2 + bit; }
  local_index send_own(std::uint32_t id, std::uint32_t bit) const { return 1 + 2 * r_ + (id - 1) * 2 + bit; }
  // Forward a clash message (id, bit, hop, 0), hop in 2..n.
  local_index fwd_clash(std::uint32_t id, std::uint32_t bit, std::uint32_t hop) const {
    return 1 + 4 * r_ + ((id - 1) * 2 + bit) * (n_ - 1) + (hop - 2);
  }
  local_index passive() const { return 1 + 4 * r_ + 2 * r_ * (n_ - 1); }
  local_index passive_send(std::uint32_t m) const { return passive() + 1 + m; }
  local_index leader() const { return passive_send(messages()); }
  local_index leader_send() const { return leader() + 1; }
  std::uint32_t process_states() const { return leader_send() + 1; }

  std::vector<std::string> process_names(const std::string& p) const {
    std::vector<std::string> s(process_states());
    s[start()] = p + ".start";
    for (std::uint32_t id = 1; id <= r_; ++id)
      for (std::uint32_t bit = 0; bit < 2; ++bit) {
        const auto tag = std::to_string(id) + "." + std::to_string(bit);
        s[active(id, bit)] = p + ".A." + tag;
        s[send_own(id, bit)] = p + ".S." + tag;
        for (std::uint32_t hop = 2; hop <= n_; ++hop) s[fwd_clash(id, bit, hop)] = p + ".C." + tag + "." + std::to_string(hop);
      }
    s[passive()] = p + ".P";
    for (std::uint32_t m = 0; m < messages(); ++m) s[passive_send(m)] = p + ".PS." + msg_name(m);
    s[leader()] = p + ".L";
    s[leader_send()] = p + ".LS";
    return s;
  }

  // Channel cell: 0 empty, 1 + m full.
  std::vector<std::string> cell_names(const std::string& c) const {
    std::vector<std::string> s{c + ".empty"};
    for (std::uint32_t m = 0; m < messages(); ++m) s.push_back(c + "." + msg_name(m));
    return s;
  }

  std::uint32_t n() const { return n_; }
  std::uint32_t r() const { return r_; }

 private:
  std::uint32_t n_, r_;
};

}  // namespace

model build_itai_rodeh(std::uint32_t n, std::uint32_t id_range, std::uint32_t capacity) {
  if (n < 2) throw domain_error("itai-rodeh needs n >= 2");
  if (id_range < 2) throw domain_error("itai-rodeh needs id_range >= 2");
  if (capacity < 1) throw domain_error("channel capacity must be at least 1");
  const ring_layout ring(n, id_range);
  const exact_prob uniform(1, id_range);
  constexpr local_index empty = 0;
  const auto full = [](std::uint32_t m) { return static_cast<local_index>(m + 1); };

  model_builder b;
  std::vector<agent_id> proc(n);
  std::vector<std::vector<agent_id>> cell(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto p = "p" + std::to_string(j + 1);
    proc[j] = b.add_agent(p, ring.process_names(p), p + ".start");
  }
  for (std::uint32_t j = 0; j < n; ++j)
    for (std::uint32_t k = 0; k < capacity; ++k) {
      auto c = "c" + std::to_string(j + 1);
      if (capacity > 1) c += "_" + std::to_string(k + 1);
      cell[j].push_back(b.add_agent(c, ring.cell_names(c), c + ".empty"));
    }

  for (std::uint32_t j = 0; j < n; ++j) {
    const auto tag = std::to_string(j + 1);
    const auto pj = proc[j];

    // draw: start -> send own (id, 0)
    const auto draw = b.add_action("draw" + tag, {pj});
    std::vector<outcome_spec> draws;
    for (std::uint32_t id = 1; id <= id_range; ++id) draws.push_back({{ring.send_own(id, 0)}, uniform, {}});
    b.add_row(draw, std::vector<local_index>{ring.start()}, draws);

    // send: process puts a message into the first cell of its channel.
    sync2 send(b, "send" + tag, pj, cell[j].front());
    for (std::uint32_t id = 1; id <= id_range; ++id)
      for (std::uint32_t bit = 0; bit < 2; ++bit) {
        send.row(ring.send_own(id, bit), empty, {{ring.active(id, bit), full(ring.msg(id, bit, 1, 1)), one}});
        for (std::uint32_t hop = 2; hop <= n; ++hop)
          send.row(ring.fwd_clash(id, bit, hop), empty, {{ring.active(id, bit), full(ring.msg(id, bit, hop, 0)), one}});
      }
    for (std::uint32_t m = 0; m < ring.messages(); ++m)
      send.row(ring.passive_send(m), empty, {{ring.passive(), full(m), one}});
    send.row(ring.leader_send(), empty, {{ring.leader(), full(ring.done()), one}});

    // shift between consecutive cells of channel j
    for (std::uint32_t k = 0; k + 1 < capacity; ++k) {
      sync2 shift(b, "shift" + tag + "_" + std::to_string(k + 1), cell[j][k], cell[j][k + 1]);
      for (std::uint32_t m = 0; m < ring.messages(); ++m) shift.row(full(m), empty, {{empty, full(m), one}});
    }
  }

  // deliver: last cell of channel j-1 hands its message to p_j.
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto from = cell[(j + n - 1) % n].back();
    sync2 deliver(b, "deliver" + std::to_string(j + 1), from, proc[j]);
    for (std::uint32_t m = 0; m < ring.messages(); ++m) {
      const auto c = full(m);
      const bool is_done = m == ring.done();
      std::uint32_t mid = 0, mbit = 0, hop = 0, uniq = 0;
      if (!is_done) std::tie(mid, mbit, hop, uniq) = ring.decode(m);
      const auto forward = [&] { return ring.passive_send(ring.msg(mid, mbit, hop + 1, uniq)); };

      for (std::uint32_t id = 1; id <= id_range; ++id)
        for (std::uint32_t bit = 0; bit < 2; ++bit) {
          const auto a = ring.active(id, bit);
          if (is_done) {
            deliver.row(c, a, {{empty, a, one}});
          } else if (mid == id && mbit == bit && hop == n) {
            if (uniq) {
              deliver.row(c, a, {{empty, ring.leader_send(), one}});
            } else {
              std::vector<sync2::out> redraw;
              for (std::uint32_t fresh = 1; fresh <= id_range; ++fresh)
                redraw.push_back({empty, ring.send_own(fresh, 1 - bit), uniform});
              deliver.row(c, a, redraw);
            }
          } else if (mbit != bit || mid > id) {
            deliver.row(c, a, {{empty, hop < n ? forward() : ring.passive(), one}});
          } else if (mid == id) {
            deliver.row(c, a, {{empty, ring.fwd_clash(id, bit, hop + 1), one}});
          } else {
            deliver.row(c, a, {{empty, a, one}});
          }
        }
      if (is_done) {
        deliver.row(c, ring.passive(), {{empty, ring.passive_send(ring.done()), one}});
        deliver.row(c, ring.leader(), {{empty, ring.leader_send(), one}});
      } else {
        deliver.row(c, ring.passive(), {{empty, hop < n ? forward() : ring.passive(), one}});
        deliver.row(c, ring.leader(), {{empty, ring.leader(), one}});
      }
    }
  }

  for (std::uint32_t j = 0; j < n; ++j) {
    const auto ap = "leader_" + std::to_string(j + 1);
    b.add_valuation(proc[j], ring.leader(), ap);
    b.add_valuation(proc[j], ring.leader_send(), ap);
  }
  b.set_metadata("family", "\"itai-rodeh\"");
  b.set_metadata("n", std::to_string(n));
  b.set_metadata("id_range", std::to_string(id_range));
  b.set_metadata("channel_capacity", std::to_string(capacity));
  b.set_metadata("moves_per_round", std::to_string(itai_rodeh_moves_per_round(n)));
  b.set_metadata("spec_bound", std::to_string(n * itai_rodeh_moves_per_round(n)));
  return std::move(b).build();
}

std::string itai_rodeh_spec(std::uint32_t n, double gamma, std::uint32_t rounds) {
  if (rounds == 0) rounds = n;
  const auto t = std::to_string(rounds * itai_rodeh_moves_per_round(n));
  std::string s = "# some process is elected within " + std::to_string(rounds) + " rounds\nP>=" + num(gamma) + " [ ";
  for (std::uint32_t j = 1; j <= n; ++j) {
    if (j > 1) s += " | ";
    s += "F[" + t + "] leader_" + std::to_string(j);
  }
  return s + " ]\n";
}

// ---------------------------------------------------------------------------
// Dining philosophers

namespace {

enum phase : std::uint32_t { think, want_l, want_r, hold_l, hold_r, drop_l, drop_r, eat, done_l, done_r, phase_count };
constexpr std::array<const char*, phase_count> phase_names{"T", "W_L", "W_R", "S_L", "S_R", "X_L", "X_R", "E", "D_L", "D_R"};

// side 0 = left fork, 1 = right fork
local_index phil(std::uint32_t ph, std::uint32_t next, std::uint32_t eaten) { return (ph * 2 + next) * 2 + eaten; }
// turn 0 = the philosopher on the fork's left (uses it as right fork), 1 = on its right
local_index fork(std::uint32_t free, std::uint32_t turn) { return free * 2 + turn; }

phase hold(std::uint32_t side) { return side ? hold_r : hold_l; }
phase drop(std::uint32_t side) { return side ? drop_r : drop_l; }
phase done(std::uint32_t side) { return side ? done_r : done_l; }

struct move {
  std::uint32_t ph;
  std::uint32_t eaten;
  std::uint32_t free;
  exact_prob p;
};

// Philosopher in phase `ph` meets the fork on `side`.
std::vector<move> meet(std::uint32_t ph, std::uint32_t eaten, std::uint32_t side, std::uint32_t free) {
  const auto same = [&](std::uint32_t s) { return s == side; };
  switch (ph) {
    case think:
      return {{think, eaten, free, half}, {want_l, eaten, free, {1, 4}}, {want_r, eaten, free, {1, 4}}};
    case want_l:
    case want_r: {
      const std::uint32_t s = ph == want_r;
      if (same(s) && free) return {{hold(s), eaten, 0, one}};
      return {{ph, eaten, free, one}};
    }
    case hold_l:
    case hold_r: {
      const std::uint32_t s = ph == hold_r;
      if (same(s)) return {{ph, eaten, free, one}};
      if (free) return {{eat, 1, 0, one}};
      return {{drop(s), eaten, free, one}};
    }
    case drop_l:
    case drop_r: {
      const std::uint32_t s = ph == drop_r;
      if (!same(s)) return {{ph, eaten, free, one}};
      return {{want_l, eaten, 1, half}, {want_r, eaten, 1, half}};
    }
    case eat:
      return {{done(1 - side), eaten, 1, one}};
    case done_l:
    case done_r: {
      const std::uint32_t s = ph == done_r;
      if (!same(s)) return {{ph, eaten, free, one}};
      return {{think, eaten, 1, one}};
    }
  }
  return {};
}

}  // namespace

model build_dining_philosophers(std::uint32_t n) {
  if (n < 3) throw domain_error("dining philosophers needs n >= 3");
  model_builder b;
  std::vector<agent_id> P(n), F(n);
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto p = "P" + std::to_string(j + 1);
    std::vector<std::string> names(phase_count * 4);
    for (std::uint32_t ph = 0; ph < phase_count; ++ph)
      for (std::uint32_t next = 0; next < 2; ++next)
        for (std::uint32_t e = 0; e < 2; ++e)
          names[phil(ph, next, e)] = p + "." + phase_names[ph] + "." + (next ? "R" : "L") + "." + std::to_string(e);
    P[j] = b.add_agent(p, names, names[phil(think, 0, 0)]);
  }
  for (std::uint32_t j = 0; j < n; ++j) {
    const auto f = "F" + std::to_string(j + 1);
    const auto left_user = "P" + std::to_string((j + n - 1) % n + 1);
    const auto right_user = "P" + std::to_string(j + 1);
    std::vector<std::string> names(4);
    for (std::uint32_t free = 0; free < 2; ++free)
      for (std::uint32_t turn = 0; turn < 2; ++turn)
        names[fork(free, turn)] = f + "." + (free ? "free" : "taken") + "." + (turn ? right_user : left_user);
    F[j] = b.add_agent(f, names, names[fork(1, 1)]);
  }

  for (std::uint32_t j = 0; j < n; ++j) {
    for (std::uint32_t side = 0; side < 2; ++side) {
      // left fork of P_j is F_j (P_j is its right user, turn 1);
      // right fork is F_{j+1} (P_j is its left user, turn 0).
      const auto f = side ? F[(j + 1) % n] : F[j];
      const std::uint32_t turn = side ? 0 : 1;
      sync2 act(b, std::string(side ? "R" : "L") + std::to_string(j + 1), P[j], f);
      for (std::uint32_t ph = 0; ph < phase_count; ++ph)
        for (std::uint32_t e = 0; e < 2; ++e)
          for (std::uint32_t free = 0; free < 2; ++free) {
            std::vector<sync2::out> outs;
            for (const auto& mv : meet(ph, e, side, free))
              outs.push_back({phil(mv.ph, 1 - side, mv.eaten), fork(mv.free, 1 - turn), mv.p});
            act.row(phil(ph, side, e), fork(free, turn), outs);
          }
    }
  }

  for (std::uint32_t j = 0; j < n; ++j)
    for (std::uint32_t ph = 0; ph < phase_count; ++ph)
      for (std::uint32_t next = 0; next < 2; ++next) b.add_valuation(P[j], phil(ph, next, 1), "eaten_" + std::to_string(j + 1));

  b.set_metadata("family", "\"dining-philosophers\"");
  b.set_metadata("n", std::to_string(n));
  b.set_metadata("spec_bound", std::to_string(dining_default_bound));
  return std::move(b).build();
}

std::string dining_fraction_spec(std::uint32_t n, double fraction, double gamma, std::uint32_t bound) {
  const auto k = static_cast<std::uint32_t>(std::ceil(fraction * n - 1e-9));
  if (k == 0 || k > n) throw domain_error("fraction must select between 1 and n philosophers");
  const auto t = "F[" + std::to_string(bound) + "] eaten_";
  std::string body;
  std::vector<std::uint32_t> pick(k);
  for (std::uint32_t i = 0; i < k; ++i) pick[i] = i;
  while (true) {
    if (!body.empty()) body += "\n  | ";
    body += "(";
    for (std::uint32_t i = 0; i < k; ++i) body += (i ? " & " : "") + t + std::to_string(pick[i] + 1);
    body += ")";
    std::uint32_t i = k;
    while (i > 0 && pick[i - 1] == n - k + i - 1) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::uint32_t q = i; q < k; ++q) pick[q] = pick[q - 1] + 1;
  }
  return "# at least " + std::to_string(k) + " of " + std::to_string(n) + " philosophers eat within " +
         std::to_string(bound) + " local moves\nP>=" + num(gamma) + " [\n    " + body + "\n]\n";
}

std::string dining_all_eat_spec(std::uint32_t n, double gamma, std::uint32_t bound) {
  std::string s = "P>=" + num(gamma) + " [ ";
  for (std::uint32_t j = 1; j <= n; ++j) s += (j > 1 ? " & " : "") + ("F[" + std::to_string(bound) + "] eaten_") + std::to_string(j);
  return s + " ]\n";
}

}  // namespace dmc
