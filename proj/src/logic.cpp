#include "dmc/logic.hpp"

#include "dmc/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <functional>

namespace dmc {
namespace {

std::vector<agent_id> type_union(const std::vector<agent_id>& a, const std::vector<agent_id>& b) {
  std::vector<agent_id> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bltl node(bltl_node n) { return std::make_shared<const bltl_node>(std::move(n)); }

}  // namespace

bltl make_constant(bool v) {
  bltl_node n;
  n.kind = bltl_kind::constant;
  n.value = v;
  return node(std::move(n));
}

bltl make_atom(const model& m, ap_id p) {
  const auto owners = m.ap_owners(p);
  if (owners.size() != 1)
    throw domain_error("atomic proposition '" + m.ap_name(p) + "' must belong to exactly one agent");
  bltl_node n;
  n.kind = bltl_kind::atom;
  n.ap = p;
  n.agent = owners.front();
  n.type = {owners.front()};
  return node(std::move(n));
}

bltl make_not(bltl f) {
  bltl_node n;
  n.kind = bltl_kind::negation;
  n.type = f->type;
  n.lhs = std::move(f);
  return node(std::move(n));
}

bltl make_or(bltl a, bltl b) {
  bltl_node n;
  n.kind = bltl_kind::disjunction;
  n.type = type_union(a->type, b->type);
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return node(std::move(n));
}

bltl make_and(bltl a, bltl b) {
  bltl_node n;
  n.kind = bltl_kind::conjunction;
  n.type = type_union(a->type, b->type);
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return node(std::move(n));
}

bltl make_until(bltl a, bltl b, std::uint32_t t) {
  const auto ty = type_union(a->type, b->type);
  if (ty.size() != 1) {
    if (ty.empty()) throw parse_error("until needs an operand typed on some agent");
    throw parse_error("until operands must be typed on a single common agent");
  }
  bltl_node n;
  n.kind = bltl_kind::until;
  n.agent = ty.front();
  n.bound = t;
  n.type = ty;
  n.lhs = std::move(a);
  n.rhs = std::move(b);
  return node(std::move(n));
}

bltl make_eventually(bltl f, std::uint32_t t) { return make_until(make_constant(true), std::move(f), t); }

bltl make_globally(bltl f, std::uint32_t t) { return make_not(make_eventually(make_not(std::move(f)), t)); }

pbltl make_threshold(double gamma, bltl f, std::string gamma_text) {
  if (!(gamma > 0 && gamma < 1)) throw parse_error("threshold must lie strictly between 0 and 1");
  auto n = std::make_shared<pbltl_node>();
  n->kind = pbltl_kind::threshold;
  n->gamma = gamma;
  n->gamma_text = gamma_text.empty() ? std::to_string(gamma) : std::move(gamma_text);
  n->formula = std::move(f);
  return n;
}

pbltl make_pnot(pbltl p) {
  auto n = std::make_shared<pbltl_node>();
  n->kind = pbltl_kind::negation;
  n->lhs = std::move(p);
  return n;
}

pbltl make_por(pbltl a, pbltl b) {
  auto n = std::make_shared<pbltl_node>();
  n->kind = pbltl_kind::disjunction;
  n->lhs = std::move(a);
  n->rhs = std::move(b);
  return n;
}

pbltl make_pand(pbltl a, pbltl b) { return make_pnot(make_por(make_pnot(std::move(a)), make_pnot(std::move(b)))); }

// ---------------------------------------------------------------------------
// Parser

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'' || c == '.';
}

class parser {
 public:
  parser(const model& m, std::string_view text) : m_(m), s_(text) {}

  pbltl spec() {
    auto p = por();
    expect_end();
    return p;
  }

  bltl formula() {
    auto f = phi();
    expect_end();
    return f;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw parse_error("spec:" + std::to_string(at) + ": " + msg, at);
  }
  [[noreturn]] void fail(const std::string& msg) const { fail(msg, pos_); }

  void skip() {
    while (pos_ < s_.size()) {
      if (std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      else if (s_[pos_] == '#')
        while (pos_ < s_.size() && s_[pos_] != '\n') ++pos_;
      else break;
    }
  }

  char peek() {
    skip();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }

  void expect_end() {
    if (peek() != '\0') fail("unexpected input");
  }

  // Single-letter operator such as F[, G[, U[ or P>=.
  bool keyword(char letter, std::string_view follow) {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != letter) return false;
    std::size_t q = pos_ + 1;
    if (q < s_.size() && ident_char(s_[q])) return false;
    while (q < s_.size() && std::isspace(static_cast<unsigned char>(s_[q]))) ++q;
    if (s_.substr(q, follow.size()) != follow) return false;
    pos_ = q + follow.size();
    return true;
  }

  std::uint32_t bound() {
    // '[' already consumed
    skip();
    const auto start = pos_;
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc{} || end == s_.data() + pos_ || v > 0xffffffffu) fail("malformed bound", start);
    pos_ = static_cast<std::size_t>(end - s_.data());
    expect(']');
    return static_cast<std::uint32_t>(v);
  }

  pbltl por() {
    auto p = pand();
    while (accept('|')) p = make_por(p, pand());
    return p;
  }

  pbltl pand() {
    auto p = pnot();
    while (accept('&')) p = make_pand(p, pnot());
    return p;
  }

  pbltl pnot() {
    if (accept('!')) return make_pnot(pnot());
    if (accept('(')) {
      auto p = por();
      expect(')');
      return p;
    }
    if (keyword('P', ">=")) {
      skip();
      const auto start = pos_;
      while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                  s_[pos_] == 'e' || s_[pos_] == 'E' || s_[pos_] == '-' || s_[pos_] == '+'))
        ++pos_;
      const auto text = s_.substr(start, pos_ - start);
      double gamma = 0;
      const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), gamma);
      if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) fail("malformed threshold", start);
      if (!(gamma > 0 && gamma < 1)) fail("threshold must lie strictly between 0 and 1", start);
      expect('[');
      auto f = phi();
      expect(']');
      return make_threshold(gamma, std::move(f), std::string(text));
    }
    fail("expected 'P>=', '!' or '('");
  }

  bltl phi() {
    auto f = conj();
    while (accept('|')) f = make_or(f, conj());
    return f;
  }

  bltl conj() {
    auto f = until();
    while (accept('&')) f = make_and(f, until());
    return f;
  }

  bltl until() {
    auto f = unary();
    const auto at = pos_;
    if (keyword('U', "[")) {
      const auto t = bound();
      auto g = until();
      try {
        return make_until(std::move(f), std::move(g), t);
      } catch (const parse_error& e) {
        fail(e.what(), at);
      }
    }
    return f;
  }

  bltl unary() {
    if (accept('!')) return make_not(unary());
    const auto at = pos_;
    if (keyword('F', "[")) {
      const auto t = bound();
      try {
        return make_eventually(unary(), t);
      } catch (const parse_error& e) {
        fail(e.what(), at);
      }
    }
    if (keyword('G', "[")) {
      const auto t = bound();
      try {
        return make_globally(unary(), t);
      } catch (const parse_error& e) {
        fail(e.what(), at);
      }
    }
    if (accept('(')) {
      auto f = phi();
      expect(')');
      return f;
    }
    skip();
    const auto start = pos_;
    std::string name;
    if (accept('"')) {
      while (pos_ < s_.size() && s_[pos_] != '"') name += s_[pos_++];
      if (pos_ >= s_.size()) fail("unterminated quoted name", start);
      ++pos_;
    } else if (pos_ < s_.size() && ident_start(s_[pos_])) {
      while (pos_ < s_.size() && ident_char(s_[pos_])) name += s_[pos_++];
      if (name == "true") return make_constant(true);
      if (name == "false") return make_constant(false);
    } else {
      fail("expected a formula");
    }
    const auto ap = m_.find_ap(name);
    if (!ap) fail("unknown atomic proposition '" + name + "'", start);
    try {
      return make_atom(m_, *ap);
    } catch (const domain_error& e) {
      fail(e.what(), start);
    }
  }

  const model& m_;
  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

pbltl parse_spec(const model& m, std::string_view text) { return parser(m, text).spec(); }
bltl parse_bltl(const model& m, std::string_view text) { return parser(m, text).formula(); }

// ---------------------------------------------------------------------------
// Bounds and evaluation

bound_vector bound_vector_of(const bltl& f, std::size_t agent_count) {
  bound_vector k(agent_count, 0);
  switch (f->kind) {
    case bltl_kind::constant:
      break;
    case bltl_kind::atom:
      k.at(idx(f->agent)) = 1;
      break;
    case bltl_kind::negation:
      k = bound_vector_of(f->lhs, agent_count);
      break;
    case bltl_kind::disjunction:
    case bltl_kind::conjunction:
    case bltl_kind::until: {
      const auto a = bound_vector_of(f->lhs, agent_count);
      const auto b = bound_vector_of(f->rhs, agent_count);
      for (std::size_t i = 0; i < agent_count; ++i) k[i] = std::max(a[i], b[i]);
      if (f->kind == bltl_kind::until) {
        auto& ki = k.at(idx(f->agent));
        ki = f->bound + std::max<std::uint32_t>(1, ki);
      }
      break;
    }
  }
  return k;
}

namespace {

// Truth value at every position 0..|rho|-1.
std::vector<char> sat(const model& m, const bltl& f, agent_id agent, const local_run& rho) {
  const auto n = rho.size();
  std::vector<char> out(n, 0);
  switch (f->kind) {
    case bltl_kind::constant:
      std::fill(out.begin(), out.end(), f->value);
      break;
    case bltl_kind::atom:
      for (std::size_t k = 0; k < n; ++k) out[k] = m.holds(agent, rho[k], f->ap);
      break;
    case bltl_kind::negation: {
      const auto a = sat(m, f->lhs, agent, rho);
      for (std::size_t k = 0; k < n; ++k) out[k] = !a[k];
      break;
    }
    case bltl_kind::disjunction:
    case bltl_kind::conjunction: {
      const auto a = sat(m, f->lhs, agent, rho);
      const auto b = sat(m, f->rhs, agent, rho);
      const bool any = f->kind == bltl_kind::disjunction;
      for (std::size_t k = 0; k < n; ++k) out[k] = any ? (a[k] || b[k]) : (a[k] && b[k]);
      break;
    }
    case bltl_kind::until: {
      const auto a = sat(m, f->lhs, agent, rho);
      const auto b = sat(m, f->rhs, agent, rho);
      // next_b[k]: first l >= k with b; next_not_a[k]: first l >= k without a.
      std::size_t next_b = n;
      std::size_t next_not_a = n;
      for (std::size_t k = n; k-- > 0;) {
        if (b[k]) next_b = k;
        if (!a[k]) next_not_a = k;
        out[k] = next_b < n && next_b <= next_not_a && next_b - k <= f->bound;
      }
      break;
    }
  }
  return out;
}

// Value at a position past the end of the run.
bool beyond_end(const bltl& f) {
  switch (f->kind) {
    case bltl_kind::constant: return f->value;
    case bltl_kind::atom: return false;
    case bltl_kind::negation: return !beyond_end(f->lhs);
    case bltl_kind::disjunction: return beyond_end(f->lhs) || beyond_end(f->rhs);
    case bltl_kind::conjunction: return beyond_end(f->lhs) && beyond_end(f->rhs);
    case bltl_kind::until: return false;
  }
  return false;
}

}  // namespace

bool eval_local(const model& m, const bltl& f, agent_id agent, const local_run& rho, std::size_t k) {
  if (f->type.size() > 1 || (f->type.size() == 1 && f->type.front() != agent))
    throw domain_error("formula is not typed on the given agent");
  if (k >= rho.size()) return beyond_end(f);
  return sat(m, f, agent, rho)[k];
}

local_run projection(const model& m, const trajectory& rho, agent_id agent) {
  local_run out{rho.start.at(idx(agent))};
  for (const auto& e : rho.events) {
    const auto& def = m.action(e.action);
    const auto k = def.position_of(agent);
    if (k < def.arity()) out.push_back(def.target(e.outcome)[k]);
  }
  return out;
}

std::vector<local_run> projections(const model& m, const trajectory& rho) {
  std::vector<local_run> out(m.agent_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i].push_back(rho.start.at(i));
  for (const auto& e : rho.events) {
    const auto& def = m.action(e.action);
    const auto tgt = def.target(e.outcome);
    for (std::size_t k = 0; k < def.arity(); ++k) out[idx(def.loc()[k])].push_back(tgt[k]);
  }
  return out;
}

bool eval_projections(const model& m, const bltl& f, const std::vector<local_run>& proj) {
  if (f->type.empty()) return eval_local(m, f, agent_id{}, {}, 0);
  if (f->type.size() == 1) return eval_local(m, f, f->type.front(), proj.at(idx(f->type.front())), 0);
  switch (f->kind) {
    case bltl_kind::negation: return !eval_projections(m, f->lhs, proj);
    case bltl_kind::disjunction: return eval_projections(m, f->lhs, proj) || eval_projections(m, f->rhs, proj);
    case bltl_kind::conjunction: return eval_projections(m, f->lhs, proj) && eval_projections(m, f->rhs, proj);
    default: throw domain_error("multi-typed formula must be a boolean combination");
  }
}

bool eval_trajectory(const model& m, const bltl& f, const trajectory& rho) {
  return eval_projections(m, f, projections(m, rho));
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string ap_text(const std::string& name) {
  const bool plain = !name.empty() && ident_start(name.front()) &&
                     std::all_of(name.begin(), name.end(), ident_char) && name != "true" && name != "false" &&
                     !(name.size() == 1 && (name == "F" || name == "G" || name == "U" || name == "P"));
  return plain ? name : "\"" + name + "\"";
}

bool is_true(const bltl& f) { return f->kind == bltl_kind::constant && f->value; }

}  // namespace

std::string to_string(const model& m, const bltl& f) {
  switch (f->kind) {
    case bltl_kind::constant: return f->value ? "true" : "false";
    case bltl_kind::atom: return ap_text(m.ap_name(f->ap));
    case bltl_kind::negation: {
      const auto& g = f->lhs;
      if (g->kind == bltl_kind::until && is_true(g->lhs) && g->rhs->kind == bltl_kind::negation)
        return "G[" + std::to_string(g->bound) + "] " + to_string(m, g->rhs->lhs);
      return "!" + to_string(m, g);
    }
    case bltl_kind::disjunction: return "(" + to_string(m, f->lhs) + " | " + to_string(m, f->rhs) + ")";
    case bltl_kind::conjunction: return "(" + to_string(m, f->lhs) + " & " + to_string(m, f->rhs) + ")";
    case bltl_kind::until:
      if (is_true(f->lhs)) return "F[" + std::to_string(f->bound) + "] " + to_string(m, f->rhs);
      return "(" + to_string(m, f->lhs) + " U[" + std::to_string(f->bound) + "] " + to_string(m, f->rhs) + ")";
  }
  return {};
}

std::string to_string(const model& m, const pbltl& p) {
  switch (p->kind) {
    case pbltl_kind::threshold: return "P>=" + p->gamma_text + " [ " + to_string(m, p->formula) + " ]";
    case pbltl_kind::negation: return "!" + to_string(m, p->lhs);
    case pbltl_kind::disjunction: return "(" + to_string(m, p->lhs) + " | " + to_string(m, p->rhs) + ")";
  }
  return {};
}

std::vector<pbltl> threshold_leaves(const pbltl& p) {
  std::vector<pbltl> out;
  const std::function<void(const pbltl&)> go = [&](const pbltl& q) {
    if (q->kind == pbltl_kind::threshold) {
      out.push_back(q);
      return;
    }
    go(q->lhs);
    if (q->rhs) go(q->rhs);
  };
  go(p);
  return out;
}

}  // namespace dmc
