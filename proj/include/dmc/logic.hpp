#pragma once

#include "dmc/measure.hpp"

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace dmc {

// Bounded LTL over per-agent atomic propositions. Nodes are immutable and
// shared. F[t] p is stored as true U[t] p and G[t] p as !F[t] !p.
struct bltl_node;
using bltl = std::shared_ptr<const bltl_node>;

enum class bltl_kind { constant, atom, negation, disjunction, conjunction, until };

struct bltl_node {
  bltl_kind kind = bltl_kind::constant;
  bool value = false;        // constant
  ap_id ap = 0;              // atom
  agent_id agent{};          // atom, until
  std::uint32_t bound = 0;   // until
  bltl lhs, rhs;             // negation uses lhs only
  std::vector<agent_id> type;  // sorted, empty for constants
};

bltl make_constant(bool v);
// Throws domain_error unless the AP has exactly one owning agent.
bltl make_atom(const model& m, ap_id p);
bltl make_not(bltl f);
bltl make_or(bltl a, bltl b);
bltl make_and(bltl a, bltl b);
// Throws parse_error if the operands are not typed on a single common agent.
bltl make_until(bltl a, bltl b, std::uint32_t t);
bltl make_eventually(bltl f, std::uint32_t t);
bltl make_globally(bltl f, std::uint32_t t);

// Probabilistic layer: thresholds combined by negation and disjunction.
struct pbltl_node;
using pbltl = std::shared_ptr<const pbltl_node>;

enum class pbltl_kind { threshold, negation, disjunction };

struct pbltl_node {
  pbltl_kind kind;
  double gamma = 0;      // threshold
  std::string gamma_text;
  bltl formula;          // threshold
  pbltl lhs, rhs;
};

pbltl make_threshold(double gamma, bltl f, std::string gamma_text = {});
pbltl make_pnot(pbltl p);
pbltl make_por(pbltl a, pbltl b);
// Conjunction is sugar: !(!a | !b).
pbltl make_pand(pbltl a, pbltl b);

// Grammar:
//   spec  := por
//   por   := pand ('|' pand)*      pand := pnot ('&' pnot)*
//   pnot  := '!' pnot | 'P' '>=' number '[' phi ']' | '(' por ')'
//   phi   := and ('|' and)*        and  := until ('&' until)*
//   until := unary ('U' '[' int ']' until)?
//   unary := '!' unary | 'F' '[' int ']' unary | 'G' '[' int ']' unary
//          | 'true' | 'false' | ident | '"' name '"' | '(' phi ')'
// Comments run from '#' to end of line.
pbltl parse_spec(const model& m, std::string_view text);
bltl parse_bltl(const model& m, std::string_view text);

inline const std::vector<agent_id>& type_of(const bltl& f) { return f->type; }

// Per-agent projection lengths sufficient to decide f.
using bound_vector = std::vector<std::uint32_t>;
bound_vector bound_vector_of(const bltl& f, std::size_t agent_count);

// Local state sequence of one agent.
using local_run = std::vector<local_index>;

// f must be typed on at most `agent`. Positions at or past the end of rho
// satisfy no atom; the until horizon is min(k + t, |rho| - 1).
bool eval_local(const model& m, const bltl& f, agent_id agent, const local_run& rho, std::size_t k = 0);

// Proj_i of a trajectory: the start component, then the target component of
// each event involving i.
local_run projection(const model& m, const trajectory& rho, agent_id agent);
std::vector<local_run> projections(const model& m, const trajectory& rho);

// Single-typed subformulas are evaluated on their agent's projection and
// combined through the boolean structure above them.
bool eval_projections(const model& m, const bltl& f, const std::vector<local_run>& proj);
bool eval_trajectory(const model& m, const bltl& f, const trajectory& rho);

std::string to_string(const model& m, const bltl& f);
std::string to_string(const model& m, const pbltl& p);

// Threshold leaves in preorder.
std::vector<pbltl> threshold_leaves(const pbltl& p);

}  // namespace dmc
