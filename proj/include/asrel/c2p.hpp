#pragma once

// c2p/p2c orientation of non-sibling links.
//
// Every link gets a boolean variable: true keeps its initial direction
// (customer -> provider), false reverses it. Two clause families are built:
//   O1  one (u_t | !u_{t+1}) clause per consecutive link pair of a path, where
//       u_t says "link t is traversed uphill"; a c2p-only labeling of a path is
//       valley-free iff all of its O1 clauses hold.
//   O2  one unit clause per link with unequal endpoint degrees, satisfied when
//       the link points from the smaller to the larger degree.
// O1 weights sum to alpha and O2 weights to 1 - alpha; the weighted
// MAX-2-SAT instance is solved by seeded tabu local search.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "asrel/detail/random.hpp"
#include "asrel/ingest.hpp"
#include "asrel/topology.hpp"
#include "asrel/types.hpp"

namespace asrel {

/// Degree-gradient weight ((d+ - d-)/(d+ + d-)) * ln(d+ + d-).
inline double weight_f(std::size_t d_minus, std::size_t d_plus) {
  if (d_minus > d_plus) throw std::invalid_argument("weight_f: expects d_minus <= d_plus");
  if (d_minus == 0) throw std::invalid_argument("weight_f: degrees must be positive");
  const double lo = static_cast<double>(d_minus), hi = static_cast<double>(d_plus);
  return (hi - lo) / (hi + lo) * std::log(hi + lo);
}

/// weight_f with the arguments in either order.
inline double weight_f_unordered(std::size_t a, std::size_t b) { return weight_f(std::min(a, b), std::max(a, b)); }

// ---------------------------------------------------------------------------
// Sibling contraction

/// Path set with every sibling group merged into its smallest ASN.
struct ProcessedPaths {
  std::set<AsPath> paths;
  std::map<Asn, Asn> rep;  // only members of sibling groups are listed

  Asn rep_of(Asn a) const {
    auto it = rep.find(a);
    return it == rep.end() ? a : it->second;
  }
};

inline std::map<Asn, Asn> sibling_representatives(const std::set<EdgeKey>& siblings) {
  std::map<Asn, Asn> parent;
  auto find = [&](Asn a) {
    Asn r = a;
    while (parent.at(r) != r) r = parent.at(r);
    while (parent.at(a) != r) a = std::exchange(parent.at(a), r);
    return r;
  };
  for (const auto& e : siblings) {
    parent.emplace(e.lo, e.lo);
    parent.emplace(e.hi, e.hi);
  }
  for (const auto& e : siblings) {
    Asn a = find(e.lo), b = find(e.hi);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::map<Asn, Asn> rep;
  for (const auto& [a, p] : parent) rep[a] = find(a);
  return rep;
}

template <class PathRange>
ProcessedPaths contract_siblings(const PathRange& paths, const std::set<EdgeKey>& siblings) {
  ProcessedPaths out;
  out.rep = sibling_representatives(siblings);
  for (const AsPath& p : paths) {
    AsPath q;
    q.reserve(p.size());
    for (Asn a : p) q.push_back(out.rep_of(a));
    q = collapse_prepending(std::move(q));
    if (is_valid_path(q)) out.paths.insert(std::move(q));
  }
  return out;
}

/// Non-sibling links of the graph in contracted ids; links whose endpoints fall
/// into one group vanish.
inline std::set<EdgeKey> contracted_edges(const AsGraph& g, const std::set<EdgeKey>& siblings,
                                          const ProcessedPaths& pp) {
  std::set<EdgeKey> out;
  for (const auto& e : g.edges) {
    if (siblings.count(e)) continue;
    Asn a = pp.rep_of(e.lo), b = pp.rep_of(e.hi);
    if (a != b) out.emplace(a, b);
  }
  return out;
}

/// Degree of a contracted node: the largest full-graph degree in its group.
inline DegreeMap contracted_degrees(const AsGraph& g, const ProcessedPaths& pp) {
  DegreeMap out;
  for (const auto& [v, d] : g.degree) {
    auto& slot = out[pp.rep_of(v)];
    slot = std::max(slot, d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// MAX-2-SAT encoding

struct Literal {
  std::uint32_t var = 0;
  bool positive = true;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

enum class Origin { O1, O2 };

/// Two-literal clause; a unit clause repeats its literal.
struct Clause {
  Literal a;
  Literal b;
  double weight = 0.0;
  Origin origin = Origin::O1;
  std::size_t multiplicity = 1;
  double raw = 0.0;  // O1: multiplicity, O2: f of the link

  bool is_unit() const { return a == b; }
};

/// One variable per link; `initial_provider` is the provider when x = true.
struct EdgeVariables {
  std::vector<EdgeKey> edges;
  std::vector<Asn> initial_provider;
  std::map<EdgeKey, std::uint32_t> index;

  std::size_t size() const { return edges.size(); }
};

/// Initial direction points along the degree gradient, from the lower to the
/// higher ASN when degrees are equal.
inline EdgeVariables make_variables(const std::set<EdgeKey>& edges, const DegreeMap& degrees) {
  EdgeVariables v;
  for (const auto& e : edges) {
    const auto dl = degrees.at(e.lo), dh = degrees.at(e.hi);
    v.index.emplace(e, static_cast<std::uint32_t>(v.edges.size()));
    v.edges.push_back(e);
    v.initial_provider.push_back(dl > dh ? e.lo : e.hi);
  }
  return v;
}

namespace detail {

/// Literal asserting that link from->to is traversed customer -> provider.
inline Literal uphill_literal(Asn from, Asn to, const EdgeVariables& vars) {
  auto it = vars.index.find(EdgeKey(from, to));
  if (it == vars.index.end()) throw std::logic_error("no variable for link " + to_string(EdgeKey(from, to)));
  return {it->second, vars.initial_provider[it->second] == to};
}

inline Clause make_clause(Literal x, Literal y) {
  if (y < x) std::swap(x, y);
  Clause c;
  c.a = x;
  c.b = y;
  return c;
}

}  // namespace detail

/// O1 clauses (u_t | !u_{t+1}) for every consecutive link pair, identical
/// clauses merged with summed multiplicity.
inline std::vector<Clause> build_o1_clauses(const ProcessedPaths& pp, const EdgeVariables& vars) {
  std::map<std::pair<Literal, Literal>, std::size_t> merged;
  for (const auto& p : pp.paths) {
    for (std::size_t t = 0; t + 2 < p.size(); ++t) {
      Literal up = detail::uphill_literal(p[t], p[t + 1], vars);
      Literal next_up = detail::uphill_literal(p[t + 1], p[t + 2], vars);
      Clause c = detail::make_clause(up, {next_up.var, !next_up.positive});
      ++merged[{c.a, c.b}];
    }
  }
  std::vector<Clause> out;
  out.reserve(merged.size());
  for (const auto& [lits, mult] : merged) {
    Clause c;
    c.a = lits.first;
    c.b = lits.second;
    c.origin = Origin::O1;
    c.multiplicity = mult;
    c.raw = static_cast<double>(mult);
    out.push_back(c);
  }
  return out;
}

/// O2 unit clauses carrying the raw bonus f; equal-degree links get none.
inline std::vector<Clause> build_o2_clauses(const EdgeVariables& vars, const DegreeMap& degrees) {
  std::vector<Clause> out;
  for (std::uint32_t i = 0; i < vars.size(); ++i) {
    const auto& e = vars.edges[i];
    const auto dl = degrees.at(e.lo), dh = degrees.at(e.hi);
    if (dl == dh) continue;
    const Asn bigger = dl > dh ? e.lo : e.hi;
    Literal l{i, vars.initial_provider[i] == bigger};
    Clause c = detail::make_clause(l, l);
    c.origin = Origin::O2;
    c.raw = weight_f_unordered(dl, dh);
    out.push_back(c);
  }
  return out;
}

/// Variable count plus weighted clauses; what the solvers operate on.
struct Max2SatProblem {
  std::size_t num_vars = 0;
  std::vector<Clause> clauses;
};

struct Max2SatInstance {
  EdgeVariables vars;
  Max2SatProblem problem;
  double alpha = 0.0;
};

/// Applies the O1/O2 weights: c1 * alpha * multiplicity with c1 = 1/m1, and
/// c2 * (1 - alpha) * f with c2 = 1 / sum f.
inline Max2SatInstance assemble_instance(EdgeVariables vars, std::vector<Clause> o1, std::vector<Clause> o2,
                                         double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("assemble_instance: alpha outside [0,1]");
  double m1 = 0.0, sum_f = 0.0;
  for (const auto& c : o1) m1 += static_cast<double>(c.multiplicity);
  for (const auto& c : o2) sum_f += c.raw;
  for (auto& c : o1) c.weight = m1 > 0 ? alpha * static_cast<double>(c.multiplicity) / m1 : 0.0;
  for (auto& c : o2) c.weight = sum_f > 0 ? (1.0 - alpha) * c.raw / sum_f : 0.0;

  Max2SatInstance inst;
  inst.problem.num_vars = vars.size();
  inst.vars = std::move(vars);
  inst.alpha = alpha;
  inst.problem.clauses = std::move(o1);
  inst.problem.clauses.insert(inst.problem.clauses.end(), o2.begin(), o2.end());
  return inst;
}

// ---------------------------------------------------------------------------
// Solvers

using Assignment = std::vector<bool>;

inline bool literal_true(const Literal& l, const Assignment& x) { return x[l.var] == l.positive; }

inline bool satisfied(const Clause& c, const Assignment& x) { return literal_true(c.a, x) || literal_true(c.b, x); }

inline double satisfied_weight(const Max2SatProblem& p, const Assignment& x) {
  double w = 0.0;
  for (const auto& c : p.clauses)
    if (satisfied(c, x)) w += c.weight;
  return w;
}

inline double total_weight(const Max2SatProblem& p) {
  double w = 0.0;
  for (const auto& c : p.clauses) w += c.weight;
  return w;
}

struct SolveStats {
  double achieved_weight = 0.0;
  std::size_t restarts = 0;
  std::size_t flips = 0;
  bool exact = false;
};

struct SolverOptions {
  std::uint64_t seed = 1;
  std::size_t restarts = 32;
  std::size_t max_flips = 0;  // per restart; 0 selects 50 * num_vars
  std::size_t tabu_tenure = 10;
  unsigned threads = 1;
};

namespace detail {

class TabuSearch {
 public:
  explicit TabuSearch(const Max2SatProblem& p) : p_(p), occurs_(p.num_vars) {
    for (std::uint32_t c = 0; c < p.clauses.size(); ++c) {
      const auto& cl = p.clauses[c];
      check_var(cl.a.var);
      check_var(cl.b.var);
      if (cl.a.var == cl.b.var && cl.a.positive != cl.b.positive)
        throw std::invalid_argument("tautological clause on variable " + std::to_string(cl.a.var));
      occurs_[cl.a.var].push_back(c);
      if (cl.b.var != cl.a.var) occurs_[cl.b.var].push_back(c);
    }
  }

  /// Per-variable weight of clauses preferring true minus preferring false.
  std::vector<double> majority_bias() const {
    std::vector<double> bias(p_.num_vars, 0.0);
    for (const auto& c : p_.clauses) {
      bias[c.a.var] += c.a.positive ? c.weight : -c.weight;
      if (!c.is_unit()) bias[c.b.var] += c.b.positive ? c.weight : -c.weight;
    }
    return bias;
  }

  struct Result {
    Assignment best;
    double weight = 0.0;
    std::size_t flips = 0;
  };

  Result run(Assignment start, std::size_t max_flips, std::size_t tenure) const {
    const std::size_t n = p_.num_vars;
    std::vector<std::uint8_t> val(n);
    for (std::size_t i = 0; i < n; ++i) val[i] = start[i];
    std::vector<double> gain(n, 0.0);
    double current = 0.0;
    for (const auto& c : p_.clauses) {
      if (lit(c.a, val) || lit(c.b, val)) current += c.weight;
      contribute(c, val, gain, +1.0);
    }

    Result r;
    r.best = start;
    r.weight = current;
    std::vector<std::size_t> tabu_until(n, 0);
    for (std::size_t step = 0; step < max_flips; ++step) {
      std::size_t pick = n;
      double pick_gain = 0.0;
      for (std::size_t v = 0; v < n; ++v) {
        if (occurs_[v].empty()) continue;
        const bool allowed = tabu_until[v] <= step || current + gain[v] > r.weight + kEps;
        if (!allowed) continue;
        if (pick == n || gain[v] > pick_gain + kEps) {
          pick = v;
          pick_gain = gain[v];
        }
      }
      if (pick == n) break;
      for (auto ci : occurs_[pick]) contribute(p_.clauses[ci], val, gain, -1.0);
      val[pick] ^= 1;
      for (auto ci : occurs_[pick]) contribute(p_.clauses[ci], val, gain, +1.0);
      current += pick_gain;
      tabu_until[pick] = step + 1 + tenure;
      ++r.flips;
      if (current > r.weight + kEps) {
        r.weight = current;
        for (std::size_t i = 0; i < n; ++i) r.best[i] = val[i] != 0;
      }
    }
    r.weight = satisfied_weight(p_, r.best);
    return r;
  }

 private:
  static constexpr double kEps = 1e-12;

  void check_var(std::uint32_t v) const {
    if (v >= p_.num_vars) throw std::invalid_argument("clause references variable " + std::to_string(v));
  }

  static bool lit(const Literal& l, const std::vector<std::uint8_t>& val) { return (val[l.var] != 0) == l.positive; }

  // Adds sign * (weight change from flipping each variable of c) to gain.
  static void contribute(const Clause& c, const std::vector<std::uint8_t>& val, std::vector<double>& gain,
                         double sign) {
    const bool sa = lit(c.a, val);
    if (c.is_unit()) {
      gain[c.a.var] += sign * (sa ? -c.weight : c.weight);
      return;
    }
    const bool sb = lit(c.b, val);
    if (!sa && !sb) {
      gain[c.a.var] += sign * c.weight;
      gain[c.b.var] += sign * c.weight;
    } else if (sa != sb) {
      gain[sa ? c.a.var : c.b.var] -= sign * c.weight;
    }
  }

  const Max2SatProblem& p_;
  std::vector<std::vector<std::uint32_t>> occurs_;
};

}  // namespace detail

/// Seeded multi-restart tabu search. Restart 0 starts from the weight-majority
/// assignment, later restarts from a randomized majority. The result depends
/// only on (problem, seed, restarts, max_flips, tenure), never on `threads`.
inline std::pair<Assignment, SolveStats> solve_max2sat(const Max2SatProblem& p, const SolverOptions& opt = {}) {
  detail::TabuSearch search(p);
  const auto bias = search.majority_bias();
  const std::size_t restarts = std::max<std::size_t>(1, opt.restarts);
  const std::size_t flips = opt.max_flips ? opt.max_flips : 50 * p.num_vars;

  std::vector<detail::TabuSearch::Result> results(restarts);
  detail::parallel_for(restarts, opt.threads, [&](std::size_t r) {
    detail::Rng rng(detail::derive_seed(opt.seed, r));
    Assignment start(p.num_vars);
    for (std::size_t v = 0; v < p.num_vars; ++v) {
      const bool majority = bias[v] >= 0.0;
      start[v] = (r == 0 || detail::uniform01(rng) < 0.75) ? majority : !majority;
    }
    results[r] = search.run(std::move(start), flips, opt.tabu_tenure);
  });

  std::size_t win = 0;
  SolveStats stats;
  stats.restarts = restarts;
  for (std::size_t r = 0; r < restarts; ++r) {
    stats.flips += results[r].flips;
    if (results[r].weight > results[win].weight) win = r;
  }
  stats.achieved_weight = results[win].weight;
  return {std::move(results[win].best), stats};
}

inline std::pair<Assignment, SolveStats> solve_max2sat(const Max2SatInstance& inst, const SolverOptions& opt = {}) {
  return solve_max2sat(inst.problem, opt);
}

inline constexpr std::size_t kMaxExactVars = 25;

/// Optimal assignment by Gray-code enumeration of all 2^n assignments.
inline std::pair<Assignment, double> solve_max2sat_exact(const Max2SatProblem& p) {
  if (p.num_vars > kMaxExactVars)
    throw LimitError("exact MAX-2-SAT limited to " + std::to_string(kMaxExactVars) + " variables, got " +
                     std::to_string(p.num_vars));
  const std::size_t n = p.num_vars;
  std::vector<std::vector<std::uint32_t>> occurs(n);
  for (std::uint32_t c = 0; c < p.clauses.size(); ++c) {
    occurs.at(p.clauses[c].a.var).push_back(c);
    if (p.clauses[c].b.var != p.clauses[c].a.var) occurs.at(p.clauses[c].b.var).push_back(c);
  }
  Assignment x(n, false);
  double current = satisfied_weight(p, x);
  Assignment best = x;
  double best_w = current;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto v = static_cast<std::size_t>(std::countr_zero(i));
    double delta = 0.0;
    for (auto ci : occurs[v]) delta -= satisfied(p.clauses[ci], x) ? p.clauses[ci].weight : 0.0;
    x[v] = !x[v];
    for (auto ci : occurs[v]) delta += satisfied(p.clauses[ci], x) ? p.clauses[ci].weight : 0.0;
    current += delta;
    if (current > best_w + 1e-12) {
      best_w = current;
      best = x;
    }
  }
  return {best, satisfied_weight(p, best)};
}

// ---------------------------------------------------------------------------
// Orientation

/// Link -> provider endpoint.
using Orientation = std::map<EdgeKey, Asn>;

/// Provider per instance link; links in no clause keep their initial direction.
inline Orientation orient_edges(const Assignment& x, const Max2SatInstance& inst) {
  if (x.size() != inst.vars.size()) throw std::invalid_argument("orient_edges: assignment size mismatch");
  std::vector<bool> constrained(inst.vars.size(), false);
  for (const auto& c : inst.problem.clauses) constrained[c.a.var] = constrained[c.b.var] = true;
  Orientation o;
  for (std::size_t i = 0; i < inst.vars.size(); ++i) {
    const auto& e = inst.vars.edges[i];
    const Asn init = inst.vars.initial_provider[i];
    o.emplace(e, (!constrained[i] || x[i]) ? init : e.other(init));
  }
  return o;
}

/// Maps an orientation of contracted links back to every non-sibling link of
/// the full graph. Links inside one sibling group follow the degree gradient.
inline Orientation lift_orientation(const Orientation& contracted, const AsGraph& g,
                                    const std::set<EdgeKey>& siblings, const ProcessedPaths& pp) {
  Orientation out;
  for (const auto& e : g.edges) {
    if (siblings.count(e)) continue;
    const Asn a = pp.rep_of(e.lo), b = pp.rep_of(e.hi);
    if (a == b) {
      out.emplace(e, g.degree.at(e.lo) > g.degree.at(e.hi) ? e.lo : e.hi);
      continue;
    }
    const Asn p = contracted.at(EdgeKey(a, b));
    out.emplace(e, p == a ? e.lo : e.hi);
  }
  return out;
}

/// True when the c2p-only labeling of `path` under `o` has no valley.
inline bool c2p_valley_free(const AsPath& path, const Orientation& o) {
  bool descending = false;
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    const bool up = o.at(EdgeKey(path[k], path[k + 1])) == path[k + 1];
    if (up && descending) return false;
    if (!up) descending = true;
  }
  return true;
}

/// Fraction of paths whose c2p-only labeling is not valley-free.
inline double invalid_fraction(const ProcessedPaths& pp, const Orientation& o) {
  if (pp.paths.empty()) return 0.0;
  std::size_t bad = 0;
  for (const auto& p : pp.paths) bad += !c2p_valley_free(p, o);
  return static_cast<double>(bad) / static_cast<double>(pp.paths.size());
}

}  // namespace asrel
