#include "strata/stratify.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace strata {

namespace {

struct Edge {
  std::size_t from;  // depended-upon predicate
  std::size_t to;    // head predicate
  bool negative;
};

// Path from -> ... -> to along dependency edges, restricted to `allowed`
// nodes. Exists whenever both ends share a strongly connected component.
std::vector<std::size_t> find_path(std::size_t from, std::size_t to,
                                   const std::vector<std::vector<std::size_t>>& adjacency,
                                   const std::vector<bool>& allowed) {
  std::vector<std::size_t> parent(adjacency.size(), SIZE_MAX);
  std::deque<std::size_t> queue{from};
  std::vector<bool> seen(adjacency.size(), false);
  seen[from] = true;
  while (!queue.empty()) {
    std::size_t node = queue.front();
    queue.pop_front();
    if (node == to) break;
    for (std::size_t next : adjacency[node]) {
      if (!allowed[next] || seen[next]) continue;
      seen[next] = true;
      parent[next] = node;
      queue.push_back(next);
    }
  }
  std::vector<std::size_t> path;
  std::size_t node = to;
  while (node != SIZE_MAX && node != from) {
    path.push_back(node);
    node = parent[node];
  }
  path.push_back(from);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Stratification stratify(const Program& program) {
  // Dense predicate numbering in first-appearance order.
  std::vector<std::string> names;
  std::map<std::string, std::size_t> index;
  auto predicate_id = [&](const std::string& name) {
    auto [it, inserted] = index.emplace(name, names.size());
    if (inserted) names.push_back(name);
    return it->second;
  };
  for (const auto& decl : program.declarations) predicate_id(decl.predicate);
  for (const auto& src : program.sources) predicate_id(src.predicate);
  for (const auto& fact : program.facts) predicate_id(fact.predicate);
  for (const auto& rule : program.rules) {
    for (const auto& atom : rule.head) predicate_id(atom.predicate);
    for (const auto& atom : rule.body_positive) predicate_id(atom.predicate);
    for (const auto& atom : rule.body_negative) predicate_id(atom.predicate);
  }

  std::vector<Edge> edges;
  for (const auto& rule : program.rules) {
    for (const auto& head : rule.head) {
      std::size_t h = predicate_id(head.predicate);
      for (const auto& atom : rule.body_positive) {
        edges.push_back({predicate_id(atom.predicate), h, false});
      }
      for (const auto& atom : rule.body_negative) {
        edges.push_back({predicate_id(atom.predicate), h, true});
      }
      // Conjunctive heads are derived together, so they share a stratum.
      for (const auto& other : rule.head) {
        std::size_t o = predicate_id(other.predicate);
        if (o != h) {
          edges.push_back({o, h, false});
          edges.push_back({h, o, false});
        }
      }
    }
  }

  const std::size_t n = names.size();
  std::vector<std::size_t> stratum(n, 0);
  // Relax to fixpoint. Legal strata never exceed the predicate count, so a
  // value above n proves a recursive negated dependency.
  bool changed = true;
  bool overflow = false;
  while (changed && !overflow) {
    changed = false;
    for (const Edge& e : edges) {
      std::size_t bound = stratum[e.from] + (e.negative ? 1 : 0);
      if (stratum[e.to] < bound) {
        stratum[e.to] = bound;
        changed = true;
        if (bound > n) overflow = true;
      }
    }
  }

  if (overflow) {
    // A negated dependency sits on a cycle. Locate it for the report.
    std::vector<std::vector<std::size_t>> adjacency(n);
    for (const Edge& e : edges) adjacency[e.from].push_back(e.to);
    for (auto& row : adjacency) {
      std::sort(row.begin(), row.end());
      row.erase(std::unique(row.begin(), row.end()), row.end());
    }
    // reachable[i] via simple BFS per node; n stays small (predicate count).
    std::vector<std::vector<bool>> reaches(n, std::vector<bool>(n, false));
    for (std::size_t s = 0; s < n; ++s) {
      std::deque<std::size_t> queue{s};
      while (!queue.empty()) {
        std::size_t node = queue.front();
        queue.pop_front();
        for (std::size_t next : adjacency[node]) {
          if (!reaches[s][next]) {
            reaches[s][next] = true;
            queue.push_back(next);
          }
        }
      }
    }
    for (const Edge& e : edges) {
      if (!e.negative || !reaches[e.to][e.from]) continue;
      // Cycle: e.from ~> e.to (the negated step) and back.
      std::vector<bool> allowed(n, false);
      for (std::size_t i = 0; i < n; ++i) {
        allowed[i] = (reaches[e.to][i] || i == e.to) &&
                     (reaches[i][e.from] || i == e.from);
      }
      std::vector<std::size_t> path =
          find_path(e.to, e.from, adjacency, allowed);
      std::vector<std::string> cycle;
      cycle.reserve(path.size());
      for (std::size_t node : path) cycle.push_back(names[node]);
      std::string msg = "program is not stratifiable: negation cycle ";
      for (const auto& name : cycle) msg += name + " -> ";
      msg += cycle.front();
      throw StratificationError(msg, std::move(cycle));
    }
    throw StratificationError("program is not stratifiable", {});
  }

  // Compact stratum numbers and assign rules by head stratum.
  std::vector<std::size_t> used(stratum.begin(), stratum.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::map<std::size_t, std::size_t> compact;
  for (std::size_t i = 0; i < used.size(); ++i) compact[used[i]] = i;

  Stratification result;
  result.strata.resize(used.size());
  for (std::size_t p = 0; p < n; ++p) {
    result.predicate_stratum[names[p]] = compact[stratum[p]];
  }
  for (std::size_t r = 0; r < program.rules.size(); ++r) {
    const Rule& rule = program.rules[r];
    std::size_t s = 0;
    for (const auto& head : rule.head) {
      s = std::max(s, result.predicate_stratum[head.predicate]);
    }
    result.strata[s].push_back(r);
  }
  return result;
}

}  // namespace strata
