#include "strata/join.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <set>

namespace strata {

std::size_t JoinPlan::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < variable_order.size(); ++i) {
    if (variable_order[i] == name) return i;
  }
  throw Error("variable ?" + name + " not in join plan");
}

namespace {

// Canonical atom sequence: sort by textual form, stable for duplicates. This
// makes the variable-order tiebreak independent of how body atoms were
// written.
std::vector<std::size_t> canonical_atom_order(const std::vector<Atom>& atoms) {
  std::vector<std::size_t> idx(atoms.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<std::string> keys;
  keys.reserve(atoms.size());
  for (const Atom& a : atoms) keys.push_back(a.to_string());
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return keys[a] < keys[b];
  });
  return idx;
}

JoinPlan::BoundTerm bind_term(const Term& term, const JoinPlan& plan) {
  JoinPlan::BoundTerm bt;
  if (term.is_variable()) {
    bt.is_variable = true;
    bt.variable = plan.variable_index(term.name());
  } else {
    bt.constant = term.value();
  }
  return bt;
}

// Trie order for one atom: constant positions first (by position), then
// variable positions by global variable rank, occurrences of the same
// variable adjacent.
void plan_atom_levels(const Atom& atom, const JoinPlan& plan,
                      std::vector<std::size_t>& trie_order,
                      std::vector<JoinPlan::Level>& levels) {
  std::vector<std::size_t> positions(atom.arity());
  std::iota(positions.begin(), positions.end(), 0);
  auto rank = [&](std::size_t p) -> std::pair<std::size_t, std::size_t> {
    const Term& t = atom.terms[p];
    if (!t.is_variable()) return {0, p};
    return {1 + plan.variable_index(t.name()), p};
  };
  std::sort(positions.begin(), positions.end(),
            [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
  trie_order = positions;
  levels.clear();
  for (std::size_t p : positions) {
    const Term& t = atom.terms[p];
    JoinPlan::Level level;
    if (t.is_variable()) {
      level.is_constant = false;
      level.variable = plan.variable_index(t.name());
    } else {
      level.is_constant = true;
      level.constant = t.value();
    }
    levels.push_back(std::move(level));
  }
}

}  // namespace

JoinPlan plan(const Rule& rule) {
  JoinPlan result;

  const auto positive_order = canonical_atom_order(rule.body_positive);
  const auto negative_order = canonical_atom_order(rule.body_negative);

  // Occurrence counts over positive atoms (atoms, not positions).
  std::map<std::string, std::size_t> occurrences;
  std::map<std::string, std::size_t> first_seen;
  std::size_t seen_rank = 0;
  for (std::size_t idx : positive_order) {
    const Atom& atom = rule.body_positive[idx];
    std::set<std::string> here;
    for (const Term& t : atom.terms) {
      if (t.kind() != Term::Kind::Universal) continue;
      here.insert(t.name());
      first_seen.emplace(t.name(), seen_rank++);
    }
    for (const auto& name : here) ++occurrences[name];
  }

  result.variable_order.reserve(occurrences.size());
  for (const auto& [name, _] : occurrences) result.variable_order.push_back(name);
  std::sort(result.variable_order.begin(), result.variable_order.end(),
            [&](const std::string& a, const std::string& b) {
              if (occurrences[a] != occurrences[b]) {
                return occurrences[a] > occurrences[b];
              }
              return first_seen[a] < first_seen[b];
            });

  for (std::size_t idx : positive_order) {
    const Atom& atom = rule.body_positive[idx];
    JoinPlan::AtomPlan ap;
    ap.body_index = idx;
    ap.predicate = atom.predicate;
    plan_atom_levels(atom, result, ap.trie_order, ap.levels);
    result.atoms.push_back(std::move(ap));
  }

  for (std::size_t idx : negative_order) {
    const Atom& atom = rule.body_negative[idx];
    JoinPlan::NegatedPlan np;
    np.body_index = idx;
    np.predicate = atom.predicate;
    plan_atom_levels(atom, result, np.trie_order, np.levels);
    np.required_bound = 0;
    for (const JoinPlan::Level& level : np.levels) {
      if (!level.is_constant) {
        np.required_bound = std::max(np.required_bound, level.variable + 1);
      }
    }
    result.negated.push_back(std::move(np));
  }

  for (const Constraint& c : rule.constraints) {
    JoinPlan::ConstraintPlan cp;
    cp.lhs = bind_term(c.lhs, result);
    cp.op = c.op;
    cp.rhs = bind_term(c.rhs, result);
    cp.required_bound = 0;
    for (const JoinPlan::BoundTerm* side : {&cp.lhs, &cp.rhs}) {
      if (side->is_variable) {
        cp.required_bound = std::max(cp.required_bound, side->variable + 1);
      }
    }
    cp.text = c.to_string();
    result.constraints.push_back(std::move(cp));
  }

  return result;
}

namespace {

// Exact enough for our value range: x86-64 long double carries a 64-bit
// mantissa, covering every int64 exactly.
int numeric_compare(const DataValue& a, const DataValue& b) {
  if (a.sort() == ValueSort::Integer && b.sort() == ValueSort::Integer) {
    std::int64_t x = a.integer_value();
    std::int64_t y = b.integer_value();
    return x < y ? -1 : (x > y ? 1 : 0);
  }
  long double x = a.sort() == ValueSort::Integer
                      ? static_cast<long double>(a.integer_value())
                      : static_cast<long double>(a.double_value());
  long double y = b.sort() == ValueSort::Integer
                      ? static_cast<long double>(b.integer_value())
                      : static_cast<long double>(b.double_value());
  return x < y ? -1 : (x > y ? 1 : 0);
}

}  // namespace

bool evaluate_constraint(Comparator op, const DataValue& lhs,
                         const DataValue& rhs, bool* type_error) {
  const bool numeric = lhs.is_numeric() && rhs.is_numeric();
  switch (op) {
    case Comparator::Eq:
      return numeric ? numeric_compare(lhs, rhs) == 0 : lhs == rhs;
    case Comparator::Neq:
      return numeric ? numeric_compare(lhs, rhs) != 0 : !(lhs == rhs);
    default:
      break;
  }
  if (!numeric) {
    if (type_error) *type_error = true;
    return false;
  }
  int c = numeric_compare(lhs, rhs);
  switch (op) {
    case Comparator::Lt: return c < 0;
    case Comparator::Leq: return c <= 0;
    case Comparator::Gt: return c > 0;
    case Comparator::Geq: return c >= 0;
    default: return false;
  }
}

namespace {

// Per-atom iterator state. Occurrence levels of one variable are adjacent in
// the atom's trie order; a segment exposes them as a single leapfrog level
// whose keys are the values present at every occurrence.
class AtomScan {
 public:
  AtomScan(const JoinPlan::AtomPlan& ap, const Trie& trie)
      : ap_(&ap), it_(trie) {
    if (trie.order() != ap.trie_order) {
      throw Error("trie for " + ap.predicate +
                  " does not match the plan's attribute order");
    }
    std::size_t level = 0;
    while (level < ap.levels.size() && ap.levels[level].is_constant) ++level;
    constant_levels_ = level;
    while (level < ap.levels.size()) {
      Segment seg;
      seg.variable = ap.levels[level].variable;
      seg.first = level;
      while (level < ap.levels.size() && !ap.levels[level].is_constant &&
             ap.levels[level].variable == seg.variable) {
        ++level;
      }
      seg.last = level - 1;
      segments_.push_back(seg);
    }
    key_.resize(segments_.size());
  }

  // Seeks the constant prefix; false means the join result is empty.
  bool open_constants(const Dictionary& dict) {
    for (std::size_t l = 0; l < constant_levels_; ++l) {
      auto id = dict.find(ap_->levels[l].constant);
      if (!id) return false;
      it_.open();
      it_.seek(*id);
      if (it_.at_end() || it_.key() != *id) return false;
    }
    return true;
  }

  // Segment index for a plan variable, if this atom contains it.
  std::optional<std::size_t> segment_for(std::size_t variable) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
      if (segments_[i].variable == variable) return i;
    }
    return std::nullopt;
  }

  // Enters segment s (iterator sits just above it) and positions at the first
  // admissible key. False if exhausted.
  bool enter(std::size_t s) {
    it_.open();
    return fix(s);
  }

  bool seek(std::size_t s, ValueId v) {
    ascend_to_first(s);
    it_.seek(v);
    return fix(s);
  }

  bool advance(std::size_t s) {
    ascend_to_first(s);
    it_.next();
    return fix(s);
  }

  // Leaves segment s, restoring the iterator to just above it.
  void exit(std::size_t s) {
    while (it_.level() >= static_cast<int>(segments_[s].first)) it_.up();
  }

  ValueId key(std::size_t s) const { return key_[s]; }

 private:
  struct Segment {
    std::size_t variable = 0;
    std::size_t first = 0;
    std::size_t last = 0;
  };

  void ascend_to_first(std::size_t s) {
    while (it_.level() > static_cast<int>(segments_[s].first)) it_.up();
  }

  // Iterator is at segments_[s].first; finds the next key present at every
  // occurrence level of the segment.
  bool fix(std::size_t s) {
    const Segment& seg = segments_[s];
    while (true) {
      if (it_.at_end()) return false;
      ValueId k = it_.key();
      bool ok = true;
      for (std::size_t lvl = seg.first + 1; lvl <= seg.last; ++lvl) {
        it_.open();
        it_.seek(k);
        if (it_.at_end() || it_.key() != k) {
          ok = false;
          break;
        }
      }
      if (ok) {
        key_[s] = k;
        return true;
      }
      ascend_to_first(s);
      it_.next();
    }
  }

  const JoinPlan::AtomPlan* ap_;
  TrieIterator it_;
  std::size_t constant_levels_ = 0;
  std::vector<Segment> segments_;
  std::vector<ValueId> key_;
};

class LeapfrogExecutor {
 public:
  LeapfrogExecutor(const JoinPlan& plan, const JoinInputs& inputs,
                   const Dictionary& dict, const WarnFn& warn)
      : plan_(plan), inputs_(inputs), dict_(dict), warn_(warn) {
    if (inputs.positive.size() != plan.atoms.size() ||
        inputs.negated.size() != plan.negated.size()) {
      throw Error("join inputs do not match the plan");
    }
    for (std::size_t i = 0; i < plan.negated.size(); ++i) {
      if (inputs.negated[i]->order() != plan.negated[i].trie_order) {
        throw Error("negated trie for " + plan.negated[i].predicate +
                    " does not match the plan's attribute order");
      }
    }
    warned_.assign(plan.constraints.size(), false);
  }

  Trie run() {
    const std::size_t vars = plan_.variable_count();
    std::vector<std::size_t> identity(vars);
    std::iota(identity.begin(), identity.end(), 0);
    TrieBuilder out(vars, identity);
    binding_.assign(vars, 0);

    scans_.reserve(plan_.atoms.size());
    for (std::size_t i = 0; i < plan_.atoms.size(); ++i) {
      scans_.emplace_back(plan_.atoms[i], *inputs_.positive[i]);
    }
    bool feasible = true;
    for (std::size_t i = 0; i < plan_.atoms.size(); ++i) {
      // Every positive atom needs a tuple under its constant prefix.
      if (inputs_.positive[i]->empty() || !scans_[i].open_constants(dict_)) {
        feasible = false;
        break;
      }
    }
    if (feasible && !checks_pass(0)) feasible = false;

    if (feasible) {
      if (vars == 0) {
        out.push(binding_);
      } else {
        participants_.resize(vars);
        for (std::size_t v = 0; v < vars; ++v) {
          for (std::size_t i = 0; i < scans_.size(); ++i) {
            if (auto seg = scans_[i].segment_for(v)) {
              participants_[v].push_back({i, *seg});
            }
          }
        }
        descend(0, out);
      }
    }
    return out.finish();
  }

 private:
  struct Participant {
    std::size_t scan;
    std::size_t segment;
  };

  // Negation and constraint checks that become due once `bound` variables
  // are bound.
  bool checks_pass(std::size_t bound) {
    for (std::size_t i = 0; i < plan_.negated.size(); ++i) {
      const auto& np = plan_.negated[i];
      if (np.required_bound != bound) continue;
      if (negated_present(np, *inputs_.negated[i])) return false;
    }
    for (std::size_t i = 0; i < plan_.constraints.size(); ++i) {
      const auto& cp = plan_.constraints[i];
      if (cp.required_bound != bound) continue;
      DataValue lhs = resolve_term(cp.lhs);
      DataValue rhs = resolve_term(cp.rhs);
      bool type_error = false;
      bool ok = evaluate_constraint(cp.op, lhs, rhs, &type_error);
      if (type_error && !warned_[i] && warn_) {
        warn_("constraint " + cp.text +
              " compared incomparable values; treating as false");
        warned_[i] = true;
      }
      if (!ok) return false;
    }
    return true;
  }

  bool negated_present(const JoinPlan::NegatedPlan& np,
                       const Trie& trie) const {
    std::vector<ValueId> row(np.levels.size());
    for (std::size_t l = 0; l < np.levels.size(); ++l) {
      if (np.levels[l].is_constant) {
        auto id = dict_.find(np.levels[l].constant);
        if (!id) return false;  // value unseen, so no such tuple
        row[l] = *id;
      } else {
        row[l] = binding_[np.levels[l].variable];
      }
    }
    return trie.contains(row);
  }

  DataValue resolve_term(const JoinPlan::BoundTerm& bt) const {
    if (bt.is_variable) return dict_.resolve(binding_[bt.variable]);
    return bt.constant;
  }

  void descend(std::size_t depth, TrieBuilder& out) {
    auto& parts = participants_[depth];
    std::size_t entered = 0;
    bool alive = true;
    for (; entered < parts.size(); ++entered) {
      if (!scans_[parts[entered].scan].enter(parts[entered].segment)) {
        alive = false;
        ++entered;
        break;
      }
    }
    if (alive) {
      while (true) {
        // Leapfrog search: align every participant on the max key.
        ValueId max_key = 0;
        for (const Participant& p : parts) {
          max_key = std::max(max_key, scans_[p.scan].key(p.segment));
        }
        bool aligned = true;
        for (const Participant& p : parts) {
          while (scans_[p.scan].key(p.segment) < max_key) {
            if (!scans_[p.scan].seek(p.segment, max_key)) {
              alive = false;
              break;
            }
          }
          if (!alive) break;
          if (scans_[p.scan].key(p.segment) > max_key) {
            aligned = false;
            max_key = scans_[p.scan].key(p.segment);
          }
        }
        if (!alive) break;
        if (!aligned) continue;

        binding_[depth] = max_key;
        if (checks_pass(depth + 1)) {
          if (depth + 1 == plan_.variable_count()) {
            out.push(binding_);
          } else {
            descend(depth + 1, out);
          }
        }
        if (!scans_[parts[0].scan].advance(parts[0].segment)) break;
      }
    }
    for (std::size_t i = entered; i-- > 0;) {
      scans_[parts[i].scan].exit(parts[i].segment);
    }
  }

  const JoinPlan& plan_;
  const JoinInputs& inputs_;
  const Dictionary& dict_;
  const WarnFn& warn_;
  std::vector<AtomScan> scans_;
  std::vector<std::vector<Participant>> participants_;
  std::vector<ValueId> binding_;
  std::vector<bool> warned_;
};

}  // namespace

Trie leapfrog_join(const JoinPlan& plan, const JoinInputs& inputs,
                   const Dictionary& dict, const WarnFn& warn) {
  LeapfrogExecutor executor(plan, inputs, dict, warn);
  return executor.run();
}

}  // namespace strata
