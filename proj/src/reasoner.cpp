#include "strata/reasoner.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace strata {

void FactBase::add(const std::string& predicate, std::vector<ValueId> row) {
  auto [it, inserted] = arities.emplace(predicate, row.size());
  if (!inserted && it->second != row.size()) {
    throw Error("arity mismatch for predicate " + predicate);
  }
  tuples[predicate].push_back(std::move(row));
}

namespace {

std::vector<std::size_t> identity_order(std::size_t arity) {
  std::vector<std::size_t> order(arity);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

// Working state of one predicate during a stratum fixpoint.
struct Relation {
  std::size_t arity = 0;
  Trie full{0};      // committed facts
  Trie full_old{0};  // committed facts minus the current delta
  Trie delta{0};     // facts new in the previous iteration
  std::size_t input_rows = 0;

  // Facts appended during the current iteration; visible to the chase
  // satisfaction check but not to joins until the next iteration.
  std::set<std::vector<ValueId>> pending;

  // Per-order rematerialisations. When the version advances, the full caches
  // become the full_old caches and new full orders are produced by merging
  // the reordered delta, so only the delta is ever re-sorted.
  std::map<std::vector<std::size_t>, Trie> full_cache;
  std::map<std::vector<std::size_t>, Trie> full_old_cache;
  std::map<std::vector<std::size_t>, Trie> delta_cache;

  const Trie& full_with_order(const std::vector<std::size_t>& order) {
    if (order == full.order()) return full;
    auto it = full_cache.find(order);
    if (it != full_cache.end()) return it->second;
    auto old_it = full_old_cache.find(order);
    if (old_it != full_old_cache.end()) {
      const Trie& d = delta_with_order(order);
      return full_cache.emplace(order, trie_union(old_it->second, d))
          .first->second;
    }
    return full_cache.emplace(order, full.reordered(order)).first->second;
  }

  const Trie& full_old_with_order(const std::vector<std::size_t>& order) {
    if (order == full_old.order()) return full_old;
    auto it = full_old_cache.find(order);
    if (it == full_old_cache.end()) {
      it = full_old_cache.emplace(order, full_old.reordered(order)).first;
    }
    return it->second;
  }

  const Trie& delta_with_order(const std::vector<std::size_t>& order) {
    if (order == delta.order()) return delta;
    auto it = delta_cache.find(order);
    if (it == delta_cache.end()) {
      it = delta_cache.emplace(order, delta.reordered(order)).first;
    }
    return it->second;
  }

  void advance_caches() {
    full_old_cache = std::move(full_cache);
    full_cache.clear();
    delta_cache.clear();
  }

  void reset_caches() {
    full_cache.clear();
    full_old_cache.clear();
    delta_cache.clear();
  }
};

// One compiled rule: join plan plus instantiation info for the head.
struct CompiledRule {
  const Rule* rule = nullptr;
  std::size_t rule_index = 0;
  JoinPlan join_plan;
  bool existential = false;

  struct HeadTerm {
    enum class Kind { Constant, Bound, Fresh } kind = Kind::Constant;
    ValueId constant_id = 0;   // Kind::Constant
    std::size_t variable = 0;  // Kind::Bound: index into plan variable order
    std::size_t fresh = 0;     // Kind::Fresh: index into existential_names
  };
  struct HeadAtom {
    std::string predicate;
    std::vector<HeadTerm> terms;
  };
  std::vector<HeadAtom> head;
  std::vector<std::string> existential_names;  // first-occurrence order
};

class Reasoner {
 public:
  Reasoner(const Program& program, FactBase base, const Limits& limits,
           const WarnFn& warn)
      : program_(program), limits_(limits), warn_(warn) {
    start_time_ = std::chrono::steady_clock::now();

    // Every constant the program can mention must be interned before the
    // dictionary is ranked; afterwards id order stays aligned with value
    // order (nulls sort last and are minted with increasing labels).
    intern_program_constants(base.dict);
    for (const Atom& fact : program.facts) {
      TypeDeclaration decl =
          program.declaration_of(fact.predicate, fact.arity());
      std::vector<ValueId> row;
      row.reserve(fact.arity());
      for (std::size_t i = 0; i < fact.terms.size(); ++i) {
        const DataValue& v = fact.terms[i].value();
        if (v.sort() == ValueSort::Null) {
          throw Error("null values are not valid input data");
        }
        row.push_back(base.dict.intern(coerce(v, decl.types[i])));
      }
      base.add(fact.predicate, std::move(row));
    }

    std::vector<ValueId> remap;
    dict_ = rank_by_value(base.dict, remap);
    null_counter_ = base.null_counter;

    // Relations for every predicate the program or the base mentions.
    auto ensure = [this](const std::string& name, std::size_t arity) {
      auto [it, inserted] = relations_.emplace(name, Relation{});
      if (inserted) {
        it->second.arity = arity;
        it->second.full = Trie(arity);
        it->second.full_old = Trie(arity);
        it->second.delta = Trie(arity);
      } else if (it->second.arity != arity) {
        throw Error("arity mismatch for predicate " + name);
      }
    };
    for (const auto& [name, arity] : base.arities) ensure(name, arity);
    for (const auto& decl : program.declarations) {
      ensure(decl.predicate, decl.arity());
    }
    for (const auto& src : program.sources) ensure(src.predicate, src.arity);
    for (const auto& rule : program.rules) {
      for (const Atom& atom : rule.head) ensure(atom.predicate, atom.arity());
      for (const Atom& atom : rule.body_positive) {
        ensure(atom.predicate, atom.arity());
      }
      for (const Atom& atom : rule.body_negative) {
        ensure(atom.predicate, atom.arity());
      }
    }

    for (auto& [name, rows] : base.tuples) {
      Relation& rel = relations_.at(name);
      for (auto& row : rows) {
        for (ValueId& id : row) id = remap[id];
      }
      rel.full = Trie::from_tuples(rows, identity_order(rel.arity));
      rel.input_rows = rel.full.row_count();
      total_facts_ += rel.full.row_count();
    }

    compile_rules();
  }

  MaterialisationResult run() {
    Stratification stratification = stratify(program_);
    report_.stratum_times.resize(stratification.stratum_count());
    state_done_.assign(stratification.stratum_count(), false);

    for (std::size_t s = 0; s < stratification.stratum_count(); ++s) {
      auto stratum_start = std::chrono::steady_clock::now();
      run_stratum(stratification.strata[s]);
      state_done_[s] = true;
      report_.stratum_times[s] =
          std::chrono::duration_cast<std::chrono::milliseconds>(
              std::chrono::steady_clock::now() - stratum_start);
    }

    MaterialisationResult result;
    result.state.dict = std::move(dict_);
    result.state.null_counter = null_counter_;
    result.state.iterations = iterations_total_;
    result.state.stratum_done = state_done_;
    for (const std::string& head : program_.head_predicates()) {
      report_.derived_counts[head] = 0;
    }
    for (auto& [name, rel] : relations_) {
      ChaseState::Relation out;
      out.arity = rel.arity;
      out.full = std::move(rel.full);
      out.delta = std::move(rel.delta);
      out.input_rows = rel.input_rows;
      std::uint64_t derived = out.full.row_count() - rel.input_rows;
      if (derived > 0) report_.derived_counts[name] = derived;
      result.state.relations.emplace(name, std::move(out));
    }
    report_.iterations = iterations_total_;
    report_.reasoning_time = std::accumulate(
        report_.stratum_times.begin(), report_.stratum_times.end(),
        std::chrono::milliseconds{0});
    result.report = std::move(report_);
    return result;
  }

 private:
  void intern_program_constants(Dictionary& dict) {
    auto intern_atom = [&dict](const Atom& atom) {
      for (const Term& t : atom.terms) {
        if (!t.is_variable()) dict.intern(t.value());
      }
    };
    for (const Rule& rule : program_.rules) {
      for (const Atom& atom : rule.head) intern_atom(atom);
      for (const Atom& atom : rule.body_positive) intern_atom(atom);
      for (const Atom& atom : rule.body_negative) intern_atom(atom);
      for (const Constraint& c : rule.constraints) {
        if (!c.lhs.is_variable()) dict.intern(c.lhs.value());
        if (!c.rhs.is_variable()) dict.intern(c.rhs.value());
      }
    }
    for (const Atom& fact : program_.facts) intern_atom(fact);
  }

  void compile_rules() {
    compiled_.reserve(program_.rules.size());
    for (std::size_t r = 0; r < program_.rules.size(); ++r) {
      const Rule& rule = program_.rules[r];
      CompiledRule cr;
      cr.rule = &rule;
      cr.rule_index = r;
      cr.join_plan = plan(rule);
      cr.existential = rule.has_existential_head();
      for (const Atom& atom : rule.head) {
        CompiledRule::HeadAtom ha;
        ha.predicate = atom.predicate;
        for (const Term& t : atom.terms) {
          CompiledRule::HeadTerm ht;
          switch (t.kind()) {
            case Term::Kind::Constant: {
              ht.kind = CompiledRule::HeadTerm::Kind::Constant;
              auto id = dict_.find(t.value());
              if (!id) {
                throw Error("head constant " + t.value().to_string() +
                            " missing from dictionary");
              }
              ht.constant_id = *id;
              break;
            }
            case Term::Kind::Universal:
              ht.kind = CompiledRule::HeadTerm::Kind::Bound;
              ht.variable = cr.join_plan.variable_index(t.name());
              break;
            case Term::Kind::Existential: {
              ht.kind = CompiledRule::HeadTerm::Kind::Fresh;
              auto it = std::find(cr.existential_names.begin(),
                                  cr.existential_names.end(), t.name());
              if (it == cr.existential_names.end()) {
                ht.fresh = cr.existential_names.size();
                cr.existential_names.push_back(t.name());
              } else {
                ht.fresh = static_cast<std::size_t>(
                    it - cr.existential_names.begin());
              }
              break;
            }
          }
          ha.terms.push_back(ht);
        }
        cr.head.push_back(std::move(ha));
      }
      compiled_.push_back(std::move(cr));
    }
  }

  void run_stratum(const std::vector<std::size_t>& rule_indices) {
    // Iteration 1 evaluates naively: every fact is fresh.
    for (auto& [name, rel] : relations_) {
      rel.full_old = Trie(rel.arity);
      rel.delta = rel.full;
      rel.reset_caches();
    }

    std::uint64_t iteration = 0;
    while (true) {
      ++iteration;
      ++iterations_total_;
      if (iteration > limits_.max_iterations) {
        throw LimitError("iteration limit of " +
                         std::to_string(limits_.max_iterations) +
                         " exceeded");
      }
      check_timeout();

      for (std::size_t r : rule_indices) {
        apply_rule(compiled_[r], iteration == 1);
      }

      bool new_facts = false;
      for (auto& [name, rel] : relations_) {
        bool had_delta = !rel.delta.empty();
        bool has_pending = !rel.pending.empty();
        if (!had_delta && !has_pending) continue;
        Trie new_delta(rel.arity);
        if (has_pending) {
          TrieBuilder builder(rel.arity, identity_order(rel.arity));
          for (const auto& row : rel.pending) builder.push(row);
          new_delta = builder.finish();
          rel.pending.clear();
          new_facts = true;
        }
        rel.full_old = std::move(rel.full);
        rel.full = new_delta.empty() ? rel.full_old
                                     : trie_union(rel.full_old, new_delta);
        rel.delta = std::move(new_delta);
        rel.advance_caches();
      }
      if (!new_facts) break;
    }
  }

  void apply_rule(CompiledRule& cr, bool first_iteration) {
    const JoinPlan& jp = cr.join_plan;
    const std::size_t atom_count = jp.atoms.size();

    JoinInputs inputs;
    inputs.positive.resize(atom_count);
    inputs.negated.resize(jp.negated.size());
    for (std::size_t i = 0; i < jp.negated.size(); ++i) {
      Relation& rel = relations_.at(jp.negated[i].predicate);
      inputs.negated[i] = &rel.full_with_order(jp.negated[i].trie_order);
    }

    auto warn_once = [this, &cr](const std::string& msg) {
      if (!warn_) return;
      std::string key = "rule " + std::to_string(cr.rule_index + 1);
      if (warned_rules_.insert(key + msg).second) {
        warn_(key + ": " + msg);
      }
    };

    if (atom_count == 0) {
      // No positive atoms: the body is ground in negations/constraints and
      // stable for the whole stratum, so it fires once.
      if (!first_iteration) return;
      Trie bindings = leapfrog_join(jp, inputs, dict_, warn_once);
      process_bindings(cr, bindings);
      return;
    }

    // Semi-naive split: one atom bound to the delta, earlier atoms to the
    // pre-delta full, later atoms to the merged full.
    for (std::size_t pivot = 0; pivot < atom_count; ++pivot) {
      Relation& pivot_rel = relations_.at(jp.atoms[pivot].predicate);
      if (pivot_rel.delta.empty()) continue;
      for (std::size_t i = 0; i < atom_count; ++i) {
        Relation& rel = relations_.at(jp.atoms[i].predicate);
        const std::vector<std::size_t>& order = jp.atoms[i].trie_order;
        if (i < pivot) {
          inputs.positive[i] = &rel.full_old_with_order(order);
        } else if (i == pivot) {
          inputs.positive[i] = &rel.delta_with_order(order);
        } else {
          inputs.positive[i] = &rel.full_with_order(order);
        }
      }
      Trie bindings = leapfrog_join(jp, inputs, dict_, warn_once);
      process_bindings(cr, bindings);
    }
  }

  void process_bindings(CompiledRule& cr, const Trie& bindings) {
    RowCursor cursor(bindings);
    std::vector<ValueId> binding;
    std::vector<ValueId> fresh_ids;
    std::vector<ValueId> row;
    while (cursor.next(binding)) {
      if (cr.existential) {
        if (head_satisfied(cr, binding)) continue;
        ++report_.chase_applications;
        fresh_ids.clear();
        for (std::size_t i = 0; i < cr.existential_names.size(); ++i) {
          fresh_ids.push_back(dict_.intern(DataValue::null(null_counter_)));
          ++null_counter_;
          ++report_.nulls_minted;
        }
        for (const auto& ha : cr.head) {
          instantiate(ha, binding, fresh_ids, row);
          add_fact(ha.predicate, row);
        }
      } else {
        for (const auto& ha : cr.head) {
          instantiate(ha, binding, fresh_ids, row);
          add_fact(ha.predicate, row);
        }
      }
    }
  }

  void instantiate(const CompiledRule::HeadAtom& ha,
                   const std::vector<ValueId>& binding,
                   const std::vector<ValueId>& fresh_ids,
                   std::vector<ValueId>& row) const {
    row.resize(ha.terms.size());
    for (std::size_t i = 0; i < ha.terms.size(); ++i) {
      const auto& ht = ha.terms[i];
      switch (ht.kind) {
        case CompiledRule::HeadTerm::Kind::Constant:
          row[i] = ht.constant_id;
          break;
        case CompiledRule::HeadTerm::Kind::Bound:
          row[i] = binding[ht.variable];
          break;
        case CompiledRule::HeadTerm::Kind::Fresh:
          row[i] = fresh_ids[ht.fresh];
          break;
      }
    }
  }

  void add_fact(const std::string& predicate, const std::vector<ValueId>& row) {
    Relation& rel = relations_.at(predicate);
    if (rel.full.contains(row)) return;
    if (!rel.pending.insert(row).second) return;
    ++total_facts_;
    if (total_facts_ >= limits_.max_facts) {
      throw LimitError("fact limit of " + std::to_string(limits_.max_facts) +
                       " exceeded");
    }
  }

  // Restricted-chase satisfaction: does some assignment of the existential
  // variables into existing values make every head atom present? Universal
  // variables are fixed by the binding; the search walks the head conjunction
  // with backtracking over trie prefixes and the pending overlay.
  bool head_satisfied(const CompiledRule& cr,
                      const std::vector<ValueId>& binding) {
    std::vector<std::optional<ValueId>> assignment(cr.existential_names.size());
    return satisfy_from(cr, binding, 0, assignment);
  }

  bool satisfy_from(const CompiledRule& cr, const std::vector<ValueId>& binding,
                    std::size_t atom_index,
                    std::vector<std::optional<ValueId>>& assignment) {
    if (atom_index == cr.head.size()) return true;
    const auto& ha = cr.head[atom_index];
    Relation& rel = relations_.at(ha.predicate);

    // Pattern: fixed ids, or the fresh-variable slot when unassigned.
    std::vector<std::optional<ValueId>> pattern(ha.terms.size());
    std::vector<std::size_t> fresh_slot(ha.terms.size(), SIZE_MAX);
    for (std::size_t i = 0; i < ha.terms.size(); ++i) {
      const auto& ht = ha.terms[i];
      switch (ht.kind) {
        case CompiledRule::HeadTerm::Kind::Constant:
          pattern[i] = ht.constant_id;
          break;
        case CompiledRule::HeadTerm::Kind::Bound:
          pattern[i] = binding[ht.variable];
          break;
        case CompiledRule::HeadTerm::Kind::Fresh:
          if (assignment[ht.fresh]) {
            pattern[i] = *assignment[ht.fresh];
          } else {
            fresh_slot[i] = ht.fresh;
          }
          break;
      }
    }

    bool found = false;
    auto try_row = [&](const std::vector<ValueId>& row) {
      if (found) return;
      // Repeated fresh variables within the atom must agree.
      std::vector<std::optional<ValueId>> trial = assignment;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (pattern[i]) {
          if (*pattern[i] != row[i]) return;
        } else {
          auto& slot = trial[fresh_slot[i]];
          if (slot && *slot != row[i]) return;
          slot = row[i];
        }
      }
      if (satisfy_from(cr, binding, atom_index + 1, trial)) {
        assignment = std::move(trial);
        found = true;
      }
    };

    match_trie(rel.full, pattern, try_row, found);
    if (!found) {
      // The pending set is ordered, so a fixed pattern prefix bounds the scan.
      std::vector<ValueId> prefix;
      for (std::size_t i = 0; i < pattern.size() && pattern[i]; ++i) {
        prefix.push_back(*pattern[i]);
      }
      auto it = prefix.empty() ? rel.pending.begin()
                               : rel.pending.lower_bound(prefix);
      for (; it != rel.pending.end() && !found; ++it) {
        if (!prefix.empty() &&
            !std::equal(prefix.begin(), prefix.end(), it->begin())) {
          break;
        }
        try_row(*it);
      }
    }
    return found;
  }

  // Enumerates trie rows matching a partially fixed pattern (fixed positions
  // seek, free positions iterate).
  template <typename Fn>
  void match_trie(const Trie& trie, const std::vector<std::optional<ValueId>>& pattern,
                  Fn&& fn, bool& stop) {
    if (trie.empty()) return;
    std::vector<ValueId> row(trie.arity());
    match_level(trie, pattern, 0, 0, trie.layer(0).data.size(), row, fn, stop);
  }

  template <typename Fn>
  void match_level(const Trie& trie,
                   const std::vector<std::optional<ValueId>>& pattern,
                   std::size_t level, std::size_t lo, std::size_t hi,
                   std::vector<ValueId>& row, Fn&& fn, bool& stop) {
    const TrieLayer& layer = trie.layer(level);
    auto recurse = [&](std::size_t node) {
      row[level] = layer.data[node];
      if (level + 1 == trie.arity()) {
        fn(row);
      } else {
        match_level(trie, pattern, level + 1, layer.child_starts[node],
                    layer.child_starts[node + 1], row, fn, stop);
      }
    };
    if (pattern[level]) {
      auto it = std::lower_bound(layer.data.begin() + lo,
                                 layer.data.begin() + hi, *pattern[level]);
      if (it == layer.data.begin() + hi || *it != *pattern[level]) return;
      recurse(static_cast<std::size_t>(it - layer.data.begin()));
    } else {
      for (std::size_t node = lo; node < hi && !stop; ++node) recurse(node);
    }
  }

  void check_timeout() const {
    if (!limits_.timeout_seconds) return;
    auto elapsed = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start_time_)
                       .count();
    if (elapsed > *limits_.timeout_seconds) {
      throw LimitError("wall-clock limit of " +
                       std::to_string(*limits_.timeout_seconds) +
                       " seconds exceeded");
    }
  }

  const Program& program_;
  Limits limits_;
  WarnFn warn_;
  Dictionary dict_;
  std::map<std::string, Relation> relations_;
  std::vector<CompiledRule> compiled_;
  std::set<std::string> warned_rules_;
  std::uint64_t null_counter_ = 0;
  std::uint64_t total_facts_ = 0;
  std::uint64_t iterations_total_ = 0;
  std::vector<bool> state_done_;
  ExecutionReport report_;
  std::chrono::steady_clock::time_point start_time_;
};

}  // namespace

MaterialisationResult materialise(const Program& program, FactBase base,
                                  const Limits& limits, const WarnFn& warn) {
  Reasoner reasoner(program, std::move(base), limits, warn);
  return reasoner.run();
}

FactBase fact_base_from_state(const ChaseState& state) {
  FactBase base;
  base.dict = state.dict;
  base.null_counter = state.null_counter;
  for (const auto& [name, rel] : state.relations) {
    base.arities[name] = rel.arity;
    base.tuples[name] = rel.full.enumerate();
  }
  return base;
}

}  // namespace strata
