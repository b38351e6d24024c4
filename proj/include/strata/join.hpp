#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "strata/ast.hpp"
#include "strata/dictionary.hpp"
#include "strata/trie.hpp"

namespace strata {

/// Compiled evaluation plan for one rule body.
///
/// The global variable order ranks variables by descending number of positive
/// body atoms they occur in, ties broken by first textual occurrence. Planning
/// canonicalises the body atom sequence first, so permuting body atoms yields
/// an identical plan. Constants are pinned before variables in each atom's
/// trie order and handled as seeks before the variable descent begins.
struct JoinPlan {
  struct Level {
    bool is_constant = false;
    DataValue constant = DataValue::integer(0);
    std::size_t variable = 0;  // index into variable_order when !is_constant
  };

  struct AtomPlan {
    std::size_t body_index = 0;           // into the rule's body_positive
    std::string predicate;
    std::vector<std::size_t> trie_order;  // required trie attribute order
    std::vector<Level> levels;            // one per trie level
  };

  struct NegatedPlan {
    std::size_t body_index = 0;  // into the rule's body_negative
    std::string predicate;
    std::vector<std::size_t> trie_order;
    std::vector<Level> levels;
    std::size_t required_bound = 0;  // anti-join fires once this many
                                     // variables are bound
  };

  struct BoundTerm {
    bool is_variable = false;
    std::size_t variable = 0;
    DataValue constant = DataValue::integer(0);
  };

  struct ConstraintPlan {
    BoundTerm lhs;
    Comparator op = Comparator::Eq;
    BoundTerm rhs;
    std::size_t required_bound = 0;
    std::string text;  // for diagnostics
  };

  std::vector<std::string> variable_order;
  std::vector<AtomPlan> atoms;
  std::vector<NegatedPlan> negated;
  std::vector<ConstraintPlan> constraints;

  std::size_t variable_count() const { return variable_order.size(); }
  std::size_t variable_index(const std::string& name) const;
};

/// Deterministic plan for a rule that passed safety checks.
JoinPlan plan(const Rule& rule);

/// Tries for one evaluation, aligned with the plan: positive[i] must carry
/// plan.atoms[i].trie_order, negated[i] plan.negated[i].trie_order.
struct JoinInputs {
  std::vector<const Trie*> positive;
  std::vector<const Trie*> negated;
};

using WarnFn = std::function<void(const std::string&)>;

/// Evaluates the body via leapfrog triejoin: returns the trie of variable
/// bindings (identity order over plan.variable_order) satisfying all positive
/// atoms, all constraints, and no negated atom. Negated atoms are applied as
/// anti-joins once all their variables are bound.
Trie leapfrog_join(const JoinPlan& plan, const JoinInputs& inputs,
                   const Dictionary& dict, const WarnFn& warn = {});

/// Comparison built-in semantics: Integer and Double compare numerically
/// (cross-sort allowed); equality elsewhere is value identity; ordering on
/// non-numeric or mixed non-numeric operands is false and sets *type_error.
bool evaluate_constraint(Comparator op, const DataValue& lhs,
                         const DataValue& rhs, bool* type_error = nullptr);

}  // namespace strata
