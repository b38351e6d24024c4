#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "strata/ast.hpp"
#include "strata/errors.hpp"

namespace strata {

/// Assignment of rules and predicates to evaluation layers: negated
/// dependencies point strictly downward, positive dependencies never point
/// up.
struct Stratification {
  std::vector<std::vector<std::size_t>> strata;  // rule indices, textual order
  std::map<std::string, std::size_t> predicate_stratum;

  std::size_t stratum_count() const { return strata.size(); }
};

/// Minimal stratification via iterative relaxation over the predicate
/// dependency graph. Head predicates of one rule share a stratum. Throws
/// StratificationError naming the offending predicate cycle when a negated
/// dependency is recursive.
Stratification stratify(const Program& program);

}  // namespace strata
