#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "strata/ast.hpp"
#include "strata/dictionary.hpp"
#include "strata/join.hpp"
#include "strata/stratify.hpp"
#include "strata/trie.hpp"

namespace strata {

struct Limits {
  std::uint64_t max_facts = 1'000'000'000;
  std::uint64_t max_iterations = 1'000'000;
  std::optional<double> timeout_seconds;
};

/// Loaded input database: interned tuples per predicate. Tuples may use any
/// intern order; materialise re-ranks the dictionary before building tries.
struct FactBase {
  Dictionary dict;
  std::map<std::string, std::size_t> arities;
  std::map<std::string, std::vector<std::vector<ValueId>>> tuples;
  std::uint64_t null_counter = 0;

  void add(const std::string& predicate, std::vector<ValueId> row);
};

/// Final state of one materialisation: per-predicate full and delta tries
/// (deltas are empty at a completed fixpoint), the fresh-null counter, the
/// iteration index, and per-stratum completion flags.
struct ChaseState {
  struct Relation {
    std::size_t arity = 0;
    Trie full{0};
    Trie delta{0};
    std::size_t input_rows = 0;
  };

  Dictionary dict;
  std::map<std::string, Relation> relations;
  std::uint64_t null_counter = 0;
  std::uint64_t iterations = 0;
  std::vector<bool> stratum_done;
};

struct ExecutionReport {
  std::chrono::milliseconds load_time{0};  // filled by the loading caller
  std::chrono::milliseconds reasoning_time{0};
  std::vector<std::chrono::milliseconds> stratum_times;
  std::map<std::string, std::uint64_t> derived_counts;
  std::uint64_t chase_applications = 0;
  std::uint64_t nulls_minted = 0;
  std::uint64_t iterations = 0;
};

struct MaterialisationResult {
  ChaseState state;
  ExecutionReport report;
};

/// Runs the full materialisation: strata in order, semi-naive fixpoint per
/// stratum, existential rules applied with the restricted chase on fresh
/// bindings only. Deterministic: rules fire in textual order per iteration
/// and bindings are processed in trie enumeration order.
///
/// Throws StratificationError, LimitError, or Error on malformed input.
MaterialisationResult materialise(const Program& program, FactBase base,
                                  const Limits& limits = {},
                                  const WarnFn& warn = {});

/// Rebuilds an input database from a finished state, e.g. to re-run a
/// program over its own output.
FactBase fact_base_from_state(const ChaseState& state);

}  // namespace strata
