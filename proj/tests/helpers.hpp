// Shared test utilities: deterministic random generators for values, facts,
// and programs, plus conversions between engine state and oracle databases.
#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <unistd.h>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "strata/reasoner.hpp"
#include "strata/trie.hpp"

namespace strata::testing {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("strata-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const {
    return path_ / name;
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path,
                       const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t bound) {
  return std::uniform_int_distribution<std::size_t>(0, bound - 1)(rng);
}

inline DataValue random_value(Rng& rng) {
  switch (pick(rng, 6)) {
    case 0:
      return DataValue::iri("http://example.org/e" +
                            std::to_string(pick(rng, 1000)));
    case 1: {
      std::string s;
      std::size_t len = pick(rng, 12);
      for (std::size_t i = 0; i < len; ++i) {
        s += static_cast<char>('a' + pick(rng, 26));
      }
      return DataValue::string(s);
    }
    case 2:
      return DataValue::lang_string(pick(rng, 2) ? "en" : "de",
                                    "w" + std::to_string(pick(rng, 100)));
    case 3:
      return DataValue::integer(static_cast<std::int64_t>(pick(rng, 2000)) -
                                1000);
    case 4: {
      std::uniform_real_distribution<double> dist(-100.0, 100.0);
      return DataValue::real(dist(rng));
    }
    default:
      return DataValue::null(pick(rng, 64));
  }
}

inline DataValue random_input_value(Rng& rng) {
  DataValue v = random_value(rng);
  while (v.sort() == ValueSort::Null) v = random_value(rng);
  return v;
}

/// Rows of one relation resolved back to values, as an oracle row set.
inline RowSet rows_of(const Trie& trie, const Dictionary& dict) {
  RowSet rows;
  RowCursor cursor(trie);
  std::vector<ValueId> ids;
  while (cursor.next(ids)) {
    Row row;
    row.reserve(ids.size());
    for (ValueId id : ids) row.push_back(dict.resolve(id));
    rows.insert(std::move(row));
  }
  return rows;
}

inline Database database_of(const ChaseState& state) {
  Database db;
  for (const auto& [name, rel] : state.relations) {
    db[name] = rows_of(rel.full, state.dict);
  }
  return db;
}

/// EDB view of a program's explicit facts.
inline Database database_of_facts(const Program& program) {
  Database db;
  for (const Atom& fact : program.facts) {
    Row row;
    for (const Term& t : fact.terms) row.push_back(t.value());
    db[fact.predicate].insert(std::move(row));
  }
  return db;
}

struct RandomJoinCase {
  Rule rule;                 // body only; head is all body variables
  Database db;               // facts per predicate
  std::string description;
};

/// Random rule body over a small integer domain: up to `max_atoms` positive
/// atoms (arity 1..3) over up to 4 variables, optional safe negation and
/// constraints.
inline RandomJoinCase random_join_case(Rng& rng, std::size_t max_atoms = 5,
                                       std::size_t max_facts = 100) {
  RandomJoinCase out;
  const std::size_t domain = 2 + pick(rng, 7);
  const std::size_t var_count = 1 + pick(rng, 4);
  const std::vector<std::string> var_names = {"a", "b", "c", "d"};

  std::size_t predicates = 1 + pick(rng, 4);
  std::vector<std::size_t> arity(predicates);
  for (auto& a : arity) a = 1 + pick(rng, 3);

  auto random_term = [&](bool allow_constant) {
    if (allow_constant && pick(rng, 8) == 0) {
      return Term::constant(
          DataValue::integer(static_cast<std::int64_t>(pick(rng, domain))));
    }
    return Term::universal(var_names[pick(rng, var_count)]);
  };

  std::size_t atoms = 1 + pick(rng, max_atoms);
  for (std::size_t i = 0; i < atoms; ++i) {
    std::size_t p = pick(rng, predicates);
    Atom atom;
    atom.predicate = "p" + std::to_string(p);
    for (std::size_t k = 0; k < arity[p]; ++k) {
      atom.terms.push_back(random_term(true));
    }
    out.rule.body_positive.push_back(std::move(atom));
  }

  // Safe negation: negated atoms only over variables already positive.
  std::set<std::string> bound;
  for (const Atom& atom : out.rule.body_positive) {
    for (const Term& t : atom.terms) {
      if (t.is_variable()) bound.insert(t.name());
    }
  }
  std::vector<std::string> bound_list(bound.begin(), bound.end());
  if (pick(rng, 2) == 0) {
    std::size_t p = pick(rng, predicates);
    Atom atom;
    atom.predicate = "p" + std::to_string(p);
    bool ok = true;
    for (std::size_t k = 0; k < arity[p]; ++k) {
      if (pick(rng, 4) == 0) {
        atom.terms.push_back(Term::constant(
            DataValue::integer(static_cast<std::int64_t>(pick(rng, domain)))));
      } else if (!bound_list.empty()) {
        atom.terms.push_back(
            Term::universal(bound_list[pick(rng, bound_list.size())]));
      } else {
        ok = false;
        break;
      }
    }
    if (ok) out.rule.body_negative.push_back(std::move(atom));
  }

  if (pick(rng, 2) == 0 && !bound_list.empty()) {
    Term lhs = Term::universal(bound_list[pick(rng, bound_list.size())]);
    Term rhs = pick(rng, 2) == 0
                   ? Term::universal(bound_list[pick(rng, bound_list.size())])
                   : Term::constant(DataValue::integer(
                         static_cast<std::int64_t>(pick(rng, domain))));
    Comparator ops[] = {Comparator::Eq,  Comparator::Neq, Comparator::Lt,
                        Comparator::Leq, Comparator::Gt,  Comparator::Geq};
    out.rule.constraints.push_back(Constraint{lhs, ops[pick(rng, 6)], rhs});
  }

  // Head over every body variable keeps the rule safe.
  Atom head;
  head.predicate = "out";
  for (const std::string& v : bound_list) head.terms.push_back(Term::universal(v));
  if (head.terms.empty()) {
    head.terms.push_back(Term::constant(DataValue::integer(0)));
  }
  out.rule.head.push_back(std::move(head));

  std::size_t facts = pick(rng, max_facts + 1);
  for (std::size_t i = 0; i < facts; ++i) {
    std::size_t p = pick(rng, predicates);
    Row row;
    for (std::size_t k = 0; k < arity[p]; ++k) {
      row.push_back(
          DataValue::integer(static_cast<std::int64_t>(pick(rng, domain))));
    }
    out.db["p" + std::to_string(p)].insert(std::move(row));
  }
  for (std::size_t p = 0; p < predicates; ++p) {
    out.db.emplace("p" + std::to_string(p), RowSet{});
  }
  return out;
}

/// Random recursive non-existential program: EDB facts plus rules that may
/// recurse; negation only over EDB predicates, so stratification always
/// succeeds.
inline Program random_recursive_program(Rng& rng) {
  Program program;
  const std::size_t domain = 2 + pick(rng, 6);
  const std::size_t edb_count = 1 + pick(rng, 2);
  const std::size_t idb_count = 1 + pick(rng, 3);
  std::vector<std::string> edb, idb;
  std::vector<std::size_t> edb_arity, idb_arity;
  for (std::size_t i = 0; i < edb_count; ++i) {
    edb.push_back("e" + std::to_string(i));
    edb_arity.push_back(1 + pick(rng, 2));
  }
  for (std::size_t i = 0; i < idb_count; ++i) {
    idb.push_back("q" + std::to_string(i));
    idb_arity.push_back(1 + pick(rng, 2));
  }
  const std::vector<std::string> vars = {"x", "y", "z"};

  std::size_t fact_count = 1 + pick(rng, 40);
  for (std::size_t i = 0; i < fact_count; ++i) {
    std::size_t p = pick(rng, edb_count);
    Atom fact;
    fact.predicate = edb[p];
    for (std::size_t k = 0; k < edb_arity[p]; ++k) {
      fact.terms.push_back(Term::constant(
          DataValue::integer(static_cast<std::int64_t>(pick(rng, domain)))));
    }
    program.facts.push_back(std::move(fact));
  }

  std::size_t rule_count = 1 + pick(rng, 5);
  for (std::size_t r = 0; r < rule_count; ++r) {
    Rule rule;
    std::size_t body_atoms = 1 + pick(rng, 3);
    std::set<std::string> bound;
    for (std::size_t i = 0; i < body_atoms; ++i) {
      bool use_idb = pick(rng, 3) == 0;
      std::size_t p = use_idb ? pick(rng, idb_count) : pick(rng, edb_count);
      Atom atom;
      atom.predicate = use_idb ? idb[p] : edb[p];
      std::size_t arity = use_idb ? idb_arity[p] : edb_arity[p];
      for (std::size_t k = 0; k < arity; ++k) {
        std::string v = vars[pick(rng, vars.size())];
        bound.insert(v);
        atom.terms.push_back(Term::universal(v));
      }
      rule.body_positive.push_back(std::move(atom));
    }
    std::vector<std::string> bound_list(bound.begin(), bound.end());
    if (pick(rng, 3) == 0) {
      std::size_t p = pick(rng, edb_count);
      Atom atom;
      atom.predicate = edb[p];
      for (std::size_t k = 0; k < edb_arity[p]; ++k) {
        atom.terms.push_back(
            Term::universal(bound_list[pick(rng, bound_list.size())]));
      }
      rule.body_negative.push_back(std::move(atom));
    }
    if (pick(rng, 3) == 0) {
      Comparator ops[] = {Comparator::Neq, Comparator::Lt, Comparator::Leq};
      rule.constraints.push_back(Constraint{
          Term::universal(bound_list[pick(rng, bound_list.size())]),
          ops[pick(rng, 3)],
          Term::constant(DataValue::integer(
              static_cast<std::int64_t>(pick(rng, domain))))});
    }
    std::size_t h = pick(rng, idb_count);
    Atom head;
    head.predicate = idb[h];
    for (std::size_t k = 0; k < idb_arity[h]; ++k) {
      head.terms.push_back(
          Term::universal(bound_list[pick(rng, bound_list.size())]));
    }
    rule.head.push_back(std::move(head));
    program.rules.push_back(std::move(rule));
  }
  return program;
}

/// Random two-stratum program: stratum-1 predicates derived positively from
/// the EDB, stratum-2 rules may negate them.
inline Program random_two_stratum_program(Rng& rng) {
  Program program;
  const std::size_t domain = 2 + pick(rng, 5);
  const std::vector<std::string> vars = {"x", "y"};

  std::size_t fact_count = 2 + pick(rng, 25);
  for (std::size_t i = 0; i < fact_count; ++i) {
    Atom fact;
    fact.predicate = "e";
    fact.terms.push_back(Term::constant(
        DataValue::integer(static_cast<std::int64_t>(pick(rng, domain)))));
    fact.terms.push_back(Term::constant(
        DataValue::integer(static_cast<std::int64_t>(pick(rng, domain)))));
    program.facts.push_back(std::move(fact));
  }

  auto make_atom = [&](const std::string& pred, std::size_t arity,
                       std::set<std::string>* bound) {
    Atom atom;
    atom.predicate = pred;
    for (std::size_t k = 0; k < arity; ++k) {
      std::string v = vars[pick(rng, vars.size())];
      if (bound) bound->insert(v);
      atom.terms.push_back(Term::universal(v));
    }
    return atom;
  };

  // Stratum 1: one or two positive rules over e, possibly recursive.
  std::size_t lower_rules = 1 + pick(rng, 2);
  for (std::size_t r = 0; r < lower_rules; ++r) {
    Rule rule;
    std::set<std::string> bound;
    rule.body_positive.push_back(make_atom("e", 2, &bound));
    if (pick(rng, 2) == 0) {
      rule.body_positive.push_back(make_atom(pick(rng, 2) ? "low" : "e", 2,
                                             &bound));
    }
    std::vector<std::string> bound_list(bound.begin(), bound.end());
    Atom head;
    head.predicate = "low";
    head.terms.push_back(
        Term::universal(bound_list[pick(rng, bound_list.size())]));
    head.terms.push_back(
        Term::universal(bound_list[pick(rng, bound_list.size())]));
    rule.head.push_back(std::move(head));
    program.rules.push_back(std::move(rule));
  }

  // Stratum 2: rules negating the lower predicate.
  std::size_t upper_rules = 1 + pick(rng, 2);
  for (std::size_t r = 0; r < upper_rules; ++r) {
    Rule rule;
    std::set<std::string> bound;
    rule.body_positive.push_back(make_atom("e", 2, &bound));
    rule.body_negative.push_back(make_atom("low", 2, nullptr));
    // Keep negation safe: rebind its variables to positives.
    std::vector<std::string> bound_list(bound.begin(), bound.end());
    for (Term& t : rule.body_negative[0].terms) {
      t = Term::universal(bound_list[pick(rng, bound_list.size())]);
    }
    Atom head;
    head.predicate = "high";
    head.terms.push_back(
        Term::universal(bound_list[pick(rng, bound_list.size())]));
    rule.head.push_back(std::move(head));
    program.rules.push_back(std::move(rule));
  }
  return program;
}

}  // namespace strata::testing
