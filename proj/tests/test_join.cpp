#include <doctest.h>

#include <deque>

#include "helpers.hpp"
#include "strata/join.hpp"
#include "strata/parser.hpp"

using namespace strata;
using namespace strata::testing;

namespace {

// Runs one rule body through the engine path: dictionary, per-atom tries in
// the plan's orders, leapfrog join; bindings resolved back to values.
struct JoinHarness {
  Dictionary dict;
  std::deque<Trie> storage;
  JoinPlan jp;
  Trie result{0};

  JoinHarness(const Rule& rule, const Database& db) : jp(plan(rule)) {
    std::map<std::string, std::vector<std::vector<ValueId>>> ids;
    for (const auto& [pred, rows] : db) {
      for (const Row& row : rows) {
        std::vector<ValueId> r;
        r.reserve(row.size());
        for (const DataValue& v : row) r.push_back(dict.intern(v));
        ids[pred].push_back(std::move(r));
      }
    }
    JoinInputs inputs;
    for (const auto& ap : jp.atoms) {
      storage.push_back(Trie::from_tuples(ids[ap.predicate], ap.trie_order));
      inputs.positive.push_back(&storage.back());
    }
    for (const auto& np : jp.negated) {
      storage.push_back(Trie::from_tuples(ids[np.predicate], np.trie_order));
      inputs.negated.push_back(&storage.back());
    }
    result = leapfrog_join(jp, inputs, dict);
  }

  RowSet binding_rows() const { return rows_of(result, dict); }
};

RowSet oracle_rows(const Rule& rule, const Database& db,
                   const std::vector<std::string>& variable_order) {
  RowSet rows;
  for (const Environment& env : oracle_bindings(rule, db)) {
    Row row;
    row.reserve(variable_order.size());
    for (const std::string& v : variable_order) row.push_back(env.at(v));
    rows.insert(std::move(row));
  }
  return rows;
}

Rule parse_single_rule(const std::string& text) {
  Program p = parse_program_unchecked(text);
  REQUIRE(p.rules.size() == 1);
  return p.rules[0];
}

}  // namespace

TEST_CASE("plan orders the shared variable first in the lime recursion") {
  Rule rule = parse_single_rule(
      "lime(?id, ?name) :- taxon(?id, ?name, ?parentId), "
      "lime(?parentId, ?parentName) .");
  JoinPlan jp = plan(rule);
  REQUIRE(jp.variable_order.size() == 4);
  CHECK(jp.variable_order[0] == "parentId");
  std::size_t id_pos = jp.variable_index("id");
  std::size_t name_pos = jp.variable_index("name");
  CHECK(id_pos > 0);
  CHECK(name_pos > 0);
}

TEST_CASE("single-atom bodies keep the atom's variable order") {
  Rule rule = parse_single_rule("p(?a,?b) :- q(?b,?a) .");
  JoinPlan jp = plan(rule);
  CHECK(jp.variable_order == std::vector<std::string>{"b", "a"});
  REQUIRE(jp.atoms.size() == 1);
  CHECK(jp.atoms[0].trie_order == std::vector<std::size_t>{0, 1});
}

TEST_CASE("permuting body atoms yields an identical plan and result") {
  Rule rule = parse_single_rule(
      "out(?x,?y,?z) :- r(?x,?y), s(?y,?z), t(?z,?x) .");
  Rule permuted = rule;
  std::swap(permuted.body_positive[0], permuted.body_positive[2]);
  std::swap(permuted.body_positive[0], permuted.body_positive[1]);

  JoinPlan a = plan(rule);
  JoinPlan b = plan(permuted);
  CHECK(a.variable_order == b.variable_order);
  REQUIRE(a.atoms.size() == b.atoms.size());
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    CHECK(a.atoms[i].predicate == b.atoms[i].predicate);
    CHECK(a.atoms[i].trie_order == b.atoms[i].trie_order);
  }

  Database db;
  Rng rng(555);
  for (const char* pred : {"r", "s", "t"}) {
    for (int i = 0; i < 30; ++i) {
      db[pred].insert(Row{DataValue::integer(static_cast<std::int64_t>(
                              pick(rng, 5))),
                          DataValue::integer(static_cast<std::int64_t>(
                              pick(rng, 5)))});
    }
  }
  JoinHarness ha(rule, db);
  JoinHarness hb(permuted, db);
  CHECK(ha.result == hb.result);  // bit-identical binding tries
}

TEST_CASE("two-atom join matches the worked example") {
  Rule rule = parse_single_rule("p(?x,?y,?z) :- r(?x,?y), s(?y,?z) .");
  Database db;
  db["r"] = {Row{DataValue::integer(1), DataValue::integer(2)},
             Row{DataValue::integer(2), DataValue::integer(3)}};
  db["s"] = {Row{DataValue::integer(2), DataValue::integer(4)}};
  JoinHarness h(rule, db);
  CHECK(h.binding_rows() == oracle_rows(rule, db, h.jp.variable_order));
  REQUIRE(h.result.row_count() == 1);
  // The single binding is x=1, y=2, z=4.
  Environment expected{{"x", DataValue::integer(1)},
                       {"y", DataValue::integer(2)},
                       {"z", DataValue::integer(4)}};
  Row row;
  for (const auto& v : h.jp.variable_order) row.push_back(expected.at(v));
  CHECK(h.binding_rows().count(row) == 1);
}

TEST_CASE("an unsatisfiable constraint empties the result") {
  Rule rule = parse_single_rule("p(?x) :- q(?x), ?x > ?x .");
  Database db;
  db["q"] = {Row{DataValue::integer(1)}, Row{DataValue::integer(2)}};
  JoinHarness h(rule, db);
  CHECK(h.result.empty());
}

TEST_CASE("negated atoms prune as anti-joins") {
  Rule rule = parse_single_rule("p(?x) :- q(?x), ~r(?x) .");
  Database db;
  db["q"] = {Row{DataValue::integer(1)}, Row{DataValue::integer(2)},
             Row{DataValue::integer(3)}};
  db["r"] = {Row{DataValue::integer(2)}};
  JoinHarness h(rule, db);
  CHECK(h.binding_rows() == oracle_rows(rule, db, h.jp.variable_order));
  CHECK(h.result.row_count() == 2);
}

TEST_CASE("repeated variables within an atom require equal columns") {
  Rule rule = parse_single_rule("p(?x) :- q(?x,?x) .");
  Database db;
  db["q"] = {Row{DataValue::integer(1), DataValue::integer(1)},
             Row{DataValue::integer(1), DataValue::integer(2)},
             Row{DataValue::integer(3), DataValue::integer(3)}};
  JoinHarness h(rule, db);
  CHECK(h.binding_rows() == oracle_rows(rule, db, h.jp.variable_order));
  CHECK(h.result.row_count() == 2);
}

TEST_CASE("constants act as seeks") {
  Rule rule = parse_single_rule("p(?x) :- q(7,?x), r(?x,\"tag\") .");
  Database db;
  db["q"] = {Row{DataValue::integer(7), DataValue::integer(1)},
             Row{DataValue::integer(8), DataValue::integer(2)}};
  db["r"] = {Row{DataValue::integer(1), DataValue::string("tag")},
             Row{DataValue::integer(2), DataValue::string("tag")},
             Row{DataValue::integer(1), DataValue::string("other")}};
  JoinHarness h(rule, db);
  CHECK(h.binding_rows() == oracle_rows(rule, db, h.jp.variable_order));
  CHECK(h.result.row_count() == 1);

  // A constant absent from the data empties the join.
  Rule absent = parse_single_rule("p(?x) :- q(99,?x) .");
  JoinHarness h2(absent, db);
  CHECK(h2.result.empty());
}

TEST_CASE("constraint built-in semantics") {
  CHECK(evaluate_constraint(Comparator::Gt, DataValue::integer(337),
                            DataValue::integer(200)));
  CHECK(evaluate_constraint(Comparator::Lt, DataValue::integer(2),
                            DataValue::real(2.5)));
  bool type_error = false;
  CHECK(!evaluate_constraint(Comparator::Gt, DataValue::string("a"),
                             DataValue::integer(1), &type_error));
  CHECK(type_error);

  // Equality is numeric across Integer/Double, identity elsewhere.
  CHECK(evaluate_constraint(Comparator::Eq, DataValue::integer(2),
                            DataValue::real(2.0)));
  CHECK(!evaluate_constraint(Comparator::Eq, DataValue::string("2"),
                             DataValue::integer(2)));
  CHECK(evaluate_constraint(Comparator::Neq, DataValue::string("2"),
                            DataValue::integer(2)));
  // Large integers compare exactly.
  CHECK(evaluate_constraint(Comparator::Gt,
                            DataValue::integer((1LL << 62) + 1),
                            DataValue::integer(1LL << 62)));
}

TEST_CASE("type-error warnings fire once per constraint") {
  Rule rule = parse_single_rule("p(?x) :- q(?x), ?x > 1 .");
  Database db;
  db["q"] = {Row{DataValue::string("a")}, Row{DataValue::string("b")},
             Row{DataValue::integer(5)}};
  Dictionary dict;
  std::map<std::string, std::vector<std::vector<ValueId>>> ids;
  for (const Row& row : db["q"]) {
    ids["q"].push_back({dict.intern(row[0])});
  }
  JoinPlan jp = plan(rule);
  Trie q = Trie::from_tuples(ids["q"], jp.atoms[0].trie_order);
  JoinInputs inputs;
  inputs.positive.push_back(&q);
  int warnings = 0;
  Trie result = leapfrog_join(jp, inputs, dict,
                              [&warnings](const std::string&) { ++warnings; });
  CHECK(warnings == 1);
  CHECK(result.row_count() == 1);
}

TEST_CASE("random bodies agree with the nested-loop oracle") {
  Rng rng(123456);
  for (int trial = 0; trial < 300; ++trial) {
    RandomJoinCase c = random_join_case(rng);
    JoinHarness h(c.rule, c.db);
    RowSet expected = oracle_rows(c.rule, c.db, h.jp.variable_order);
    RowSet actual = h.binding_rows();
    if (actual != expected) {
      CAPTURE(c.rule.to_string());
      CHECK(actual == expected);
      return;
    }
    CHECK(validate_structure(h.result));
  }
}
