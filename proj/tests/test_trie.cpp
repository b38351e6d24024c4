#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "strata/trie.hpp"

using namespace strata;

namespace {

using Rows = std::vector<std::vector<ValueId>>;

Rows sorted_unique(Rows rows) {
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  return rows;
}

Rows reorder_rows(const Rows& rows, const std::vector<std::size_t>& order) {
  Rows out;
  for (const auto& row : rows) {
    std::vector<ValueId> r(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) r[k] = row[order[k]];
    out.push_back(std::move(r));
  }
  return out;
}

Rows random_rows(std::mt19937_64& rng, std::size_t count, std::size_t arity,
                 ValueId domain) {
  Rows rows;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<ValueId> row(arity);
    for (auto& v : row) v = rng() % domain;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

TEST_CASE("construction dedups and shares prefixes") {
  Trie t = Trie::from_tuples({{1, 2}, {1, 2}, {1, 3}}, {0, 1});
  CHECK(t.row_count() == 2);
  CHECK(t.layer(0).data == std::vector<ValueId>{1});
  CHECK(t.layer(1).data == std::vector<ValueId>{2, 3});
  CHECK(t.layer(0).child_starts == std::vector<std::size_t>{0, 2});
  CHECK(validate_structure(t));
}

TEST_CASE("empty construction") {
  Trie t = Trie::from_tuples({}, {0, 1, 2});
  CHECK(t.row_count() == 0);
  CHECK(t.enumerate().empty());
  CHECK(validate_structure(t));
  CHECK(t == Trie(3));
}

TEST_CASE("arity errors are rejected") {
  CHECK_THROWS_AS(Trie::from_tuples({{1, 2}, {1}}, {0, 1}), Error);
  CHECK_THROWS_AS(Trie::from_tuples({{1}}, {0, 0}), Error);
}

TEST_CASE("enumeration equals reference sort under a permuted order") {
  std::mt19937_64 rng(101);
  Rows rows = random_rows(rng, 100, 3, 9);
  std::vector<std::size_t> order = {2, 0, 1};
  Trie t = Trie::from_tuples(rows, order);
  CHECK(t.enumerate() == sorted_unique(reorder_rows(rows, order)));
  CHECK(validate_structure(t));
}

TEST_CASE("interval scans of a level concatenate to the child column") {
  std::mt19937_64 rng(102);
  Rows rows = random_rows(rng, 80, 3, 6);
  Trie t = Trie::from_tuples(rows, {0, 1, 2});
  for (std::size_t level = 0; level + 1 < t.arity(); ++level) {
    std::vector<ValueId> concatenated;
    const TrieLayer& layer = t.layer(level);
    for (std::size_t node = 0; node + 1 < layer.child_starts.size(); ++node) {
      for (std::size_t i = layer.child_starts[node];
           i < layer.child_starts[node + 1]; ++i) {
        concatenated.push_back(t.layer(level + 1).data[i]);
      }
    }
    CHECK(concatenated == t.layer(level + 1).data);
  }
}

TEST_CASE("rebuilding from enumeration is the identity") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 50; ++trial) {
    Rows rows = random_rows(rng, rng() % 60, 1 + rng() % 4, 5);
    std::size_t arity = rows.empty() ? 2 : rows[0].size();
    std::vector<std::size_t> order(arity);
    for (std::size_t i = 0; i < arity; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Trie t = Trie::from_tuples(rows, order);
    TrieBuilder rebuild(arity, order);
    for (const auto& row : t.enumerate()) rebuild.push(row);
    CHECK(rebuild.finish() == t);
  }
}

TEST_CASE("union and difference match set oracles") {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t arity = 1 + rng() % 3;
    std::vector<std::size_t> identity(arity);
    for (std::size_t i = 0; i < arity; ++i) identity[i] = i;
    Rows a_rows = random_rows(rng, rng() % 40, arity, 5);
    Rows b_rows = random_rows(rng, rng() % 40, arity, 5);
    Trie a = Trie::from_tuples(a_rows, identity);
    Trie b = Trie::from_tuples(b_rows, identity);

    std::set<std::vector<ValueId>> sa(a_rows.begin(), a_rows.end());
    std::set<std::vector<ValueId>> sb(b_rows.begin(), b_rows.end());
    std::set<std::vector<ValueId>> expected_union = sa;
    expected_union.insert(sb.begin(), sb.end());
    std::set<std::vector<ValueId>> expected_diff;
    for (const auto& row : sa) {
      if (!sb.count(row)) expected_diff.insert(row);
    }

    Trie u = trie_union(a, b);
    Trie d = trie_difference(a, b);
    CHECK(Rows(expected_union.begin(), expected_union.end()) == u.enumerate());
    CHECK(Rows(expected_diff.begin(), expected_diff.end()) == d.enumerate());
    CHECK(validate_structure(u));
    CHECK(validate_structure(d));

    // |a| = |a ∖ b| + |a ∩ b| and |a ∪ b| = |a| + |b| − |a ∩ b|.
    std::size_t intersection = a.row_count() - d.row_count();
    CHECK(u.row_count() == a.row_count() + b.row_count() - intersection);

    CHECK(trie_difference(a, a).empty());
    CHECK(trie_difference(a, Trie(arity)) == a);
    CHECK(trie_union(a, Trie(arity)) == a);
    CHECK(trie_union(a, a) == a);
  }
}

TEST_CASE("set operations reject mismatched operands") {
  Trie a = Trie::from_tuples({{1, 2}}, {0, 1});
  Trie b = Trie::from_tuples({{1, 2}}, {1, 0});
  CHECK_THROWS_AS(trie_union(a, b), Error);
  CHECK_THROWS_AS(trie_difference(a, b), Error);
  CHECK_THROWS_AS(trie_union(a, Trie(3)), Error);
}

TEST_CASE("reordering preserves the logical relation") {
  std::mt19937_64 rng(105);
  Rows rows = random_rows(rng, 60, 3, 7);
  Trie identity = Trie::from_tuples(rows, {0, 1, 2});
  Trie reordered = identity.reordered({2, 0, 1});
  CHECK(reordered.enumerate() == sorted_unique(reorder_rows(rows, {2, 0, 1})));
  CHECK(reordered.reordered({0, 1, 2}).enumerate() ==
        identity.enumerate());
}

TEST_CASE("contains checks membership") {
  Trie t = Trie::from_tuples({{1, 2}, {1, 3}, {4, 0}}, {0, 1});
  std::vector<ValueId> yes{1, 3};
  std::vector<ValueId> no{2, 2};
  CHECK(t.contains(yes));
  CHECK(!t.contains(no));
}

TEST_CASE("iterator seeks are monotone and at_end is stable") {
  std::mt19937_64 rng(106);
  for (int trial = 0; trial < 50; ++trial) {
    Rows rows = random_rows(rng, 1 + rng() % 50, 2, 12);
    Trie t = Trie::from_tuples(rows, {0, 1});
    TrieIterator it(t);
    it.open();
    ValueId last = 0;
    bool first = true;
    while (!it.at_end()) {
      ValueId target = rng() % 14;
      it.seek(target);
      if (it.at_end()) break;
      CHECK(it.key() >= target);
      if (!first) CHECK(it.key() >= last);
      last = it.key();
      first = false;
      // Descend into level 1 and sweep it.
      it.open();
      ValueId prev = 0;
      bool started = false;
      while (!it.at_end()) {
        if (started) CHECK(it.key() > prev);
        prev = it.key();
        started = true;
        it.next();
      }
      it.next();  // stability at the end
      CHECK(it.at_end());
      it.up();
      it.next();
    }
    it.next();
    CHECK(it.at_end());
  }
}

TEST_CASE("zero-arity tries represent booleans") {
  Trie empty(0);
  CHECK(empty.row_count() == 0);
  TrieBuilder builder(0, {});
  builder.push(std::vector<ValueId>{});
  Trie unit = builder.finish();
  CHECK(unit.row_count() == 1);
  auto rows = unit.enumerate();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].empty());
}
