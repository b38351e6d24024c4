#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "strata/dictionary.hpp"
#include "strata/errors.hpp"

namespace strata {

/// One attribute level of a trie: the sorted data column plus interval
/// markers into the child layer. child_starts has one entry per node plus a
/// sentinel, so node i owns children [child_starts[i], child_starts[i+1]).
/// The deepest layer has no child_starts.
struct TrieLayer {
  std::vector<ValueId> data;
  std::vector<std::size_t> child_starts;

  bool operator==(const TrieLayer&) const = default;
};

/// Immutable columnar trie over dictionary ids, sorted by a chosen attribute
/// order. Tuples enumerate in strictly increasing lexicographic id order; the
/// engine keeps id order aligned with the value-model total order.
///
/// Sealed after construction; set operations produce new tries. Safe for any
/// number of concurrent readers.
class Trie {
 public:
  /// Empty relation of the given arity under the identity order.
  explicit Trie(std::size_t arity);

  /// Builds from a multiset of equal-arity rows: rows are reordered by
  /// `order` (stored row k = input row order[k]), sorted, and deduplicated.
  /// Throws on arity mismatches or a malformed permutation.
  static Trie from_tuples(const std::vector<std::vector<ValueId>>& rows,
                          std::vector<std::size_t> order);

  /// Same relation re-materialised under another attribute order. `new_order`
  /// permutes the logical attributes, as in from_tuples.
  Trie reordered(std::vector<std::size_t> new_order) const;

  std::size_t arity() const { return order_.size(); }
  std::size_t row_count() const { return row_count_; }
  bool empty() const { return row_count_ == 0; }
  const std::vector<std::size_t>& order() const { return order_; }
  const TrieLayer& layer(std::size_t level) const { return layers_[level]; }

  /// All rows in enumeration order (stored, i.e. reordered, attribute
  /// positions).
  std::vector<std::vector<ValueId>> enumerate() const;

  /// Membership test for a stored-order row.
  bool contains(std::span<const ValueId> row) const;

  bool operator==(const Trie&) const = default;

 private:
  friend class TrieBuilder;
  friend class RowCursor;
  friend class TrieIterator;

  std::vector<std::size_t> order_;
  std::vector<TrieLayer> layers_;
  std::size_t row_count_ = 0;
};

/// Assembles a trie from rows pushed in strictly increasing order.
class TrieBuilder {
 public:
  TrieBuilder(std::size_t arity, std::vector<std::size_t> order);

  void push(std::span<const ValueId> row);
  Trie finish();

 private:
  Trie trie_;
  std::vector<ValueId> previous_;
  bool have_previous_ = false;
};

/// Streams rows of a trie in enumeration order.
class RowCursor {
 public:
  explicit RowCursor(const Trie& trie);

  /// Fills `row` with the next tuple; false when exhausted.
  bool next(std::vector<ValueId>& row);

 private:
  const Trie* trie_;
  std::vector<std::size_t> pos_;
  bool done_ = false;
  bool started_ = false;
  bool emitted_empty_row_ = false;
};

/// Linear-merge set union; operands need equal arity and attribute order.
Trie trie_union(const Trie& a, const Trie& b);

/// Rows of `a` not present in `b`; equal arity and order required.
Trie trie_difference(const Trie& a, const Trie& b);

/// Structural invariants: intervals partition each child layer exactly and
/// data is strictly increasing within every parent interval.
bool validate_structure(const Trie& trie);

/// Navigates one trie level at a time with monotone seeks; the iterator
/// contract used by the leapfrog join. Single-threaded use.
class TrieIterator {
 public:
  explicit TrieIterator(const Trie& trie);

  /// Current level; -1 is the virtual root above level 0.
  int level() const { return level_; }

  bool at_end() const;
  ValueId key() const;

  /// Descends into the child interval of the current node and positions at
  /// its first key. From the root this opens level 0.
  void open();

  /// Ascends one level, back to the position the caller descended from.
  void up();

  /// Advances within the current interval; no-op once at the end.
  void next();

  /// Moves to the least key >= v within the current interval (galloping
  /// search, amortised linear over a level sweep).
  void seek(ValueId v);

 private:
  const Trie* trie_;
  int level_ = -1;
  std::vector<std::size_t> pos_;
  std::vector<std::size_t> hi_;
};

}  // namespace strata
