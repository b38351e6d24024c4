#include "strata/trie.hpp"

#include <algorithm>

namespace strata {

namespace {

void check_permutation(const std::vector<std::size_t>& order,
                       std::size_t arity) {
  if (order.size() != arity) {
    throw Error("attribute order size does not match arity");
  }
  std::vector<bool> seen(arity, false);
  for (std::size_t p : order) {
    if (p >= arity || seen[p]) {
      throw Error("attribute order is not a permutation");
    }
    seen[p] = true;
  }
}

void check_compatible(const Trie& a, const Trie& b) {
  if (a.arity() != b.arity()) {
    throw Error("trie arity mismatch");
  }
  if (a.order() != b.order()) {
    throw Error("trie attribute order mismatch");
  }
}

}  // namespace

Trie::Trie(std::size_t arity) : layers_(arity) {
  order_.resize(arity);
  for (std::size_t i = 0; i < arity; ++i) order_[i] = i;
  // Same shape an empty build produces: sentinel-only interval markers.
  for (std::size_t k = 0; k + 1 < arity; ++k) {
    layers_[k].child_starts.push_back(0);
  }
}

TrieBuilder::TrieBuilder(std::size_t arity, std::vector<std::size_t> order)
    : trie_(arity) {
  check_permutation(order, arity);
  trie_.order_ = std::move(order);
  for (auto& layer : trie_.layers_) layer.child_starts.clear();
}

void TrieBuilder::push(std::span<const ValueId> row) {
  const std::size_t arity = trie_.arity();
  if (row.size() != arity) {
    throw Error("row arity mismatch in trie builder");
  }
  if (arity == 0) {
    trie_.row_count_ = 1;
    return;
  }
  std::size_t diverge = 0;
  if (have_previous_) {
    while (diverge < arity && previous_[diverge] == row[diverge]) ++diverge;
    if (diverge == arity || row[diverge] < previous_[diverge]) {
      throw Error("trie builder rows must be strictly increasing");
    }
  }
  for (std::size_t k = diverge; k < arity; ++k) {
    TrieLayer& layer = trie_.layers_[k];
    layer.data.push_back(row[k]);
    if (k + 1 < arity) {
      // The node's child interval begins where the child layer currently
      // ends; its children are appended right after.
      layer.child_starts.push_back(trie_.layers_[k + 1].data.size());
    }
  }
  previous_.assign(row.begin(), row.end());
  have_previous_ = true;
  ++trie_.row_count_;
}

Trie TrieBuilder::finish() {
  for (std::size_t k = 0; k + 1 < trie_.arity(); ++k) {
    trie_.layers_[k].child_starts.push_back(trie_.layers_[k + 1].data.size());
  }
  return std::move(trie_);
}

Trie Trie::from_tuples(const std::vector<std::vector<ValueId>>& rows,
                       std::vector<std::size_t> order) {
  const std::size_t arity = order.size();
  for (const auto& row : rows) {
    if (row.size() != arity) {
      throw Error("row arity mismatch: expected " + std::to_string(arity) +
                  ", found " + std::to_string(row.size()));
    }
  }
  std::vector<std::vector<ValueId>> stored;
  stored.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<ValueId> s(arity);
    for (std::size_t k = 0; k < arity; ++k) s[k] = row[order[k]];
    stored.push_back(std::move(s));
  }
  std::sort(stored.begin(), stored.end());
  stored.erase(std::unique(stored.begin(), stored.end()), stored.end());

  TrieBuilder builder(arity, std::move(order));
  for (const auto& row : stored) builder.push(row);
  return builder.finish();
}

Trie Trie::reordered(std::vector<std::size_t> new_order) const {
  const std::size_t a = arity();
  check_permutation(new_order, a);
  std::vector<std::vector<ValueId>> logical;
  logical.reserve(row_count_);
  RowCursor cursor(*this);
  std::vector<ValueId> stored(a);
  while (cursor.next(stored)) {
    std::vector<ValueId> row(a);
    for (std::size_t k = 0; k < a; ++k) row[order_[k]] = stored[k];
    logical.push_back(std::move(row));
  }
  return from_tuples(logical, std::move(new_order));
}

std::vector<std::vector<ValueId>> Trie::enumerate() const {
  std::vector<std::vector<ValueId>> out;
  out.reserve(row_count_);
  RowCursor cursor(*this);
  std::vector<ValueId> row(arity());
  while (cursor.next(row)) out.push_back(row);
  return out;
}

bool Trie::contains(std::span<const ValueId> row) const {
  if (row.size() != arity()) return false;
  if (arity() == 0) return row_count_ == 1;
  std::size_t lo = 0;
  std::size_t hi = layers_[0].data.size();
  for (std::size_t k = 0; k < arity(); ++k) {
    const auto& data = layers_[k].data;
    auto it = std::lower_bound(data.begin() + lo, data.begin() + hi, row[k]);
    if (it == data.begin() + hi || *it != row[k]) return false;
    std::size_t node = static_cast<std::size_t>(it - data.begin());
    if (k + 1 < arity()) {
      lo = layers_[k].child_starts[node];
      hi = layers_[k].child_starts[node + 1];
    }
  }
  return true;
}

RowCursor::RowCursor(const Trie& trie) : trie_(&trie) {
  pos_.assign(trie.arity(), 0);
  done_ = trie.row_count() == 0;
}

bool RowCursor::next(std::vector<ValueId>& row) {
  if (done_) return false;
  const std::size_t arity = trie_->arity();
  if (arity == 0) {
    if (emitted_empty_row_) return false;
    emitted_empty_row_ = true;
    row.clear();
    return true;
  }
  row.resize(arity);
  if (!started_) {
    started_ = true;
  } else {
    // Advance at the deepest level; on interval exhaustion carry upward.
    std::size_t level = arity;
    while (level > 0) {
      --level;
      std::size_t next_pos = pos_[level] + 1;
      std::size_t limit =
          level == 0 ? trie_->layers_[0].data.size()
                     : trie_->layers_[level - 1].child_starts[pos_[level - 1] + 1];
      if (next_pos < limit) {
        pos_[level] = next_pos;
        for (std::size_t k = level + 1; k < arity; ++k) {
          pos_[k] = trie_->layers_[k - 1].child_starts[pos_[k - 1]];
        }
        break;
      }
      if (level == 0) {
        done_ = true;
        return false;
      }
    }
  }
  for (std::size_t k = 0; k < arity; ++k) {
    row[k] = trie_->layers_[k].data[pos_[k]];
  }
  return true;
}

namespace {

// Shared by union/difference: linear merge of two sorted row streams.
template <typename OnBoth, typename OnA, typename OnB>
void merge_rows(const Trie& a, const Trie& b, OnBoth on_both, OnA on_a,
                OnB on_b) {
  RowCursor ca(a);
  RowCursor cb(b);
  std::vector<ValueId> ra;
  std::vector<ValueId> rb;
  bool has_a = ca.next(ra);
  bool has_b = cb.next(rb);
  while (has_a && has_b) {
    if (ra == rb) {
      on_both(ra);
      has_a = ca.next(ra);
      has_b = cb.next(rb);
    } else if (ra < rb) {
      on_a(ra);
      has_a = ca.next(ra);
    } else {
      on_b(rb);
      has_b = cb.next(rb);
    }
  }
  while (has_a) {
    on_a(ra);
    has_a = ca.next(ra);
  }
  while (has_b) {
    on_b(rb);
    has_b = cb.next(rb);
  }
}

}  // namespace

Trie trie_union(const Trie& a, const Trie& b) {
  check_compatible(a, b);
  TrieBuilder builder(a.arity(), a.order());
  auto take = [&builder](const std::vector<ValueId>& row) { builder.push(row); };
  merge_rows(a, b, take, take, take);
  return builder.finish();
}

Trie trie_difference(const Trie& a, const Trie& b) {
  check_compatible(a, b);
  TrieBuilder builder(a.arity(), a.order());
  merge_rows(
      a, b, [](const std::vector<ValueId>&) {},
      [&builder](const std::vector<ValueId>& row) { builder.push(row); },
      [](const std::vector<ValueId>&) {});
  return builder.finish();
}

bool validate_structure(const Trie& trie) {
  const std::size_t arity = trie.arity();
  if (arity == 0) return trie.row_count() <= 1;
  for (std::size_t k = 0; k < arity; ++k) {
    const TrieLayer& layer = trie.layer(k);
    if (k + 1 < arity) {
      if (layer.child_starts.size() != layer.data.size() + 1) return false;
      if (layer.child_starts.front() != 0) return false;
      if (layer.child_starts.back() != trie.layer(k + 1).data.size()) {
        return false;
      }
      for (std::size_t i = 0; i + 1 < layer.child_starts.size(); ++i) {
        // Every node owns a non-empty, non-overlapping child interval.
        if (layer.child_starts[i] >= layer.child_starts[i + 1]) return false;
      }
    } else {
      if (!layer.child_starts.empty()) return false;
      if (layer.data.size() != trie.row_count()) return false;
    }
    // Strict increase within each parent interval.
    if (k == 0) {
      for (std::size_t i = 0; i + 1 < layer.data.size(); ++i) {
        if (layer.data[i] >= layer.data[i + 1]) return false;
      }
    } else {
      const TrieLayer& parent = trie.layer(k - 1);
      for (std::size_t n = 0; n + 1 < parent.child_starts.size(); ++n) {
        for (std::size_t i = parent.child_starts[n];
             i + 1 < parent.child_starts[n + 1]; ++i) {
          if (layer.data[i] >= layer.data[i + 1]) return false;
        }
      }
    }
  }
  return true;
}

TrieIterator::TrieIterator(const Trie& trie) : trie_(&trie) {
  pos_.assign(trie.arity(), 0);
  hi_.assign(trie.arity(), 0);
}

bool TrieIterator::at_end() const {
  if (level_ < 0) return false;
  return pos_[level_] >= hi_[level_];
}

ValueId TrieIterator::key() const {
  return trie_->layers_[level_].data[pos_[level_]];
}

void TrieIterator::open() {
  if (level_ < 0) {
    pos_[0] = 0;
    hi_[0] = trie_->layers_[0].data.size();
    level_ = 0;
    return;
  }
  const TrieLayer& layer = trie_->layers_[level_];
  std::size_t node = pos_[level_];
  pos_[level_ + 1] = layer.child_starts[node];
  hi_[level_ + 1] = layer.child_starts[node + 1];
  ++level_;
}

void TrieIterator::up() { --level_; }

void TrieIterator::next() {
  if (at_end()) return;
  ++pos_[level_];
}

void TrieIterator::seek(ValueId v) {
  if (at_end()) return;
  const std::vector<ValueId>& data = trie_->layers_[level_].data;
  std::size_t p = pos_[level_];
  std::size_t hi = hi_[level_];
  if (data[p] >= v) return;
  // Gallop forward, then binary search the bracketed window.
  std::size_t step = 1;
  std::size_t below = p;
  while (p + step < hi && data[p + step] < v) {
    below = p + step;
    step <<= 1;
  }
  std::size_t window_end = std::min(p + step + 1, hi);
  pos_[level_] = static_cast<std::size_t>(
      std::lower_bound(data.begin() + below + 1, data.begin() + window_end, v) -
      data.begin());
}

}  // namespace strata
