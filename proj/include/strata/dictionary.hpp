#pragma once

#include <cstdint>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "strata/value.hpp"

namespace strata {

using ValueId = std::uint64_t;

/// Maps ground values to dense integer ids, assigned in first-seen order
/// starting at 0, with the reverse map for resolution.
///
/// One writer at a time; reads may proceed concurrently with each other but
/// not with a write.
class Dictionary {
 public:
  Dictionary() = default;

  Dictionary(const Dictionary& other);
  Dictionary& operator=(const Dictionary& other);
  Dictionary(Dictionary&& other) noexcept;
  Dictionary& operator=(Dictionary&& other) noexcept;

  /// Returns the existing id if the value was seen before, otherwise the next
  /// unused id. Idempotent.
  ValueId intern(const DataValue& value);

  /// Returns exactly the interned value; throws UnknownIdError for ids never
  /// assigned.
  DataValue resolve(ValueId id) const;

  /// Looks up without interning.
  std::optional<ValueId> find(const DataValue& value) const;

  std::size_t size() const;

 private:
  mutable std::shared_mutex mutex_;
  std::vector<DataValue> values_;
  std::unordered_map<DataValue, ValueId, DataValueHash> ids_;
};

/// Builds a dictionary holding the same values re-interned in ascending value
/// order, so that id order and value order agree. remap[old_id] = new_id.
///
/// The engine runs this once after loading, before any trie is built; nulls
/// minted later sort after every existing value and receive increasing ids,
/// so the agreement is preserved for the whole materialisation.
Dictionary rank_by_value(const Dictionary& dict, std::vector<ValueId>& remap);

}  // namespace strata
