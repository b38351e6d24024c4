#include "strata/dictionary.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>

namespace strata {

Dictionary::Dictionary(const Dictionary& other) {
  std::shared_lock lock(other.mutex_);
  values_ = other.values_;
  ids_ = other.ids_;
}

Dictionary& Dictionary::operator=(const Dictionary& other) {
  if (this == &other) return *this;
  std::unique_lock lhs(mutex_, std::defer_lock);
  std::shared_lock rhs(other.mutex_, std::defer_lock);
  std::lock(lhs, rhs);
  values_ = other.values_;
  ids_ = other.ids_;
  return *this;
}

Dictionary::Dictionary(Dictionary&& other) noexcept {
  std::unique_lock lock(other.mutex_);
  values_ = std::move(other.values_);
  ids_ = std::move(other.ids_);
}

Dictionary& Dictionary::operator=(Dictionary&& other) noexcept {
  if (this == &other) return *this;
  std::unique_lock lhs(mutex_, std::defer_lock);
  std::unique_lock rhs(other.mutex_, std::defer_lock);
  std::lock(lhs, rhs);
  values_ = std::move(other.values_);
  ids_ = std::move(other.ids_);
  return *this;
}

ValueId Dictionary::intern(const DataValue& value) {
  std::unique_lock lock(mutex_);
  auto it = ids_.find(value);
  if (it != ids_.end()) return it->second;
  ValueId id = values_.size();
  values_.push_back(value);
  ids_.emplace(value, id);
  return id;
}

DataValue Dictionary::resolve(ValueId id) const {
  std::shared_lock lock(mutex_);
  if (id >= values_.size()) throw UnknownIdError(id);
  return values_[id];
}

std::optional<ValueId> Dictionary::find(const DataValue& value) const {
  std::shared_lock lock(mutex_);
  auto it = ids_.find(value);
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

std::size_t Dictionary::size() const {
  std::shared_lock lock(mutex_);
  return values_.size();
}

Dictionary rank_by_value(const Dictionary& dict, std::vector<ValueId>& remap) {
  std::size_t n = dict.size();
  std::vector<ValueId> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<DataValue> values;
  values.reserve(n);
  for (ValueId id = 0; id < n; ++id) values.push_back(dict.resolve(id));
  std::sort(order.begin(), order.end(), [&](ValueId a, ValueId b) {
    return value_less(values[a], values[b]);
  });
  Dictionary ranked;
  remap.assign(n, 0);
  for (ValueId rank = 0; rank < n; ++rank) {
    ValueId old = order[rank];
    remap[old] = ranked.intern(values[old]);
  }
  return ranked;
}

}  // namespace strata
