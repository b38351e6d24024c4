#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "strata/errors.hpp"

namespace strata {

/// Sorts of ground values. The declaration order is the cross-sort rank used
/// by the total order: IRI < String < LangString < Integer < Double < Null.
enum class ValueSort : std::uint8_t {
  Iri = 0,
  String = 1,
  LangString = 2,
  Integer = 3,
  Double = 4,
  Null = 5,
};

enum class Ordering { Less, Equal, Greater };

/// A typed ground value. Immutable once constructed.
///
/// Doubles are never NaN (rejected at construction) and -0.0 is canonicalised
/// to +0.0 so that value equality agrees with the total order. Null labels are
/// minted by the chase and never appear in input data.
class DataValue {
 public:
  struct Iri {
    std::string text;
    auto operator<=>(const Iri&) const = default;
  };
  struct LangString {
    std::string lang;
    std::string text;
    auto operator<=>(const LangString&) const = default;
  };
  struct Null {
    std::uint64_t label;
    auto operator<=>(const Null&) const = default;
  };

  static DataValue iri(std::string text) {
    return DataValue(Iri{std::move(text)});
  }
  static DataValue string(std::string text) { return DataValue(std::move(text)); }
  static DataValue lang_string(std::string lang, std::string text) {
    return DataValue(LangString{std::move(lang), std::move(text)});
  }
  static DataValue integer(std::int64_t v) { return DataValue(v); }
  static DataValue real(double v);  // rejects NaN
  static DataValue null(std::uint64_t label) { return DataValue(Null{label}); }

  ValueSort sort() const { return static_cast<ValueSort>(payload_.index()); }

  bool is_numeric() const {
    return sort() == ValueSort::Integer || sort() == ValueSort::Double;
  }
  bool is_textual() const {
    auto s = sort();
    return s == ValueSort::Iri || s == ValueSort::String ||
           s == ValueSort::LangString;
  }

  const std::string& iri_text() const { return std::get<Iri>(payload_).text; }
  const std::string& string_text() const { return std::get<std::string>(payload_); }
  const LangString& lang_string_value() const { return std::get<LangString>(payload_); }
  std::int64_t integer_value() const { return std::get<std::int64_t>(payload_); }
  double double_value() const { return std::get<double>(payload_); }
  std::uint64_t null_label() const { return std::get<Null>(payload_).label; }

  bool operator==(const DataValue& other) const { return payload_ == other.payload_; }

  /// Display form used in diagnostics and reports.
  std::string to_string() const;

  std::size_t hash() const;

 private:
  using Payload =
      std::variant<Iri, std::string, LangString, std::int64_t, double, Null>;

  explicit DataValue(Payload payload) : payload_(std::move(payload)) {}

  Payload payload_;

  friend Ordering compare(const DataValue&, const DataValue&);
};

/// Total order over all ground values: cross-sort by rank, within a sort by
/// codepoint (LangString by tag then text), numeric order for Integer and
/// Double, label order for Null. Cross-sort numeric comparison does not happen
/// here; it belongs to constraint evaluation.
Ordering compare(const DataValue& a, const DataValue& b);

inline bool value_less(const DataValue& a, const DataValue& b) {
  return compare(a, b) == Ordering::Less;
}

struct DataValueHash {
  std::size_t operator()(const DataValue& v) const { return v.hash(); }
};

/// Column types usable in @declare.
enum class PositionType : std::uint8_t { Any, Integer, Double, String };

const char* position_type_name(PositionType t);

/// Declared (or defaulted) schema of one predicate.
struct TypeDeclaration {
  std::string predicate;
  std::vector<PositionType> types;  // size == arity, arity >= 1

  std::size_t arity() const { return types.size(); }

  static TypeDeclaration all_any(std::string predicate, std::size_t arity) {
    return TypeDeclaration{std::move(predicate),
                           std::vector<PositionType>(arity, PositionType::Any)};
  }

  bool operator==(const TypeDeclaration&) const = default;
};

/// Fits an input value to a declared position type.
///
/// Any accepts every non-null value unchanged. Integer accepts integers and
/// text that is a signed decimal integer. Double accepts doubles, integers
/// (widened) and decimal/scientific text. String accepts strings. Throws
/// CoercionError otherwise.
DataValue coerce(const DataValue& value, PositionType declared);

/// Parses a signed decimal integer, rejecting out-of-range and trailing junk.
bool parse_integer_text(const std::string& text, std::int64_t& out);

/// Parses a decimal or scientific double, rejecting NaN and trailing junk.
bool parse_double_text(const std::string& text, double& out);

/// Shortest decimal text that round-trips through parse_double_text.
std::string double_to_text(double v);

}  // namespace strata
