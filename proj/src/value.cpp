#include "strata/value.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

namespace strata {

DataValue DataValue::real(double v) {
  if (std::isnan(v)) {
    throw Error("NaN is not a valid double value");
  }
  if (v == 0.0) {
    v = 0.0;  // collapse -0.0 so equality matches the total order
  }
  return DataValue(Payload(v));
}

namespace {

Ordering from_three_way(std::strong_ordering o) {
  if (o == std::strong_ordering::less) return Ordering::Less;
  if (o == std::strong_ordering::greater) return Ordering::Greater;
  return Ordering::Equal;
}

template <typename T>
Ordering compare_plain(const T& a, const T& b) {
  if (a < b) return Ordering::Less;
  if (b < a) return Ordering::Greater;
  return Ordering::Equal;
}

}  // namespace

Ordering compare(const DataValue& a, const DataValue& b) {
  if (a.payload_.index() != b.payload_.index()) {
    return a.payload_.index() < b.payload_.index() ? Ordering::Less
                                                   : Ordering::Greater;
  }
  switch (a.sort()) {
    case ValueSort::Iri:
      return compare_plain(a.iri_text(), b.iri_text());
    case ValueSort::String:
      return compare_plain(a.string_text(), b.string_text());
    case ValueSort::LangString:
      return from_three_way(a.lang_string_value() <=> b.lang_string_value());
    case ValueSort::Integer:
      return compare_plain(a.integer_value(), b.integer_value());
    case ValueSort::Double:
      return compare_plain(a.double_value(), b.double_value());
    case ValueSort::Null:
      return compare_plain(a.null_label(), b.null_label());
  }
  return Ordering::Equal;
}

std::string DataValue::to_string() const {
  switch (sort()) {
    case ValueSort::Iri:
      return "<" + iri_text() + ">";
    case ValueSort::String:
      return "\"" + string_text() + "\"";
    case ValueSort::LangString: {
      const auto& ls = lang_string_value();
      return "\"" + ls.text + "\"@" + ls.lang;
    }
    case ValueSort::Integer:
      return std::to_string(integer_value());
    case ValueSort::Double:
      return double_to_text(double_value());
    case ValueSort::Null:
      return "_:n" + std::to_string(null_label());
  }
  return {};
}

std::size_t DataValue::hash() const {
  std::size_t seed = payload_.index();
  auto mix = [&seed](std::size_t h) {
    seed ^= h + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2);
  };
  switch (sort()) {
    case ValueSort::Iri:
      mix(std::hash<std::string>{}(iri_text()));
      break;
    case ValueSort::String:
      mix(std::hash<std::string>{}(string_text()));
      break;
    case ValueSort::LangString:
      mix(std::hash<std::string>{}(lang_string_value().lang));
      mix(std::hash<std::string>{}(lang_string_value().text));
      break;
    case ValueSort::Integer:
      mix(std::hash<std::int64_t>{}(integer_value()));
      break;
    case ValueSort::Double:
      mix(std::hash<double>{}(double_value()));
      break;
    case ValueSort::Null:
      mix(std::hash<std::uint64_t>{}(null_label()));
      break;
  }
  return seed;
}

const char* position_type_name(PositionType t) {
  switch (t) {
    case PositionType::Any:
      return "any";
    case PositionType::Integer:
      return "integer";
    case PositionType::Double:
      return "double";
    case PositionType::String:
      return "string";
  }
  return "?";
}

bool parse_integer_text(const std::string& text, std::int64_t& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;  // from_chars accepts '-' but not '+'
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

bool parse_double_text(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  if (first == last) return false;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) return false;
  return !std::isnan(out);
}

std::string double_to_text(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

DataValue coerce(const DataValue& value, PositionType declared) {
  switch (declared) {
    case PositionType::Any:
      if (value.sort() == ValueSort::Null) {
        throw CoercionError("null values are not valid input data");
      }
      return value;
    case PositionType::Integer: {
      if (value.sort() == ValueSort::Integer) return value;
      if (value.sort() == ValueSort::String) {
        std::int64_t parsed = 0;
        if (parse_integer_text(value.string_text(), parsed)) {
          return DataValue::integer(parsed);
        }
      }
      throw CoercionError("value " + value.to_string() +
                          " is not an integer");
    }
    case PositionType::Double: {
      if (value.sort() == ValueSort::Double) return value;
      if (value.sort() == ValueSort::Integer) {
        return DataValue::real(static_cast<double>(value.integer_value()));
      }
      if (value.sort() == ValueSort::String) {
        double parsed = 0;
        if (parse_double_text(value.string_text(), parsed)) {
          return DataValue::real(parsed);
        }
      }
      throw CoercionError("value " + value.to_string() + " is not a double");
    }
    case PositionType::String: {
      if (value.sort() == ValueSort::String) return value;
      throw CoercionError("value " + value.to_string() + " is not a string");
    }
  }
  throw CoercionError("unknown position type");
}

}  // namespace strata
