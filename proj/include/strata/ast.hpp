#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "strata/value.hpp"

namespace strata {

/// A term of an atom: universal variable `?name`, existential variable
/// `!name`, or a ground constant.
class Term {
 public:
  enum class Kind : std::uint8_t { Universal, Existential, Constant };

  static Term universal(std::string name) {
    return Term(Kind::Universal, std::move(name), std::nullopt);
  }
  static Term existential(std::string name) {
    return Term(Kind::Existential, std::move(name), std::nullopt);
  }
  static Term constant(DataValue value) {
    return Term(Kind::Constant, {}, std::move(value));
  }

  Kind kind() const { return kind_; }
  bool is_variable() const { return kind_ != Kind::Constant; }
  const std::string& name() const { return name_; }
  const DataValue& value() const { return *value_; }

  bool operator==(const Term& other) const {
    return kind_ == other.kind_ && name_ == other.name_ &&
           value_ == other.value_;
  }

  std::string to_string() const;

 private:
  Term(Kind kind, std::string name, std::optional<DataValue> value)
      : kind_(kind), name_(std::move(name)), value_(std::move(value)) {}

  Kind kind_;
  std::string name_;
  std::optional<DataValue> value_;
};

struct Atom {
  std::string predicate;
  std::vector<Term> terms;

  std::size_t arity() const { return terms.size(); }
  bool is_ground() const;
  bool operator==(const Atom&) const = default;
  std::string to_string() const;
};

enum class Comparator : std::uint8_t { Eq, Neq, Lt, Leq, Gt, Geq };

const char* comparator_symbol(Comparator op);

/// A comparison built-in between two terms; at least one side is a variable.
struct Constraint {
  Term lhs;
  Comparator op;
  Term rhs;

  bool operator==(const Constraint&) const = default;
  std::string to_string() const;
};

struct Rule {
  std::vector<Atom> head;           // non-empty conjunction
  std::vector<Atom> body_positive;  // positive literals
  std::vector<Atom> body_negative;  // literals prefixed ~
  std::vector<Constraint> constraints;

  bool has_existential_head() const;
  bool operator==(const Rule&) const = default;
  std::string to_string() const;
};

enum class SourceFormat : std::uint8_t { Csv, Tsv, NTriples, Facts };

const char* source_format_directive(SourceFormat f);

/// One @source directive: predicate, arity, format, and file path.
struct SourceDirective {
  std::string predicate;
  std::size_t arity = 0;
  SourceFormat format = SourceFormat::Csv;
  std::string path;

  bool operator==(const SourceDirective&) const = default;
};

/// A parsed program: directives, declarations, explicit facts, and rules.
struct Program {
  std::vector<TypeDeclaration> declarations;
  std::vector<SourceDirective> sources;
  std::vector<Atom> facts;  // ground atoms
  std::vector<Rule> rules;

  /// Declared arity if any, else arity fixed by first use, else nullopt.
  std::optional<std::size_t> arity_of(const std::string& predicate) const;

  /// Declaration for the predicate, defaulting every position to Any.
  TypeDeclaration declaration_of(const std::string& predicate,
                                 std::size_t arity) const;

  /// Predicates appearing in some rule head (the derived predicates).
  std::vector<std::string> head_predicates() const;

  bool operator==(const Program&) const = default;

  /// Canonical text form; parsing it back yields an equal Program.
  std::string to_string() const;
};

}  // namespace strata
