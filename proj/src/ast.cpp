#include "strata/ast.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace strata {

namespace {

// Program text form of a constant. Strings get the parser's escape set;
// integers/doubles print in their literal forms; IRIs in angle brackets when
// they would not lex as a bare identifier.
std::string constant_to_text(const DataValue& v) {
  switch (v.sort()) {
    case ValueSort::String:
    case ValueSort::LangString: {
      const std::string& text = v.sort() == ValueSort::String
                                    ? v.string_text()
                                    : v.lang_string_value().text;
      std::string out = "\"";
      for (char c : text) {
        switch (c) {
          case '"': out += "\\\""; break;
          case '\\': out += "\\\\"; break;
          case '\n': out += "\\n"; break;
          case '\t': out += "\\t"; break;
          case '\r': out += "\\r"; break;
          default: out += c;
        }
      }
      out += '"';
      if (v.sort() == ValueSort::LangString) {
        out += "@" + v.lang_string_value().lang;
      }
      return out;
    }
    case ValueSort::Iri: {
      const std::string& text = v.iri_text();
      bool bare = !text.empty() && std::isalpha(static_cast<unsigned char>(text[0]));
      for (char c : text) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) {
          bare = false;
          break;
        }
      }
      return bare ? text : "<" + text + ">";
    }
    default:
      return v.to_string();
  }
}

}  // namespace

std::string Term::to_string() const {
  switch (kind_) {
    case Kind::Universal:
      return "?" + name_;
    case Kind::Existential:
      return "!" + name_;
    case Kind::Constant:
      return constant_to_text(*value_);
  }
  return {};
}

bool Atom::is_ground() const {
  return std::all_of(terms.begin(), terms.end(),
                     [](const Term& t) { return !t.is_variable(); });
}

std::string Atom::to_string() const {
  std::string out = predicate + "(";
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i > 0) out += ", ";
    out += terms[i].to_string();
  }
  return out + ")";
}

const char* comparator_symbol(Comparator op) {
  switch (op) {
    case Comparator::Eq: return "=";
    case Comparator::Neq: return "!=";
    case Comparator::Lt: return "<";
    case Comparator::Leq: return "<=";
    case Comparator::Gt: return ">";
    case Comparator::Geq: return ">=";
  }
  return "?";
}

std::string Constraint::to_string() const {
  return lhs.to_string() + " " + comparator_symbol(op) + " " + rhs.to_string();
}

bool Rule::has_existential_head() const {
  for (const Atom& atom : head) {
    for (const Term& term : atom.terms) {
      if (term.kind() == Term::Kind::Existential) return true;
    }
  }
  return false;
}

std::string Rule::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < head.size(); ++i) {
    if (i > 0) out += ", ";
    out += head[i].to_string();
  }
  out += " :- ";
  bool first = true;
  auto sep = [&] {
    if (!first) out += ", ";
    first = false;
  };
  for (const Atom& atom : body_positive) {
    sep();
    out += atom.to_string();
  }
  for (const Atom& atom : body_negative) {
    sep();
    out += "~" + atom.to_string();
  }
  for (const Constraint& c : constraints) {
    sep();
    out += c.to_string();
  }
  return out + " .";
}

const char* source_format_directive(SourceFormat f) {
  switch (f) {
    case SourceFormat::Csv: return "load-csv";
    case SourceFormat::Tsv: return "load-tsv";
    case SourceFormat::NTriples: return "load-rdf";
    case SourceFormat::Facts: return "load-facts";
  }
  return "?";
}

std::optional<std::size_t> Program::arity_of(const std::string& predicate) const {
  for (const auto& decl : declarations) {
    if (decl.predicate == predicate) return decl.arity();
  }
  for (const auto& src : sources) {
    if (src.predicate == predicate) return src.arity;
  }
  for (const auto& fact : facts) {
    if (fact.predicate == predicate) return fact.arity();
  }
  for (const auto& rule : rules) {
    for (const auto& atom : rule.head) {
      if (atom.predicate == predicate) return atom.arity();
    }
    for (const auto& atom : rule.body_positive) {
      if (atom.predicate == predicate) return atom.arity();
    }
    for (const auto& atom : rule.body_negative) {
      if (atom.predicate == predicate) return atom.arity();
    }
  }
  return std::nullopt;
}

TypeDeclaration Program::declaration_of(const std::string& predicate,
                                        std::size_t arity) const {
  for (const auto& decl : declarations) {
    if (decl.predicate == predicate) return decl;
  }
  return TypeDeclaration::all_any(predicate, arity);
}

std::vector<std::string> Program::head_predicates() const {
  std::set<std::string> seen;
  for (const auto& rule : rules) {
    for (const auto& atom : rule.head) seen.insert(atom.predicate);
  }
  return {seen.begin(), seen.end()};
}

std::string Program::to_string() const {
  std::ostringstream out;
  for (const auto& decl : declarations) {
    out << "@declare " << decl.predicate << "(";
    for (std::size_t i = 0; i < decl.types.size(); ++i) {
      if (i > 0) out << ", ";
      out << position_type_name(decl.types[i]);
    }
    out << ") .\n";
  }
  for (const auto& src : sources) {
    out << "@source " << src.predicate << "[" << src.arity
        << "]: " << source_format_directive(src.format) << "(\"" << src.path
        << "\") .\n";
  }
  for (const auto& fact : facts) {
    out << fact.to_string() << " .\n";
  }
  for (const auto& rule : rules) {
    out << rule.to_string() << "\n";
  }
  return out.str();
}

}  // namespace strata
