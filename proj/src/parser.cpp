#include "strata/parser.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <sstream>

namespace strata {

namespace {

enum class TokenKind {
  Ident,
  Variable,     // ?name
  ExVariable,   // !name
  Integer,
  Double,
  String,       // "..." with optional @lang folded in
  LangString,
  Iri,          // <...>
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Dot,
  Colon,
  Tilde,
  At,           // @ident directive introducer
  ImpliedBy,    // :-
  CmpEq,
  CmpNeq,
  CmpLt,
  CmpLeq,
  CmpGt,
  CmpGeq,
  End,
};

struct Token {
  TokenKind kind = TokenKind::End;
  std::string text;       // identifier / variable name / directive name
  std::string lang;       // language tag for LangString
  std::int64_t int_value = 0;
  double double_value = 0;
  std::size_t line = 1;
  std::size_t column = 1;
};

const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::Ident: return "identifier";
    case TokenKind::Variable: return "variable";
    case TokenKind::ExVariable: return "existential variable";
    case TokenKind::Integer: return "integer";
    case TokenKind::Double: return "double";
    case TokenKind::String: return "string";
    case TokenKind::LangString: return "language-tagged string";
    case TokenKind::Iri: return "IRI";
    case TokenKind::LParen: return "'('";
    case TokenKind::RParen: return "')'";
    case TokenKind::LBracket: return "'['";
    case TokenKind::RBracket: return "']'";
    case TokenKind::Comma: return "','";
    case TokenKind::Dot: return "'.'";
    case TokenKind::Colon: return "':'";
    case TokenKind::Tilde: return "'~'";
    case TokenKind::At: return "directive";
    case TokenKind::ImpliedBy: return "':-'";
    case TokenKind::CmpEq: return "'='";
    case TokenKind::CmpNeq: return "'!='";
    case TokenKind::CmpLt: return "'<'";
    case TokenKind::CmpLeq: return "'<='";
    case TokenKind::CmpGt: return "'>'";
    case TokenKind::CmpGeq: return "'>='";
    case TokenKind::End: return "end of input";
  }
  return "?";
}

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c));
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    skip_space_and_comments();
    Token tok;
    tok.line = line_;
    tok.column = column_;
    if (eof()) {
      tok.kind = TokenKind::End;
      return tok;
    }
    char c = peek();
    if (is_ident_start(c)) {
      tok.kind = TokenKind::Ident;
      tok.text = lex_identifier();
      return tok;
    }
    if (c == '?') {
      advance();
      tok.kind = TokenKind::Variable;
      tok.text = lex_variable_name();
      return tok;
    }
    if (c == '!') {
      advance();
      if (!eof() && peek() == '=') {
        advance();
        tok.kind = TokenKind::CmpNeq;
        return tok;
      }
      tok.kind = TokenKind::ExVariable;
      tok.text = lex_variable_name();
      return tok;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '+' ||
        (c == '-' && digit_follows()) || (c == '.' && digit_follows())) {
      return lex_number(tok);
    }
    if (c == '"') {
      return lex_string(tok);
    }
    if (c == '<') {
      return lex_less_or_iri(tok);
    }
    advance();
    switch (c) {
      case '(': tok.kind = TokenKind::LParen; return tok;
      case ')': tok.kind = TokenKind::RParen; return tok;
      case '[': tok.kind = TokenKind::LBracket; return tok;
      case ']': tok.kind = TokenKind::RBracket; return tok;
      case ',': tok.kind = TokenKind::Comma; return tok;
      case '.': tok.kind = TokenKind::Dot; return tok;
      case '~': tok.kind = TokenKind::Tilde; return tok;
      case '=': tok.kind = TokenKind::CmpEq; return tok;
      case '@': {
        if (eof() || !is_ident_start(peek())) {
          throw ParseError("expected directive name after '@'", tok.line,
                           tok.column);
        }
        tok.kind = TokenKind::At;
        tok.text = lex_identifier();
        return tok;
      }
      case ':': {
        if (!eof() && peek() == '-') {
          advance();
          tok.kind = TokenKind::ImpliedBy;
          return tok;
        }
        tok.kind = TokenKind::Colon;
        return tok;
      }
      case '>': {
        if (!eof() && peek() == '=') {
          advance();
          tok.kind = TokenKind::CmpGeq;
          return tok;
        }
        tok.kind = TokenKind::CmpGt;
        return tok;
      }
      default:
        throw ParseError(std::string("unexpected character '") + c + "'",
                         tok.line, tok.column);
    }
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char peek_at(std::size_t off) const {
    return pos_ + off < text_.size() ? text_[pos_ + off] : '\0';
  }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  bool digit_follows() const {
    return std::isdigit(static_cast<unsigned char>(peek_at(1)));
  }

  void skip_space_and_comments() {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '%') {
        while (!eof() && peek() != '\n') advance();
      } else {
        break;
      }
    }
  }

  std::string lex_identifier() {
    std::string out;
    while (!eof() && is_ident_char(peek())) {
      out += peek();
      advance();
    }
    return out;
  }

  std::string lex_variable_name() {
    if (eof() || !is_ident_start(peek())) {
      throw ParseError("expected variable name", line_, column_);
    }
    return lex_identifier();
  }

  Token lex_number(Token tok) {
    std::size_t start = pos_;
    bool is_double = false;
    if (peek() == '+' || peek() == '-') advance();
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    // '.' belongs to the number only when a digit follows, so statement
    // dots after integers lex separately.
    if (!eof() && peek() == '.' && digit_follows()) {
      is_double = true;
      advance();
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    if (!eof() && (peek() == 'e' || peek() == 'E')) {
      is_double = true;
      advance();
      if (!eof() && (peek() == '+' || peek() == '-')) advance();
      if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) {
        throw ParseError("malformed number: missing exponent digits", tok.line,
                         tok.column);
      }
      while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) advance();
    }
    std::string text(text_.substr(start, pos_ - start));
    if (is_double) {
      tok.kind = TokenKind::Double;
      if (!parse_double_text(text, tok.double_value)) {
        throw ParseError("malformed double literal '" + text + "'", tok.line,
                         tok.column);
      }
    } else {
      tok.kind = TokenKind::Integer;
      if (!parse_integer_text(text, tok.int_value)) {
        throw ParseError("integer literal out of 64-bit range: " + text,
                         tok.line, tok.column);
      }
    }
    return tok;
  }

  Token lex_string(Token tok) {
    advance();  // opening quote
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') {
        throw ParseError("unterminated string", tok.line, tok.column);
      }
      char c = peek();
      advance();
      if (c == '"') break;
      if (c == '\\') {
        if (eof()) throw ParseError("unterminated string", tok.line, tok.column);
        char esc = peek();
        advance();
        switch (esc) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          default:
            throw ParseError(std::string("unknown escape '\\") + esc + "'",
                             tok.line, tok.column);
        }
      } else {
        out += c;
      }
    }
    // A language tag directly after the closing quote makes a LangString.
    if (!eof() && peek() == '@' && is_ident_start(peek_at(1))) {
      advance();
      tok.kind = TokenKind::LangString;
      tok.lang = lex_identifier();
      tok.text = std::move(out);
      return tok;
    }
    tok.kind = TokenKind::String;
    tok.text = std::move(out);
    return tok;
  }

  // '<' starts an IRI only when a '>' terminator appears before whitespace,
  // a quote, or a second '<'; otherwise it is a comparison operator.
  Token lex_less_or_iri(Token tok) {
    if (peek_at(1) == '=') {
      advance();
      advance();
      tok.kind = TokenKind::CmpLeq;
      return tok;
    }
    std::size_t off = 1;
    bool iri = false;
    while (true) {
      char c = peek_at(off);
      if (c == '>') {
        iri = true;
        break;
      }
      if (c == '\0' || c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
          c == '"' || c == '<') {
        break;
      }
      ++off;
    }
    if (!iri) {
      advance();
      tok.kind = TokenKind::CmpLt;
      return tok;
    }
    advance();  // '<'
    std::string out;
    while (peek() != '>') {
      out += peek();
      advance();
    }
    advance();  // '>'
    tok.kind = TokenKind::Iri;
    tok.text = std::move(out);
    return tok;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { shift(); }

  Program parse() {
    Program program;
    while (current_.kind != TokenKind::End) {
      if (current_.kind == TokenKind::At) {
        parse_directive(program);
      } else {
        parse_fact_or_rule(program);
      }
    }
    return program;
  }

  std::optional<Atom> parse_single_fact() {
    if (current_.kind == TokenKind::End) return std::nullopt;
    Atom atom = parse_atom();
    expect(TokenKind::Dot);
    expect(TokenKind::End);
    if (!atom.is_ground()) {
      throw ParseError("fact must be ground", current_.line, current_.column);
    }
    return atom;
  }

 private:
  void shift() { current_ = lexer_.next(); }

  Token expect(TokenKind kind) {
    if (current_.kind != kind) {
      throw ParseError(std::string("expected ") + token_kind_name(kind) +
                           ", found " + token_kind_name(current_.kind),
                       current_.line, current_.column);
    }
    Token tok = current_;
    shift();
    return tok;
  }

  bool accept(TokenKind kind) {
    if (current_.kind != kind) return false;
    shift();
    return true;
  }

  void parse_directive(Program& program) {
    Token at = expect(TokenKind::At);
    if (at.text == "declare") {
      TypeDeclaration decl;
      decl.predicate = expect(TokenKind::Ident).text;
      expect(TokenKind::LParen);
      do {
        Token t = expect(TokenKind::Ident);
        if (t.text == "any") {
          decl.types.push_back(PositionType::Any);
        } else if (t.text == "integer") {
          decl.types.push_back(PositionType::Integer);
        } else if (t.text == "double") {
          decl.types.push_back(PositionType::Double);
        } else if (t.text == "string") {
          decl.types.push_back(PositionType::String);
        } else {
          throw ParseError("unknown type '" + t.text +
                               "' (expected any, integer, double, or string)",
                           t.line, t.column);
        }
      } while (accept(TokenKind::Comma));
      expect(TokenKind::RParen);
      expect(TokenKind::Dot);
      program.declarations.push_back(std::move(decl));
    } else if (at.text == "source") {
      SourceDirective src;
      src.predicate = expect(TokenKind::Ident).text;
      expect(TokenKind::LBracket);
      Token arity = expect(TokenKind::Integer);
      if (arity.int_value < 1) {
        throw ParseError("source arity must be at least 1", arity.line,
                         arity.column);
      }
      src.arity = static_cast<std::size_t>(arity.int_value);
      expect(TokenKind::RBracket);
      expect(TokenKind::Colon);
      Token fmt = expect(TokenKind::Ident);
      if (fmt.text == "load-csv") {
        src.format = SourceFormat::Csv;
      } else if (fmt.text == "load-tsv") {
        src.format = SourceFormat::Tsv;
      } else if (fmt.text == "load-rdf") {
        src.format = SourceFormat::NTriples;
      } else if (fmt.text == "load-facts") {
        src.format = SourceFormat::Facts;
      } else {
        throw ParseError("unknown source format '" + fmt.text +
                             "' (expected load-csv, load-tsv, load-rdf, or "
                             "load-facts)",
                         fmt.line, fmt.column);
      }
      expect(TokenKind::LParen);
      src.path = expect(TokenKind::String).text;
      expect(TokenKind::RParen);
      expect(TokenKind::Dot);
      program.sources.push_back(std::move(src));
    } else {
      throw ParseError("unknown directive '@" + at.text +
                           "' (expected @declare or @source)",
                       at.line, at.column);
    }
  }

  void parse_fact_or_rule(Program& program) {
    Token start = current_;
    std::vector<Atom> head;
    head.push_back(parse_atom());
    while (accept(TokenKind::Comma)) {
      head.push_back(parse_atom());
    }
    if (accept(TokenKind::Dot)) {
      if (head.size() != 1) {
        throw ParseError("expected ':-' after head conjunction", start.line,
                         start.column);
      }
      if (!head[0].is_ground()) {
        throw ParseError("fact must be ground", start.line, start.column);
      }
      program.facts.push_back(std::move(head[0]));
      return;
    }
    expect(TokenKind::ImpliedBy);
    Rule rule;
    rule.head = std::move(head);
    do {
      parse_body_element(rule);
    } while (accept(TokenKind::Comma));
    expect(TokenKind::Dot);
    program.rules.push_back(std::move(rule));
  }

  void parse_body_element(Rule& rule) {
    if (accept(TokenKind::Tilde)) {
      rule.body_negative.push_back(parse_atom());
      return;
    }
    // An identifier followed by '(' is an atom; anything else begins the
    // left term of a constraint.
    if (current_.kind == TokenKind::Ident) {
      rule.body_positive.push_back(parse_atom());
      return;
    }
    Term lhs = parse_term();
    Comparator op = parse_comparator();
    Term rhs = parse_term();
    rule.constraints.push_back(Constraint{std::move(lhs), op, std::move(rhs)});
  }

  Comparator parse_comparator() {
    switch (current_.kind) {
      case TokenKind::CmpEq: shift(); return Comparator::Eq;
      case TokenKind::CmpNeq: shift(); return Comparator::Neq;
      case TokenKind::CmpLt: shift(); return Comparator::Lt;
      case TokenKind::CmpLeq: shift(); return Comparator::Leq;
      case TokenKind::CmpGt: shift(); return Comparator::Gt;
      case TokenKind::CmpGeq: shift(); return Comparator::Geq;
      default:
        throw ParseError(std::string("expected comparison operator, found ") +
                             token_kind_name(current_.kind),
                         current_.line, current_.column);
    }
  }

  Atom parse_atom() {
    Atom atom;
    atom.predicate = expect(TokenKind::Ident).text;
    expect(TokenKind::LParen);
    do {
      atom.terms.push_back(parse_term());
    } while (accept(TokenKind::Comma));
    expect(TokenKind::RParen);
    return atom;
  }

  Term parse_term() {
    Token tok = current_;
    switch (tok.kind) {
      case TokenKind::Variable:
        shift();
        return Term::universal(tok.text);
      case TokenKind::ExVariable:
        shift();
        return Term::existential(tok.text);
      case TokenKind::Integer:
        shift();
        return Term::constant(DataValue::integer(tok.int_value));
      case TokenKind::Double:
        shift();
        return Term::constant(DataValue::real(tok.double_value));
      case TokenKind::String:
        shift();
        return Term::constant(DataValue::string(tok.text));
      case TokenKind::LangString:
        shift();
        return Term::constant(DataValue::lang_string(tok.lang, tok.text));
      case TokenKind::Iri:
        shift();
        return Term::constant(DataValue::iri(tok.text));
      case TokenKind::Ident:
        // Bare identifiers in term position are IRI constants.
        shift();
        return Term::constant(DataValue::iri(tok.text));
      default:
        throw ParseError(std::string("expected term, found ") +
                             token_kind_name(tok.kind),
                         tok.line, tok.column);
    }
  }

  Lexer lexer_;
  Token current_;
};

void collect_universals(const Atom& atom, std::set<std::string>& out) {
  for (const Term& t : atom.terms) {
    if (t.kind() == Term::Kind::Universal) out.insert(t.name());
  }
}

}  // namespace

std::string ValidationReport::to_string() const {
  std::ostringstream out;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i > 0) out << "\n";
    out << violations[i].message;
  }
  return out.str();
}

Program parse_program_unchecked(std::string_view text) {
  Parser parser(text);
  return parser.parse();
}

ValidationReport check_safety(const Program& program) {
  ValidationReport report;
  auto add = [&report](std::string msg) {
    report.violations.push_back(Violation{std::move(msg)});
  };

  // Arity table: declarations first, then first textual use.
  std::map<std::string, std::size_t> arity;
  std::set<std::string> declared;
  for (const auto& decl : program.declarations) {
    if (!declared.insert(decl.predicate).second) {
      add("duplicate @declare for predicate " + decl.predicate);
      continue;
    }
    arity[decl.predicate] = decl.arity();
  }
  auto check_arity = [&](const std::string& predicate, std::size_t a,
                         const std::string& where) {
    auto [it, inserted] = arity.emplace(predicate, a);
    if (!inserted && it->second != a) {
      add("arity mismatch for " + predicate + " in " + where + ": expected " +
          std::to_string(it->second) + ", found " + std::to_string(a));
    }
  };

  for (const auto& src : program.sources) {
    check_arity(src.predicate, src.arity,
                "@source " + src.predicate + "[" + std::to_string(src.arity) + "]");
    if (src.format == SourceFormat::NTriples && src.arity != 3) {
      add("@source " + src.predicate + ": load-rdf sources must have arity 3");
    }
  }
  for (const auto& fact : program.facts) {
    check_arity(fact.predicate, fact.arity(), "fact " + fact.to_string());
  }

  for (std::size_t i = 0; i < program.rules.size(); ++i) {
    const Rule& rule = program.rules[i];
    const std::string where = "rule " + std::to_string(i + 1);

    std::set<std::string> positive_vars;
    for (const Atom& atom : rule.body_positive) {
      check_arity(atom.predicate, atom.arity(), where);
      collect_universals(atom, positive_vars);
      for (const Term& t : atom.terms) {
        if (t.kind() == Term::Kind::Existential) {
          add(where + ": existential variable !" + t.name() +
              " may not appear in the body");
        }
      }
    }
    for (const Atom& atom : rule.head) {
      check_arity(atom.predicate, atom.arity(), where);
      for (const Term& t : atom.terms) {
        if (t.kind() == Term::Kind::Universal &&
            !positive_vars.count(t.name())) {
          add(where + ": head variable ?" + t.name() +
              " is not bound by any positive body atom");
        }
      }
    }
    for (const Atom& atom : rule.body_negative) {
      check_arity(atom.predicate, atom.arity(), where);
      for (const Term& t : atom.terms) {
        if (t.kind() == Term::Kind::Existential) {
          add(where + ": existential variable !" + t.name() +
              " may not appear in the body");
        } else if (t.kind() == Term::Kind::Universal &&
                   !positive_vars.count(t.name())) {
          add(where + ": variable ?" + t.name() +
              " in negated atom is not bound by any positive body atom");
        }
      }
    }
    for (const Constraint& c : rule.constraints) {
      bool has_variable = false;
      for (const Term* t : {&c.lhs, &c.rhs}) {
        if (t->kind() == Term::Kind::Existential) {
          add(where + ": existential variable !" + t->name() +
              " may not appear in a constraint");
        } else if (t->kind() == Term::Kind::Universal) {
          has_variable = true;
          if (!positive_vars.count(t->name())) {
            add(where + ": constraint variable ?" + t->name() +
                " is not bound by any positive body atom");
          }
        }
      }
      if (!has_variable) {
        add(where + ": constraint " + c.to_string() +
            " must mention at least one variable");
      }
    }
  }
  return report;
}

Program parse_program(std::string_view text) {
  Program program = parse_program_unchecked(text);
  ValidationReport report = check_safety(program);
  if (!report.ok()) {
    throw ValidationError(report.to_string());
  }
  return program;
}

bool parse_fact_line(std::string_view line, std::size_t line_number,
                     Atom& out) {
  try {
    Parser parser(line);
    auto atom = parser.parse_single_fact();
    if (!atom) return false;
    out = std::move(*atom);
    return true;
  } catch (const ParseError& e) {
    throw ParseError(e.message(), line_number, e.column());
  }
}

}  // namespace strata
