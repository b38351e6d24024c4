#include "strata/io.hpp"

#include <zlib.h>

#include <cctype>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "strata/parser.hpp"

namespace strata {

namespace {

constexpr const char* xsd_integer = "http://www.w3.org/2001/XMLSchema#integer";
constexpr const char* xsd_double = "http://www.w3.org/2001/XMLSchema#double";
constexpr const char* xsd_decimal = "http://www.w3.org/2001/XMLSchema#decimal";

/// Buffered byte stream over a plain or gzip-compressed file.
class ByteSource {
 public:
  virtual ~ByteSource() = default;

  int next() {
    if (pos_ >= len_ && !refill_buffer()) return -1;
    return static_cast<unsigned char>(buffer_[pos_++]);
  }

  int peek() {
    if (pos_ >= len_ && !refill_buffer()) return -1;
    return static_cast<unsigned char>(buffer_[pos_]);
  }

  /// Reads up to and including '\n'; false at end of input with empty line.
  bool getline(std::string& line) {
    line.clear();
    int c = next();
    if (c < 0) return false;
    while (c >= 0 && c != '\n') {
      line += static_cast<char>(c);
      c = next();
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

 protected:
  virtual std::size_t refill(char* data, std::size_t capacity) = 0;

 private:
  bool refill_buffer() {
    len_ = refill(buffer_, sizeof(buffer_));
    pos_ = 0;
    return len_ > 0;
  }

  char buffer_[1 << 16];
  std::size_t pos_ = 0;
  std::size_t len_ = 0;
};

class PlainFileSource : public ByteSource {
 public:
  explicit PlainFileSource(const std::string& path)
      : stream_(path, std::ios::binary) {
    if (!stream_) throw IoError("cannot open " + path);
  }

 protected:
  std::size_t refill(char* data, std::size_t capacity) override {
    stream_.read(data, static_cast<std::streamsize>(capacity));
    return static_cast<std::size_t>(stream_.gcount());
  }

 private:
  std::ifstream stream_;
};

class GzipFileSource : public ByteSource {
 public:
  explicit GzipFileSource(const std::string& path)
      : file_(gzopen(path.c_str(), "rb")), path_(path) {
    if (!file_) throw IoError("cannot open " + path);
  }

  ~GzipFileSource() override {
    if (file_) gzclose(file_);
  }

 protected:
  std::size_t refill(char* data, std::size_t capacity) override {
    int n = gzread(file_, data, static_cast<unsigned>(capacity));
    if (n < 0) throw IoError("gzip read error in " + path_);
    return static_cast<std::size_t>(n);
  }

 private:
  gzFile file_;
  std::string path_;
};

std::unique_ptr<ByteSource> open_source(const SourceSpec& spec) {
  if (spec.gzip) return std::make_unique<GzipFileSource>(spec.path);
  return std::make_unique<PlainFileSource>(spec.path);
}

// --- delimited text (CSV / TSV) -------------------------------------------

// One CSV record; quoted fields may contain separators, doubled quotes, and
// newlines. Returns false at end of input.
bool read_csv_record(ByteSource& in, char separator, bool allow_quotes,
                     std::vector<std::string>& fields, std::size_t& line,
                     const std::string& path) {
  fields.clear();
  int c = in.next();
  if (c < 0) return false;
  std::string field;
  bool in_quotes = false;
  bool record_done = false;
  bool field_started_quoted = false;
  while (!record_done) {
    if (c < 0) {
      if (in_quotes) {
        throw IoError(path + ": unterminated quoted field at line " +
                      std::to_string(line));
      }
      break;
    }
    char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        int peeked = in.peek();
        if (peeked == '"') {
          in.next();
          field += '"';
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field += ch;
      }
    } else if (allow_quotes && ch == '"' && field.empty() &&
               !field_started_quoted) {
      in_quotes = true;
      field_started_quoted = true;
    } else if (ch == separator) {
      fields.push_back(std::move(field));
      field.clear();
      field_started_quoted = false;
    } else if (ch == '\n') {
      record_done = true;
    } else if (ch == '\r' && in.peek() == '\n') {
      in.next();
      record_done = true;
    } else {
      field += ch;
    }
    if (!record_done) c = in.next();
  }
  fields.push_back(std::move(field));
  ++line;
  return true;
}

std::size_t load_delimited(const SourceSpec& spec, const TypeDeclaration& decl,
                           char separator, bool allow_quotes,
                           const TupleSink& sink) {
  auto in = open_source(spec);
  std::vector<std::string> fields;
  std::size_t line = 1;
  std::size_t rows = 0;
  while (true) {
    std::size_t row_line = line;
    if (!read_csv_record(*in, separator, allow_quotes, fields, line,
                         spec.path)) {
      break;
    }
    if (fields.size() != spec.arity) {
      throw IoError(spec.path + ": row " + std::to_string(row_line) +
                    " has " + std::to_string(fields.size()) +
                    " fields, expected " + std::to_string(spec.arity));
    }
    std::vector<DataValue> row;
    row.reserve(spec.arity);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      try {
        row.push_back(coerce(DataValue::string(fields[i]), decl.types[i]));
      } catch (const CoercionError&) {
        throw CoercionError(spec.predicate, i, fields[i], row_line);
      }
    }
    sink(std::move(row));
    ++rows;
  }
  return rows;
}

// --- N-Triples --------------------------------------------------------------

class NTriplesLineParser {
 public:
  NTriplesLineParser(const std::string& line, std::size_t line_number,
                     const std::string& path)
      : line_(line), number_(line_number), path_(path) {}

  // False for blank and comment lines.
  bool parse(std::vector<DataValue>& out) {
    skip_ws();
    if (done() || peek() == '#') return false;
    out.clear();
    out.push_back(parse_subject());
    skip_ws();
    out.push_back(parse_iri_term());
    skip_ws();
    out.push_back(parse_object());
    skip_ws();
    if (done() || line_[pos_] != '.') {
      fail("expected '.' terminator");
    }
    ++pos_;
    skip_ws();
    if (!done() && peek() != '#') fail("unexpected trailing content");
    return true;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) {
    throw IoError(path_ + ": line " + std::to_string(number_) + ": " + msg);
  }

  bool done() const { return pos_ >= line_.size(); }
  char peek() const { return line_[pos_]; }

  void skip_ws() {
    while (!done() && (peek() == ' ' || peek() == '\t')) ++pos_;
  }

  DataValue parse_subject() {
    if (done()) fail("expected subject");
    if (peek() == '<') return parse_iri_term();
    if (peek() == '_') return parse_blank_node();
    fail("expected IRI or blank node subject");
  }

  DataValue parse_object() {
    if (done()) fail("expected object");
    if (peek() == '<') return parse_iri_term();
    if (peek() == '_') return parse_blank_node();
    if (peek() == '"') return parse_literal();
    fail("expected IRI, blank node, or literal object");
  }

  DataValue parse_iri_term() {
    if (done() || peek() != '<') fail("expected IRI");
    ++pos_;
    std::string iri;
    while (!done() && peek() != '>') {
      iri += line_[pos_++];
    }
    if (done()) fail("unterminated IRI");
    ++pos_;
    return DataValue::iri(iri);
  }

  // Blank node labels load as IRIs under the reserved `_:` prefix, which no
  // real IRI can carry.
  DataValue parse_blank_node() {
    if (pos_ + 1 >= line_.size() || line_[pos_ + 1] != ':') {
      fail("expected blank node label");
    }
    pos_ += 2;
    std::string label;
    while (!done() &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
            peek() == '-')) {
      label += line_[pos_++];
    }
    if (label.empty()) fail("empty blank node label");
    return DataValue::iri("_:" + label);
  }

  void append_utf8(std::string& out, std::uint32_t code) {
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
  }

  std::uint32_t parse_hex(std::size_t digits) {
    std::uint32_t code = 0;
    for (std::size_t i = 0; i < digits; ++i) {
      if (done()) fail("truncated unicode escape");
      char c = line_[pos_++];
      code <<= 4;
      if (c >= '0' && c <= '9') {
        code |= static_cast<std::uint32_t>(c - '0');
      } else if (c >= 'a' && c <= 'f') {
        code |= static_cast<std::uint32_t>(c - 'a' + 10);
      } else if (c >= 'A' && c <= 'F') {
        code |= static_cast<std::uint32_t>(c - 'A' + 10);
      } else {
        fail("bad unicode escape digit");
      }
    }
    return code;
  }

  DataValue parse_literal() {
    ++pos_;  // opening quote
    std::string text;
    while (true) {
      if (done()) fail("unterminated literal");
      char c = line_[pos_++];
      if (c == '"') break;
      if (c == '\\') {
        if (done()) fail("unterminated escape");
        char esc = line_[pos_++];
        switch (esc) {
          case 't': text += '\t'; break;
          case 'b': text += '\b'; break;
          case 'n': text += '\n'; break;
          case 'r': text += '\r'; break;
          case 'f': text += '\f'; break;
          case '"': text += '"'; break;
          case '\'': text += '\''; break;
          case '\\': text += '\\'; break;
          case 'u': append_utf8(text, parse_hex(4)); break;
          case 'U': append_utf8(text, parse_hex(8)); break;
          default: fail("unknown escape in literal");
        }
      } else {
        text += c;
      }
    }
    if (!done() && peek() == '@') {
      ++pos_;
      std::string lang;
      while (!done() &&
             (std::isalnum(static_cast<unsigned char>(peek())) ||
              peek() == '-')) {
        lang += line_[pos_++];
      }
      if (lang.empty()) fail("empty language tag");
      return DataValue::lang_string(lang, text);
    }
    if (pos_ + 1 < line_.size() && peek() == '^' && line_[pos_ + 1] == '^') {
      pos_ += 2;
      DataValue datatype = parse_iri_term();
      const std::string& iri = datatype.iri_text();
      if (iri == xsd_integer) {
        std::int64_t value = 0;
        if (!parse_integer_text(text, value)) {
          fail("malformed xsd:integer literal \"" + text + "\"");
        }
        return DataValue::integer(value);
      }
      if (iri == xsd_double || iri == xsd_decimal) {
        double value = 0;
        if (!parse_double_text(text, value)) {
          fail("malformed numeric literal \"" + text + "\"");
        }
        return DataValue::real(value);
      }
      return DataValue::string(text);  // other datatypes load as plain strings
    }
    return DataValue::string(text);
  }

  const std::string& line_;
  std::size_t pos_ = 0;
  std::size_t number_;
  const std::string& path_;
};

std::size_t load_ntriples_stream(const SourceSpec& spec, const TupleSink& sink) {
  auto in = open_source(spec);
  std::string line;
  std::size_t number = 0;
  std::size_t rows = 0;
  std::vector<DataValue> triple;
  while (in->getline(line)) {
    ++number;
    NTriplesLineParser parser(line, number, spec.path);
    if (!parser.parse(triple)) continue;
    sink(triple);
    ++rows;
  }
  return rows;
}

std::size_t load_facts_stream(const SourceSpec& spec,
                              const TypeDeclaration& decl,
                              const TupleSink& sink) {
  auto in = open_source(spec);
  std::string line;
  std::size_t number = 0;
  std::size_t rows = 0;
  Atom atom;
  while (in->getline(line)) {
    ++number;
    if (!parse_fact_line(line, number, atom)) continue;
    if (atom.predicate != spec.predicate) {
      throw IoError(spec.path + ": line " + std::to_string(number) +
                    ": fact for predicate " + atom.predicate +
                    " in a source for " + spec.predicate);
    }
    if (atom.arity() != spec.arity) {
      throw IoError(spec.path + ": line " + std::to_string(number) +
                    ": arity " + std::to_string(atom.arity()) + ", expected " +
                    std::to_string(spec.arity));
    }
    std::vector<DataValue> row;
    row.reserve(atom.arity());
    for (std::size_t i = 0; i < atom.terms.size(); ++i) {
      try {
        row.push_back(coerce(atom.terms[i].value(), decl.types[i]));
      } catch (const CoercionError&) {
        throw CoercionError(spec.predicate, i, atom.terms[i].value().to_string(),
                            number);
      }
    }
    sink(std::move(row));
    ++rows;
  }
  return rows;
}

}  // namespace

SourceSpec make_source_spec(const SourceDirective& directive,
                            const std::string& base_dir) {
  SourceSpec spec;
  spec.predicate = directive.predicate;
  spec.arity = directive.arity;
  spec.format = directive.format;
  std::filesystem::path p(directive.path);
  if (p.is_relative() && !base_dir.empty()) {
    p = std::filesystem::path(base_dir) / p;
  }
  spec.path = p.string();
  spec.gzip = spec.path.size() > 3 &&
              spec.path.compare(spec.path.size() - 3, 3, ".gz") == 0;
  return spec;
}

std::size_t load_source(const SourceSpec& spec, const TypeDeclaration& decl,
                        const TupleSink& sink) {
  if (decl.arity() != spec.arity) {
    throw Error("declaration arity does not match source arity for " +
                spec.predicate);
  }
  switch (spec.format) {
    case SourceFormat::Csv:
      return load_delimited(spec, decl, ',', true, sink);
    case SourceFormat::Tsv:
      return load_delimited(spec, decl, '\t', false, sink);
    case SourceFormat::NTriples:
      if (spec.arity != 3) {
        throw Error("load-rdf source " + spec.predicate +
                    " must have arity 3");
      }
      return load_ntriples_stream(spec, sink);
    case SourceFormat::Facts:
      return load_facts_stream(spec, decl, sink);
  }
  throw Error("unknown source format");
}

std::vector<std::vector<DataValue>> load_csv(const SourceSpec& spec,
                                             const TypeDeclaration& decl) {
  std::vector<std::vector<DataValue>> rows;
  load_source(spec, decl,
              [&rows](std::vector<DataValue> row) { rows.push_back(std::move(row)); });
  return rows;
}

std::vector<std::vector<DataValue>> load_ntriples(const SourceSpec& spec) {
  std::vector<std::vector<DataValue>> rows;
  load_ntriples_stream(spec, [&rows](std::vector<DataValue> row) {
    rows.push_back(std::move(row));
  });
  return rows;
}

std::vector<std::vector<DataValue>> load_facts(const SourceSpec& spec,
                                               const TypeDeclaration& decl) {
  std::vector<std::vector<DataValue>> rows;
  load_facts_stream(spec, decl, [&rows](std::vector<DataValue> row) {
    rows.push_back(std::move(row));
  });
  return rows;
}

FactBase load_sources(const Program& program, const std::string& base_dir,
                      LoadStats* stats) {
  auto start = std::chrono::steady_clock::now();
  FactBase base;
  for (const SourceDirective& directive : program.sources) {
    SourceSpec spec = make_source_spec(directive, base_dir);
    TypeDeclaration decl =
        program.declaration_of(spec.predicate, spec.arity);
    std::size_t rows =
        load_source(spec, decl, [&base, &spec](std::vector<DataValue> row) {
          std::vector<ValueId> ids;
          ids.reserve(row.size());
          for (const DataValue& v : row) ids.push_back(base.dict.intern(v));
          base.add(spec.predicate, std::move(ids));
        });
    if (stats) {
      stats->rows_per_source[spec.path] += rows;
      stats->total_rows += rows;
    }
    // A predicate with an empty source still needs its relation declared.
    base.arities.emplace(spec.predicate, spec.arity);
  }
  if (stats) {
    stats->duration = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - start);
  }
  return base;
}

namespace {

bool needs_csv_quoting(const std::string& text) {
  for (char c : text) {
    if (c == ',' || c == '"' || c == '\n' || c == '\r') return true;
  }
  return false;
}

void write_csv_field(std::ostream& out, const std::string& text) {
  if (!needs_csv_quoting(text)) {
    out << text;
    return;
  }
  out << '"';
  for (char c : text) {
    if (c == '"') out << "\"\"";
    else out << c;
  }
  out << '"';
}

// Renumbers nulls by first appearance within one export file.
class NullRenumberer {
 public:
  std::string label_for(std::uint64_t null_label) {
    auto [it, inserted] = map_.emplace(null_label, map_.size());
    return "_:n" + std::to_string(it->second);
  }

 private:
  std::map<std::uint64_t, std::size_t> map_;
};

std::string csv_text(const DataValue& v, NullRenumberer& nulls) {
  switch (v.sort()) {
    case ValueSort::String:
      return v.string_text();
    case ValueSort::Iri:
      return "<" + v.iri_text() + ">";
    case ValueSort::LangString:
      return v.lang_string_value().text + "@" + v.lang_string_value().lang;
    case ValueSort::Integer:
      return std::to_string(v.integer_value());
    case ValueSort::Double:
      return double_to_text(v.double_value());
    case ValueSort::Null:
      return nulls.label_for(v.null_label());
  }
  return {};
}

void write_nt_escaped(std::ostream& out, const std::string& text) {
  for (char c : text) {
    switch (c) {
      case '"': out << "\\\""; break;
      case '\\': out << "\\\\"; break;
      case '\n': out << "\\n"; break;
      case '\r': out << "\\r"; break;
      case '\t': out << "\\t"; break;
      default: out << c;
    }
  }
}

void write_nt_term(std::ostream& out, const DataValue& v, std::size_t position,
                   NullRenumberer& nulls, const std::string& path) {
  switch (v.sort()) {
    case ValueSort::Iri:
      if (v.iri_text().rfind("_:", 0) == 0) {
        out << v.iri_text();
      } else {
        out << '<' << v.iri_text() << '>';
      }
      return;
    case ValueSort::Null:
      out << nulls.label_for(v.null_label());
      return;
    default:
      break;
  }
  if (position < 2) {
    throw IoError(path + ": cannot export " + v.to_string() +
                  (position == 0 ? " as a subject" : " as a predicate"));
  }
  switch (v.sort()) {
    case ValueSort::String:
      out << '"';
      write_nt_escaped(out, v.string_text());
      out << '"';
      break;
    case ValueSort::LangString:
      out << '"';
      write_nt_escaped(out, v.lang_string_value().text);
      out << "\"@" << v.lang_string_value().lang;
      break;
    case ValueSort::Integer:
      out << '"' << v.integer_value() << "\"^^<" << xsd_integer << '>';
      break;
    case ValueSort::Double:
      out << '"' << double_to_text(v.double_value()) << "\"^^<" << xsd_double
          << '>';
      break;
    default:
      break;
  }
}

}  // namespace

const char* export_extension(ExportFormat format) {
  return format == ExportFormat::Csv ? "csv" : "nt";
}

std::size_t export_relation(const std::string& path, const Trie& trie,
                            const Dictionary& dict, ExportFormat format,
                            bool overwrite) {
  if (!overwrite && std::filesystem::exists(path)) {
    throw IoError(path + " already exists (use --overwrite to replace it)");
  }
  if (format == ExportFormat::NTriples && trie.arity() != 3) {
    throw IoError(path + ": N-Triples export requires arity 3, relation has " +
                  std::to_string(trie.arity()));
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);

  NullRenumberer nulls;
  RowCursor cursor(trie);
  std::vector<ValueId> row;
  std::size_t count = 0;
  while (cursor.next(row)) {
    if (format == ExportFormat::Csv) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out << ',';
        write_csv_field(out, csv_text(dict.resolve(row[i]), nulls));
      }
      out << '\n';
    } else {
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) out << ' ';
        write_nt_term(out, dict.resolve(row[i]), i, nulls, path);
      }
      out << " .\n";
    }
    ++count;
  }
  out.flush();
  if (!out) throw IoError("write failure on " + path);
  return count;
}

}  // namespace strata
