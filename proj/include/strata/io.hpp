#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "strata/ast.hpp"
#include "strata/reasoner.hpp"
#include "strata/value.hpp"

namespace strata {

/// A resolved data source; gzip is detected from the `.gz` suffix.
struct SourceSpec {
  std::string predicate;
  std::size_t arity = 0;
  SourceFormat format = SourceFormat::Csv;
  std::string path;
  bool gzip = false;
};

/// Builds the spec for a directive, resolving relative paths against
/// `base_dir` (the program file's directory).
SourceSpec make_source_spec(const SourceDirective& directive,
                            const std::string& base_dir);

using TupleSink = std::function<void(std::vector<DataValue>)>;

/// Streams one source into the sink, coercing per declaration (CSV/TSV and
/// fact files; N-Triples carry their own types). Aborts on the first
/// malformed row. Returns the number of rows delivered.
std::size_t load_source(const SourceSpec& spec, const TypeDeclaration& decl,
                        const TupleSink& sink);

/// Materialised variants of the per-format loaders.
std::vector<std::vector<DataValue>> load_csv(const SourceSpec& spec,
                                             const TypeDeclaration& decl);
std::vector<std::vector<DataValue>> load_ntriples(const SourceSpec& spec);
std::vector<std::vector<DataValue>> load_facts(const SourceSpec& spec,
                                               const TypeDeclaration& decl);

struct LoadStats {
  std::map<std::string, std::size_t> rows_per_source;
  std::uint64_t total_rows = 0;
  std::chrono::milliseconds duration{0};
};

/// Loads every @source of the program into a fact base.
FactBase load_sources(const Program& program, const std::string& base_dir,
                      LoadStats* stats = nullptr);

enum class ExportFormat : std::uint8_t { Csv, NTriples };

/// Writes one relation in trie enumeration order. CSV applies RFC-4180
/// quoting; integers print as decimal text, doubles in shortest round-trip
/// form; nulls as `_:n<k>` after first-appearance renumbering (per file).
/// Refuses to overwrite unless `overwrite` is set. Returns rows written.
std::size_t export_relation(const std::string& path, const Trie& trie,
                            const Dictionary& dict, ExportFormat format,
                            bool overwrite);

const char* export_extension(ExportFormat format);

}  // namespace strata
