#pragma once

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "strata/io.hpp"

namespace strata {

/// Batch run configuration; mirrors the `run` subcommand's flags.
struct RunConfig {
  std::string program_path;
  std::string export_dir;
  bool overwrite = false;
  ExportFormat format = ExportFormat::Csv;
  std::optional<std::uint64_t> max_facts;
  std::optional<std::uint64_t> max_iterations;
  std::optional<double> timeout_seconds;
  std::vector<std::string> export_predicates;  // empty: all derived
  bool timing = false;
  int verbosity = 0;

  std::ostream* out = &std::cout;
  std::ostream* err = &std::cerr;
};

inline constexpr int exit_success = 0;
inline constexpr int exit_program_error = 1;  // parse/validation/stratification
inline constexpr int exit_runtime_error = 2;  // I/O, coercion
inline constexpr int exit_limit_exceeded = 3;

/// Parse, load, materialise, report, export. Returns the exit code.
int run(const RunConfig& config);

}  // namespace strata
