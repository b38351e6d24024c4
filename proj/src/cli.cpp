#include "strata/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "strata/parser.hpp"
#include "strata/reasoner.hpp"

namespace strata {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open program file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

int run(const RunConfig& config) {
  std::ostream& out = *config.out;
  std::ostream& err = *config.err;
  try {
    Program program;
    try {
      program = parse_program(read_file(config.program_path));
    } catch (const ParseError& e) {
      err << e.what() << "\n";
      return exit_program_error;
    } catch (const ValidationError& e) {
      err << "validation failed:\n" << e.what() << "\n";
      return exit_program_error;
    }

    if (!config.export_predicates.empty() && config.export_dir.empty()) {
      err << "--export requires --export-dir\n";
      return exit_runtime_error;
    }

    std::string base_dir =
        std::filesystem::path(config.program_path).parent_path().string();

    LoadStats load_stats;
    FactBase base = load_sources(program, base_dir, &load_stats);

    Limits limits;
    if (config.max_facts) limits.max_facts = *config.max_facts;
    if (config.max_iterations) limits.max_iterations = *config.max_iterations;
    limits.timeout_seconds = config.timeout_seconds;

    MaterialisationResult result;
    try {
      result = materialise(program, std::move(base), limits,
                           [&err](const std::string& msg) {
                             err << "warning: " << msg << "\n";
                           });
    } catch (const StratificationError& e) {
      err << e.what() << "\n";
      return exit_program_error;
    } catch (const LimitError& e) {
      err << e.what() << "\n";
      return exit_limit_exceeded;
    }
    result.report.load_time = load_stats.duration;

    out << "loaded " << load_stats.total_rows << " facts from "
        << program.sources.size() << " sources in "
        << load_stats.duration.count() << " ms\n";
    out << "reasoning finished in " << result.report.reasoning_time.count()
        << " ms (" << result.report.iterations << " iterations, "
        << result.report.stratum_times.size() << " strata)\n";
    if (config.verbosity > 0) {
      for (std::size_t s = 0; s < result.report.stratum_times.size(); ++s) {
        out << "  stratum " << (s + 1) << ": "
            << result.report.stratum_times[s].count() << " ms\n";
      }
      if (result.report.nulls_minted > 0) {
        out << "  chase: " << result.report.chase_applications
            << " applications, " << result.report.nulls_minted << " nulls\n";
      }
    }
    if (!result.report.derived_counts.empty()) {
      out << "derived facts:\n";
      for (const auto& [name, count] : result.report.derived_counts) {
        out << "  " << name << ": " << count << "\n";
      }
    }
    if (config.timing) {
      out << "load_ms=" << load_stats.duration.count() << "\n";
      out << "reason_ms=" << result.report.reasoning_time.count() << "\n";
    }

    if (!config.export_dir.empty()) {
      std::filesystem::create_directories(config.export_dir);
      std::vector<std::string> predicates = config.export_predicates;
      if (predicates.empty()) predicates = program.head_predicates();
      std::sort(predicates.begin(), predicates.end());
      for (const std::string& predicate : predicates) {
        auto it = result.state.relations.find(predicate);
        if (it == result.state.relations.end()) {
          throw IoError("cannot export unknown predicate " + predicate);
        }
        std::filesystem::path file =
            std::filesystem::path(config.export_dir) /
            (predicate + std::string(".") + export_extension(config.format));
        std::size_t rows =
            export_relation(file.string(), it->second.full, result.state.dict,
                            config.format, config.overwrite);
        out << "exported " << file.string() << " (" << rows << " rows)\n";
      }
    }
    return exit_success;
  } catch (const LimitError& e) {
    err << e.what() << "\n";
    return exit_limit_exceeded;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return exit_runtime_error;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return exit_runtime_error;
  }
}

}  // namespace strata
