#include <CLI11.hpp>

#include "strata/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"strata: in-memory Datalog materialisation engine"};
  app.require_subcommand(1);

  strata::RunConfig config;
  std::string format = "csv";

  CLI::App* run = app.add_subcommand("run", "materialise a program");
  run->add_option("program", config.program_path, "program file (.rls)")
      ->required();
  run->add_option("--export-dir", config.export_dir,
                  "directory for exported relations");
  run->add_flag("--overwrite", config.overwrite,
                "replace existing export files");
  run->add_option("--format", format, "export format")
      ->check(CLI::IsMember({"csv", "ntriples"}))
      ->default_val("csv");
  run->add_option("--max-facts", config.max_facts, "abort beyond this many facts");
  run->add_option("--max-iterations", config.max_iterations,
                  "abort beyond this many fixpoint iterations");
  run->add_option("--timeout", config.timeout_seconds,
                  "wall-clock limit in seconds");
  run->add_option("--export", config.export_predicates,
                  "export only these predicates")
      ->take_all();
  run->add_flag("--timing", config.timing,
                "print machine-readable load_ms/reason_ms lines");
  run->add_flag("-v,--verbose", [&config](std::int64_t n) {
    config.verbosity = static_cast<int>(n);
  }, "per-stratum detail");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  config.format = format == "csv" ? strata::ExportFormat::Csv
                                  : strata::ExportFormat::NTriples;
  return strata::run(config);
}
