#include <doctest.h>

#include <cstdlib>
#include <regex>
#include <sstream>

#include "helpers.hpp"
#include "strata/cli.hpp"

using namespace strata;
using namespace strata::testing;

namespace {

const std::filesystem::path source_dir{STRATA_SOURCE_DIR};

struct CliResult {
  int exit_code = 0;
  std::string out;
  std::string err;
};

CliResult run_cli(RunConfig config) {
  std::ostringstream out;
  std::ostringstream err;
  config.out = &out;
  config.err = &err;
  CliResult r;
  r.exit_code = run(config);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace

TEST_CASE("the lime scenario runs end to end") {
  TempDir dir("cli-lime");
  RunConfig config;
  config.program_path =
      (source_dir / "scenarios/lime-trees/lime-trees.rls").string();
  config.export_dir = dir.file("out").string();
  config.timing = true;
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_success);
  CHECK(r.err.empty());

  std::string exported = read_file(dir.file("out") / "oldLime.csv");
  std::string golden =
      read_file(source_dir / "tests/golden/oldLime.golden.csv");
  CHECK(exported == golden);

  CHECK(std::regex_search(r.out, std::regex("load_ms=\\d+")));
  CHECK(std::regex_search(r.out, std::regex("reason_ms=\\d+")));
  CHECK(r.out.find("oldLime: 2") != std::string::npos);
  CHECK(r.out.find("lime: 4") != std::string::npos);

  // A second run must refuse to overwrite, then succeed with the flag.
  CliResult refused = run_cli(config);
  CHECK(refused.exit_code == exit_runtime_error);
  config.overwrite = true;
  CliResult again = run_cli(config);
  CHECK(again.exit_code == exit_success);
  CHECK(read_file(dir.file("out") / "oldLime.csv") == golden);
}

TEST_CASE("exports can be limited to chosen predicates") {
  TempDir dir("cli-sel");
  RunConfig config;
  config.program_path =
      (source_dir / "scenarios/lime-trees/lime-trees.rls").string();
  config.export_dir = dir.file("out").string();
  config.export_predicates = {"oldLime"};
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_success);
  CHECK(std::filesystem::exists(dir.file("out") / "oldLime.csv"));
  CHECK(!std::filesystem::exists(dir.file("out") / "lime.csv"));

  config.export_predicates = {"nonexistent"};
  config.overwrite = true;
  CliResult bad = run_cli(config);
  CHECK(bad.exit_code == exit_runtime_error);
}

TEST_CASE("unstratifiable programs exit with the cycle on stderr") {
  TempDir dir("cli-strat");
  write_file(dir.file("bad.rls"),
             "seed(1) .\n"
             "p(?x) :- seed(?x), ~q(?x) .\n"
             "q(?x) :- seed(?x), ~p(?x) .\n");
  RunConfig config;
  config.program_path = dir.file("bad.rls").string();
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_program_error);
  CHECK(r.err.find("cycle") != std::string::npos);
  CHECK(r.err.find("p") != std::string::npos);
  CHECK(r.err.find("q") != std::string::npos);
}

TEST_CASE("syntax and safety errors exit with code 1") {
  TempDir dir("cli-parse");
  write_file(dir.file("syntax.rls"), "p(?x :- q(?x) .\n");
  RunConfig config;
  config.program_path = dir.file("syntax.rls").string();
  CHECK(run_cli(config).exit_code == exit_program_error);

  write_file(dir.file("unsafe.rls"), "p(?x) :- q(?y) .\n");
  config.program_path = dir.file("unsafe.rls").string();
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_program_error);
  CHECK(r.err.find("?x") != std::string::npos);
}

TEST_CASE("runtime errors exit with code 2") {
  RunConfig missing;
  missing.program_path = "/nonexistent/prog.rls";
  CHECK(run_cli(missing).exit_code == exit_runtime_error);

  TempDir dir("cli-coerce");
  write_file(dir.file("data.csv"), "a,notanumber\n");
  write_file(dir.file("prog.rls"),
             "@declare p(any, integer) .\n"
             "@source p[2]: load-csv(\"data.csv\") .\n"
             "q(?x) :- p(?x, ?n) .\n");
  RunConfig coerce;
  coerce.program_path = dir.file("prog.rls").string();
  CliResult r = run_cli(coerce);
  CHECK(r.exit_code == exit_runtime_error);
  CHECK(r.err.find("notanumber") != std::string::npos);
}

TEST_CASE("the divergent chase exits with code 3 under a fact limit") {
  TempDir dir("cli-limit");
  write_file(dir.file("diverge.rls"),
             "s(a, b) .\n"
             "s(?y, !z) :- s(?x, ?y) .\n");
  RunConfig config;
  config.program_path = dir.file("diverge.rls").string();
  config.max_facts = 10;
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_limit_exceeded);
  CHECK(r.err.find("fact limit") != std::string::npos);
}

TEST_CASE("two runs export byte-identical files") {
  TempDir dir("cli-det");
  write_file(dir.file("chase.rls"),
             "q(a) . q(b) . q(c) .\n"
             "r(?x, !v) :- q(?x) .\n"
             "s(?x, ?y) :- r(?x, ?y) .\n");
  for (const char* sub : {"one", "two"}) {
    RunConfig config;
    config.program_path = dir.file("chase.rls").string();
    config.export_dir = dir.file(sub).string();
    CHECK(run_cli(config).exit_code == exit_success);
  }
  CHECK(read_file(dir.file("one") / "r.csv") ==
        read_file(dir.file("two") / "r.csv"));
  CHECK(read_file(dir.file("one") / "s.csv") ==
        read_file(dir.file("two") / "s.csv"));
  CHECK(read_file(dir.file("one") / "r.csv").find("_:n0") !=
        std::string::npos);
}

TEST_CASE("n-triples export format is selectable") {
  TempDir dir("cli-nt");
  write_file(dir.file("prog.rls"),
             "t(<http://ex/s>, <http://ex/p>, 5) .\n"
             "u(?s, ?p, ?o) :- t(?s, ?p, ?o) .\n");
  RunConfig config;
  config.program_path = dir.file("prog.rls").string();
  config.export_dir = dir.file("out").string();
  config.format = ExportFormat::NTriples;
  CliResult r = run_cli(config);
  CHECK(r.exit_code == exit_success);
  std::string content = read_file(dir.file("out") / "u.nt");
  CHECK(content.find("<http://ex/s> <http://ex/p> \"5\"^^") !=
        std::string::npos);
}

TEST_CASE("the installed binary behaves like the library entry point") {
  TempDir dir("cli-bin");
  std::string binary = STRATA_CLI_PATH;
  std::string program =
      (source_dir / "scenarios/lime-trees/lime-trees.rls").string();
  std::string cmd = binary + " run " + program + " --export-dir " +
                    dir.file("out").string() + " --timing > " +
                    dir.file("stdout.txt").string() + " 2>" +
                    dir.file("stderr.txt").string();
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 0);
  CHECK(read_file(dir.file("out") / "oldLime.csv") ==
        read_file(source_dir / "tests/golden/oldLime.golden.csv"));
  CHECK(read_file(dir.file("stdout.txt")).find("load_ms=") !=
        std::string::npos);

  // Unknown flags are usage errors.
  std::string bad = binary + " run " + program + " --bogus 2>/dev/null";
  int bad_status = std::system(bad.c_str());
  REQUIRE(bad_status != -1);
  CHECK(WEXITSTATUS(bad_status) != 0);
}
