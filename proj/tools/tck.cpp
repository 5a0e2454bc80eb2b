// tck <command> <file> [--bound N] [--json] [--out PATH]

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "tck/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = tck::cli;
  cli::Invocation inv;
  std::string out;
  std::string commands;
  for (const auto& c : cli::commands()) commands += (commands.empty() ? "" : ", ") + c;

  CLI::App app{"Finite 2-classifier toolkit", "tck"};
  app.add_option("command", inv.command, "one of: " + commands)->required();
  app.add_option("file", inv.file, "document to read")->required();
  app.add_option("--bound", inv.options.bound, "enumeration bound per section")->envname("TCK_BOUND")->check(CLI::PositiveNumber);
  app.add_flag("--json", inv.json, "print the report as JSON");
  app.add_option("--out", out, "write the produced sections here");
  app.add_flag("--attest", inv.options.attest, "char-stacks: take the endpoints as stacks");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::exit_usage;
  }
  if (!out.empty()) inv.out = out;

  const cli::Execution res = cli::execute(inv);
  std::cout << res.stdout_text;
  std::cerr << res.stderr_text;
  return res.code;
}
