// Regenerates the golden outputs for the programs listed in a golden
// directory's manifest.tsv. Each manifest line is "<name>\t<max steps>";
// for every entry the program <name>.cr is run once untraced and once
// traced, writing <name>.value (the outcome line) and <name>.crtrace.
//
// The outputs are committed and reviewed by hand; this tool only exists to
// rebuild them after a deliberate change in behavior.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "lazycore/machine.hpp"
#include "lazycore/parser.hpp"
#include "lazycore/trace_io.hpp"
#include "lazycore/tracer.hpp"

namespace fs = std::filesystem;
using namespace lazycore;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) {
    std::cerr << "golden_gen: cannot read " << p << "\n";
    std::exit(2);
  }
  return std::string{std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>()};
}

std::string outcome_line(const Outcome& res) {
  if (res.ok()) return "VALUE\t" + render_value(*res.value) + "\n";
  return std::string("ERROR\t") + err_code_token(res.error->code) + "\t" +
         res.error->message + "\n";
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: golden_gen <golden_dir>\n";
    return 2;
  }
  fs::path dir = argv[1];
  std::ifstream manifest(dir / "manifest.tsv");
  if (!manifest) {
    std::cerr << "golden_gen: cannot read " << (dir / "manifest.tsv") << "\n";
    return 2;
  }

  std::string line;
  int count = 0;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      std::cerr << "golden_gen: bad manifest line: " << line << "\n";
      return 2;
    }
    std::string name = line.substr(0, tab);
    std::uint64_t max_steps = std::stoull(line.substr(tab + 1));

    ExprPtr ast = parse(slurp(dir / (name + ".cr")));
    RunConfig cfg;
    cfg.name = name + ".cr";
    cfg.max_steps = max_steps;

    TraceWriter writer((dir / (name + ".crtrace")).string(), false);
    Tracer tracer(writer);
    Outcome res = run(ast, cfg, tracer);
    writer.close();

    std::ofstream value(dir / (name + ".value"), std::ios::binary);
    value << outcome_line(res);
    if (!value) {
      std::cerr << "golden_gen: cannot write " << (dir / (name + ".value"))
                << "\n";
      return 2;
    }
    ++count;
  }
  std::cout << "golden_gen: wrote " << count << " golden pairs under " << dir
            << "\n";
  return 0;
}
