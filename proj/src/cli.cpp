#include "lazycore/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "lazycore/analysis.hpp"
#include "lazycore/machine.hpp"
#include "lazycore/parser.hpp"
#include "lazycore/trace_io.hpp"
#include "lazycore/tracer.hpp"

namespace fs = std::filesystem;

namespace lazycore {

namespace {

constexpr std::uint64_t kDefaultMaxSteps = 1'000'000;

unsigned default_jobs() {
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::optional<std::string> load_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string text{std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>()};
  if (in.bad()) return std::nullopt;
  return text;
}

void store_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw TraceIoError("cannot write '" + path.string() + "'");
}

// ---------------------------------------------------------------------------
// run / trace

// The program's outcome goes to stdout as a single tab separated line:
// VALUE and the rendered result, or ERROR, the error code, and its message.
int report_outcome(const Outcome& res, std::ostream& out) {
  if (res.ok()) {
    out << "VALUE\t" << render_value(*res.value) << "\n";
    return kExitOk;
  }
  out << "ERROR\t" << err_code_token(res.error->code) << "\t"
      << res.error->message << "\n";
  return kExitFailure;
}

// Loads and parses one program file. Returns the exit code on failure, in
// which case `ast` is left empty. Parse failures are program outcomes and
// use the same ERROR line shape as runtime errors.
int prepare_program(const std::string& file, std::ostream& out,
                    std::ostream& err, ExprPtr& ast) {
  auto source = load_file(file);
  if (!source) {
    err << "lazycore: cannot read '" << file << "'\n";
    return kExitIo;
  }
  try {
    ast = parse(*source);
  } catch (const ParseError& pe) {
    out << "ERROR\tPARSE_ERROR\t" << pe.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

RunConfig config_for(const std::string& file, std::uint64_t max_steps) {
  RunConfig cfg;
  cfg.name = fs::path(file).filename().string();
  cfg.max_steps = max_steps;
  return cfg;
}

int cmd_run(const std::string& file, std::uint64_t max_steps,
            std::ostream& out, std::ostream& err) {
  ExprPtr ast;
  if (int rc = prepare_program(file, out, err, ast); rc != kExitOk) return rc;
  return report_outcome(run(ast, config_for(file, max_steps)), out);
}

int cmd_trace(const std::string& file, std::string out_path, bool compress,
              std::uint64_t max_steps, std::ostream& out, std::ostream& err) {
  ExprPtr ast;
  if (int rc = prepare_program(file, out, err, ast); rc != kExitOk) return rc;
  if (out_path.empty()) {
    fs::path p(file);
    p.replace_extension(compress ? ".crtrace.z" : ".crtrace");
    out_path = p.string();
  }
  try {
    TraceWriter writer(out_path, compress);
    Tracer tracer(writer);
    Outcome res = run(ast, config_for(file, max_steps), tracer);
    writer.close();
    return report_outcome(res, out);
  } catch (const TraceIoError& e) {
    err << "lazycore: " << e.what() << "\n";
    return kExitIo;
  }
}

// ---------------------------------------------------------------------------
// Summary tables
//
// analyze writes one TSV file per corpus table; report reads them back.
// File names, titles, column layouts, and row orders are documented in
// docs/tables.md and must stay stable.

struct TableSpec {
  const char* file;
  const char* title;
};

constexpr TableSpec kTables[] = {
    {"overview.tsv", "Overview"},
    {"lifecycles.tsv", "Promise life cycles"},
    {"strictness.tsv", "Parameter strictness"},
    {"force_orders.tsv", "Force orders per function"},
    {"force_depths.tsv", "Force depths"},
    {"reads.tsv", "Promise reads"},
    {"expr_classes.tsv", "Promise expression types"},
    {"meta_usage.tsv", "Meta usage"},
    {"side_effects.tsv", "Side effect locality"},
    {"escapes.tsv", "Escaped promises"},
};

std::string u(std::uint64_t v) { return std::to_string(v); }

// The empty life cycle (a promise that was created and never touched) is
// shown as "-" so every table cell stays non-empty.
std::string show_lifecycle(const std::string& lc) {
  return lc.empty() ? std::string("-") : lc;
}

std::string render_table(std::string_view name, const CorpusSummary& s) {
  std::string t;
  if (name == "overview.tsv") {
    t = "metric\tvalue\n";
    t += "traces\t" + u(s.traces) + "\n";
    t += "clean_traces\t" + u(s.clean_traces) + "\n";
    t += "promises\t" + u(s.promises) + "\n";
    t += "functions\t" + u(s.functions) + "\n";
    t += "eligible_functions\t" + u(s.eligible_functions) + "\n";
    t += "strict_functions\t" + u(s.strict_functions) + "\n";
    t += "escaped_promises\t" + u(s.escaped_total) + "\n";
  } else if (name == "lifecycles.tsv") {
    t = "lifecycle\targ\tdefault\tdelayed\ttotal\n";
    for (const auto& [lc, by] : s.lifecycle_by_kind) {
      t += show_lifecycle(lc) + "\t" + u(by[0]) + "\t" + u(by[1]) + "\t" +
           u(by[2]) + "\t" + u(by[0] + by[1] + by[2]) + "\n";
    }
  } else if (name == "strictness.tsv") {
    t = "classification\tparameters\n";
    for (int i = 0; i < 3; ++i) {
      t += param_strictness_token(static_cast<ParamStrictness>(i));
      t += "\t" + u(s.param_strictness[static_cast<std::size_t>(i)]) + "\n";
    }
  } else if (name == "force_orders.tsv") {
    t = "distinct_orders\tfunctions\n";
    for (const auto& [orders, count] : s.force_order_counts)
      t += u(orders) + "\t" + u(count) + "\n";
  } else if (name == "force_depths.tsv") {
    t = "depth\tpromises\n";
    for (const auto& [depth, count] : s.force_depths)
      t += u(depth) + "\t" + u(count) + "\n";
  } else if (name == "reads.tsv") {
    t = "reads\tpromises\n";
    for (const auto& [reads, count] : s.reads)
      t += u(reads) + "\t" + u(count) + "\n";
  } else if (name == "expr_classes.tsv") {
    t = "class\tpromises\n";
    for (int i = 0; i < 4; ++i) {
      t += expr_class_token(static_cast<ExprClass>(i));
      t += "\t" + u(s.expr_classes[static_cast<std::size_t>(i)]) + "\n";
    }
  } else if (name == "meta_usage.tsv") {
    t = "usage\tpromises\n";
    for (int i = 0; i < 4; ++i) {
      t += meta_usage_token(static_cast<MetaUsage>(i));
      t += "\t" + u(s.meta_usage_counts[static_cast<std::size_t>(i)]) + "\n";
    }
  } else if (name == "side_effects.tsv") {
    t = "locality\twrites\n";
    t += std::string(locality_token(Locality::Local)) + "\t" +
         u(s.side_effects.local) + "\n";
    t += std::string(locality_token(Locality::Lexical)) + "\t" +
         u(s.side_effects.lexical) + "\n";
    t += std::string(locality_token(Locality::Other)) + "\t" +
         u(s.side_effects.other) + "\n";
  } else if (name == "escapes.tsv") {
    t = "kind\tescaped\n";
    for (int i = 0; i < 3; ++i) {
      t += prom_kind_token(static_cast<PromKind>(i));
      t += "\t" + u(s.escapes_by_kind[static_cast<std::size_t>(i)]) + "\n";
    }
  }
  return t;
}

// ---------------------------------------------------------------------------
// analyze

bool is_trace_file(const fs::path& p) {
  std::string name = p.filename().string();
  return name.ends_with(".crtrace") || name.ends_with(".crtrace.z");
}

// Output name for one trace's reduced form: the path relative to the corpus
// root with separators flattened, keeping the original extension so two
// traces can never collide.
std::string reduce_file_name(const fs::path& rel) {
  std::string flat;
  for (char c : rel.generic_string()) {
    if (c == '/')
      flat += "__";
    else
      flat += c;
  }
  return flat + ".crreduce";
}

int cmd_analyze(const std::string& corpus_dir, std::string out_dir,
                unsigned jobs, std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(corpus_dir, ec)) {
    err << "lazycore: '" << corpus_dir << "' is not a directory\n";
    return kExitIo;
  }
  if (out_dir.empty()) out_dir = (fs::path(corpus_dir) / "analysis").string();

  std::vector<fs::path> files;
  try {
    for (const auto& entry : fs::recursive_directory_iterator(corpus_dir)) {
      if (entry.is_regular_file() && is_trace_file(entry.path()))
        files.push_back(entry.path());
    }
  } catch (const fs::filesystem_error& e) {
    err << "lazycore: " << e.what() << "\n";
    return kExitIo;
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) {
              return a.generic_string() < b.generic_string();
            });

  // Reduce the trace files in parallel. Each worker claims the next unclaimed
  // index, so results land in per-file slots and every later step runs in the
  // deterministic sorted order no matter how many workers ran.
  const std::size_t n = files.size();
  std::vector<std::optional<ReducedTrace>> reduced(n);
  std::vector<std::string> fail_reason(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        reduced[i] = reduce_trace_file(files[i].string());
      } catch (const TraceInvariantError& e) {
        fail_reason[i] = e.what();
      } catch (const FormatError& e) {
        fail_reason[i] = e.what();
      } catch (const TraceIoError& e) {
        fail_reason[i] = e.what();
      }
    }
  };
  unsigned workers = std::max(1u, jobs);
  if (n < workers) workers = n == 0 ? 1 : static_cast<unsigned>(n);
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  std::uint64_t analyzable = 0;
  try {
    fs::create_directories(out_dir);
    Accumulator acc;
    std::string skipped = "file\treason\n";
    for (std::size_t i = 0; i < n; ++i) {
      fs::path rel = files[i].lexically_relative(corpus_dir);
      if (reduced[i]) {
        acc.add(*reduced[i]);
        ++analyzable;
        fs::path dest = fs::path(out_dir) / reduce_file_name(rel);
        write_reduced_file(dest.string(), *reduced[i]);
      } else {
        skipped += escape_field(rel.generic_string()) + "\t" +
                   escape_field(fail_reason[i]) + "\n";
      }
    }
    CorpusSummary summary = acc.finalize();
    for (const TableSpec& spec : kTables)
      store_file(fs::path(out_dir) / spec.file, render_table(spec.file, summary));
    store_file(fs::path(out_dir) / "skipped.tsv", skipped);
  } catch (const TraceIoError& e) {
    err << "lazycore: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "lazycore: " << e.what() << "\n";
    return kExitIo;
  }

  out << "analyzed " << analyzable << " of " << n << " trace files into "
      << out_dir << "\n";
  if (analyzable == 0) {
    err << "lazycore: no analyzable traces under '" << corpus_dir << "'\n";
    return kExitFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// report

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) nl = text.size();
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

void render_markdown_table(const std::string& tsv, std::ostream& out) {
  std::vector<std::string> lines = split_lines(tsv);
  bool first = true;
  for (const std::string& line : lines) {
    std::size_t cols = 1;
    out << "|";
    std::size_t start = 0;
    for (;;) {
      std::size_t tab = line.find('\t', start);
      std::string_view cell{line.data() + start,
                            (tab == std::string::npos ? line.size() : tab) -
                                start};
      out << " " << cell << " |";
      if (tab == std::string::npos) break;
      start = tab + 1;
      ++cols;
    }
    out << "\n";
    if (first) {
      out << "|";
      for (std::size_t i = 0; i < cols; ++i) out << " --- |";
      out << "\n";
      first = false;
    }
  }
}

int cmd_report(const std::string& summary_dir, const std::string& format,
               std::ostream& out, std::ostream& err) {
  std::error_code ec;
  if (!fs::is_directory(summary_dir, ec)) {
    err << "lazycore: '" << summary_dir << "' is not a directory\n";
    return kExitIo;
  }
  std::vector<std::pair<const TableSpec*, std::string>> loaded;
  std::vector<std::string> missing;
  for (const TableSpec& spec : kTables) {
    auto text = load_file(fs::path(summary_dir) / spec.file);
    if (!text)
      missing.push_back(spec.file);
    else
      loaded.emplace_back(&spec, std::move(*text));
  }
  if (!missing.empty()) {
    err << "lazycore: missing summary tables in '" << summary_dir << "':";
    for (const std::string& m : missing) err << " " << m;
    err << "\n";
    return kExitFailure;
  }
  if (format == "tsv") {
    for (const auto& [spec, text] : loaded)
      out << "#table\t" << spec->file << "\n" << text << "\n";
    return kExitOk;
  }
  out << "# Corpus report\n";
  for (const auto& [spec, text] : loaded) {
    out << "\n## " << spec->title << "\n\n";
    render_markdown_table(text, out);
  }
  return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Lazy language interpreter, tracer, and corpus analyzer"};
  app.name("lazycore");
  app.require_subcommand(1);

  std::uint64_t max_steps = kDefaultMaxSteps;
  std::string file;
  std::string out_path;
  bool compress = false;
  std::string corpus_dir;
  std::string summary_dir;
  unsigned jobs = default_jobs();
  std::string format = "markdown";

  auto add_steps = [&max_steps](CLI::App* cmd) {
    cmd->add_option("--max-steps", max_steps,
                    "Step budget before the run is aborted")
        ->envname("LAZYCORE_MAX_STEPS")
        ->check(CLI::Range(std::uint64_t{1},
                           std::numeric_limits<std::uint64_t>::max()));
  };

  CLI::App* c_run =
      app.add_subcommand("run", "Run a program and print its result");
  c_run->add_option("file", file, "Program file")->required();
  add_steps(c_run);

  CLI::App* c_trace =
      app.add_subcommand("trace", "Run a program and record its trace");
  c_trace->add_option("file", file, "Program file")->required();
  c_trace->add_option(
      "--out", out_path,
      "Trace file to write (default: the program file with .crtrace)");
  c_trace->add_flag("--compress", compress, "Write the trace gzip compressed");
  add_steps(c_trace);

  CLI::App* c_analyze = app.add_subcommand(
      "analyze", "Reduce every trace under a directory into summary tables");
  c_analyze->add_option("corpus", corpus_dir,
                        "Directory holding .crtrace / .crtrace.z files")
      ->required();
  c_analyze->add_option(
      "--out", out_path,
      "Output directory (default: a subdirectory 'analysis' of the corpus)");
  c_analyze->add_option("--jobs", jobs, "Worker threads")
      ->check(CLI::Range(1u, 4096u));

  CLI::App* c_report =
      app.add_subcommand("report", "Render the summary tables of an analysis");
  c_report->add_option("summary", summary_dir, "Directory written by analyze")
      ->required();
  c_report->add_option("--format", format, "Output format (tsv or markdown)")
      ->check(CLI::IsMember({"tsv", "markdown"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitFailure;
  }

  try {
    if (app.got_subcommand(c_run)) return cmd_run(file, max_steps, out, err);
    if (app.got_subcommand(c_trace))
      return cmd_trace(file, out_path, compress, max_steps, out, err);
    if (app.got_subcommand(c_analyze))
      return cmd_analyze(corpus_dir, out_path, jobs, out, err);
    if (app.got_subcommand(c_report))
      return cmd_report(summary_dir, format, out, err);
  } catch (const std::exception& e) {
    err << "lazycore: " << e.what() << "\n";
    return kExitIo;
  }
  err << "lazycore: no subcommand\n";
  return kExitFailure;
}

}  // namespace lazycore
