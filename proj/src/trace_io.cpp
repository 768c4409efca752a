#include "lazycore/trace_io.hpp"

#include <zlib.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <utility>

namespace lazycore {

namespace {

// ---------------------------------------------------------------------------
// Field encoding

void append_escaped(std::string& out, std::string_view raw) {
  for (char c : raw) {
    switch (c) {
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\\': out += "\\\\"; break;
      default: out += c;
    }
  }
}

std::uint64_t parse_u64(std::string_view field, std::uint64_t line_no) {
  return parse_field_u64(field, line_no);
}

std::uint32_t parse_u32(std::string_view field, std::uint64_t line_no) {
  return parse_field_u32(field, line_no);
}

SourceSpan parse_span(std::string_view field, std::uint64_t line_no) {
  return parse_field_span(field, line_no);
}

}  // namespace

std::uint64_t parse_field_u64(std::string_view field, std::uint64_t line_no) {
  std::uint64_t v = 0;
  const char* first = field.data();
  const char* last = first + field.size();
  auto [ptr, ec] = std::from_chars(first, last, v, 10);
  if (ec != std::errc{} || ptr != last || field.empty())
    throw FormatError("bad integer '" + std::string(field) + "'", line_no);
  return v;
}

std::uint32_t parse_field_u32(std::string_view field, std::uint64_t line_no) {
  std::uint64_t v = parse_field_u64(field, line_no);
  if (v > 0xffffffffu)
    throw FormatError("integer out of range '" + std::string(field) + "'", line_no);
  return static_cast<std::uint32_t>(v);
}

SourceSpan parse_field_span(std::string_view field, std::uint64_t line_no) {
  std::uint32_t parts[4];
  std::size_t start = 0;
  for (int i = 0; i < 4; ++i) {
    std::size_t colon = field.find(':', start);
    bool last_part = i == 3;
    if (last_part != (colon == std::string_view::npos))
      throw FormatError("bad span '" + std::string(field) + "'", line_no);
    std::string_view piece = last_part ? field.substr(start)
                                       : field.substr(start, colon - start);
    parts[i] = parse_u32(piece, line_no);
    start = colon + 1;
  }
  return SourceSpan{parts[0], parts[1], parts[2], parts[3]};
}

namespace {

// ---------------------------------------------------------------------------
// Line assembly. Every event renders as NAME, then its payload fields in
// struct declaration order, tab separated.

struct LineBuilder {
  std::string line;

  explicit LineBuilder(const char* name) : line(name) {}

  LineBuilder& num(std::uint64_t v) {
    line += '\t';
    line += std::to_string(v);
    return *this;
  }
  LineBuilder& str(std::string_view s) {
    line += '\t';
    append_escaped(line, s);
    return *this;
  }
  LineBuilder& tok(const char* t) {
    line += '\t';
    line += t;
    return *this;
  }
  LineBuilder& span(const SourceSpan& s) {
    line += '\t';
    line += to_string(s);
    return *this;
  }
  std::string finish() {
    line += '\n';
    return std::move(line);
  }
};

struct EventNames {
  static constexpr const char* kProgramStart = "PROGRAM_START";
  static constexpr const char* kCallEnter = "CALL_ENTER";
  static constexpr const char* kCallExit = "CALL_EXIT";
  static constexpr const char* kPromCreate = "PROM_CREATE";
  static constexpr const char* kPromForceEnter = "PROM_FORCE_ENTER";
  static constexpr const char* kPromForceExit = "PROM_FORCE_EXIT";
  static constexpr const char* kPromRead = "PROM_READ";
  static constexpr const char* kPromMeta = "PROM_META";
  static constexpr const char* kEvalEnter = "EVAL_ENTER";
  static constexpr const char* kEvalExit = "EVAL_EXIT";
  static constexpr const char* kVarDef = "VAR_DEF";
  static constexpr const char* kVarWrite = "VAR_WRITE";
  static constexpr const char* kVarRead = "VAR_READ";
  static constexpr const char* kProgramEnd = "PROGRAM_END";
};

constexpr const char* kOkStatus = "OK";

struct Renderer {
  std::string operator()(const ProgramStart& e) const {
    return LineBuilder(EventNames::kProgramStart).str(e.name).finish();
  }
  std::string operator()(const CallEnter& e) const {
    return LineBuilder(EventNames::kCallEnter)
        .num(e.call_id)
        .span(e.closure_span)
        .num(e.n_params)
        .num(e.n_args)
        .finish();
  }
  std::string operator()(const CallExit& e) const {
    return LineBuilder(EventNames::kCallExit).num(e.call_id).finish();
  }
  std::string operator()(const PromCreate& e) const {
    return LineBuilder(EventNames::kPromCreate)
        .num(e.prom_id)
        .num(e.creating_call)
        .str(e.param)
        .tok(prom_kind_token(e.kind))
        .tok(expr_class_token(e.expr_class))
        .str(e.deparsed_expr)
        .finish();
  }
  std::string operator()(const PromForceEnter& e) const {
    return LineBuilder(EventNames::kPromForceEnter)
        .num(e.prom_id)
        .num(e.active_call)
        .num(e.depth)
        .finish();
  }
  std::string operator()(const PromForceExit& e) const {
    return LineBuilder(EventNames::kPromForceExit).num(e.prom_id).finish();
  }
  std::string operator()(const PromRead& e) const {
    return LineBuilder(EventNames::kPromRead)
        .num(e.prom_id)
        .num(e.active_call)
        .finish();
  }
  std::string operator()(const PromMeta& e) const {
    return LineBuilder(EventNames::kPromMeta)
        .num(e.prom_id)
        .num(e.active_call)
        .finish();
  }
  std::string operator()(const EvalEnter& e) const {
    return LineBuilder(EventNames::kEvalEnter).num(e.env_loc).finish();
  }
  std::string operator()(const EvalExit&) const {
    return LineBuilder(EventNames::kEvalExit).finish();
  }
  std::string operator()(const VarDef& e) const {
    return LineBuilder(EventNames::kVarDef)
        .num(e.frame)
        .str(e.name)
        .tok(locality_token(e.locality))
        .num(e.active_prom)
        .finish();
  }
  std::string operator()(const VarWrite& e) const {
    return LineBuilder(EventNames::kVarWrite)
        .num(e.frame)
        .str(e.name)
        .tok(locality_token(e.locality))
        .num(e.active_prom)
        .finish();
  }
  std::string operator()(const VarRead& e) const {
    return LineBuilder(EventNames::kVarRead).num(e.frame).str(e.name).finish();
  }
  std::string operator()(const ProgramEnd& e) const {
    LineBuilder b(EventNames::kProgramEnd);
    b.num(e.steps);
    if (e.error)
      b.tok(err_code_token(*e.error));
    else
      b.tok(kOkStatus);
    return b.finish();
  }
};

// ---------------------------------------------------------------------------
// Line decoding

// Decodes the payload of one event line. A field index past the payload, or
// leftover fields at the end, both mean the arity is wrong for this event.
class FieldReader {
 public:
  FieldReader(std::string_view name, const std::vector<std::string_view>& fields,
              std::uint64_t line_no)
      : name_(name), fields_(fields), line_no_(line_no) {}

  std::uint64_t num() { return parse_u64(take(), line_no_); }
  std::uint32_t num32() { return parse_u32(take(), line_no_); }
  std::string str() { return unescape_field(take(), line_no_); }
  SourceSpan span() { return parse_span(take(), line_no_); }

  PromKind kind() {
    std::string_view t = take();
    if (auto k = prom_kind_from_token(t)) return *k;
    throw bad_token("promise kind", t);
  }
  ExprClass expr_class() {
    std::string_view t = take();
    if (auto c = expr_class_from_token(t)) return *c;
    throw bad_token("expression class", t);
  }
  Locality locality() {
    std::string_view t = take();
    if (auto l = locality_from_token(t)) return *l;
    throw bad_token("locality", t);
  }
  std::optional<ErrCode> status() {
    std::string_view t = take();
    if (t == kOkStatus) return std::nullopt;
    if (auto e = err_code_from_token(t)) return *e;
    throw bad_token("status", t);
  }

  // Call once after decoding all payload fields.
  void done() {
    if (next_ != fields_.size()) throw arity_error();
  }

 private:
  std::string_view take() {
    if (next_ >= fields_.size()) throw arity_error();
    return fields_[next_++];
  }
  FormatError arity_error() const {
    return FormatError("wrong field count for " + std::string(name_), line_no_);
  }
  FormatError bad_token(const char* what, std::string_view t) const {
    return FormatError("bad " + std::string(what) + " token '" + std::string(t) +
                           "'",
                       line_no_);
  }

  std::string_view name_;
  const std::vector<std::string_view>& fields_;
  std::size_t next_ = 1;  // fields_[0] is the event name
  std::uint64_t line_no_;
};

// ---------------------------------------------------------------------------
// File plumbing. Readers go through zlib unconditionally: gzread passes
// uncompressed bytes straight through, so one code path serves both plain
// and gzip traces. Writers use a plain stream unless compression is on.

class GzLineSource {
 public:
  explicit GzLineSource(const std::string& path) {
    file_ = gzopen(path.c_str(), "rb");
    if (file_ == nullptr)
      throw TraceIoError("cannot open trace file: " + path);
    gzbuffer(file_, kBufSize);
  }
  ~GzLineSource() {
    if (file_ != nullptr) gzclose(file_);
  }

  GzLineSource(const GzLineSource&) = delete;
  GzLineSource& operator=(const GzLineSource&) = delete;

  // Reads the next line into `out` (terminator stripped). False at EOF.
  bool next_line(std::string& out, const std::string& path) {
    out.clear();
    char chunk[kBufSize];
    bool got_any = false;
    while (true) {
      if (gzgets(file_, chunk, kBufSize) == nullptr) {
        int errnum = 0;
        const char* msg = gzerror(file_, &errnum);
        if (errnum != Z_OK && errnum != Z_STREAM_END)
          throw TraceIoError("error reading " + path + ": " +
                             (msg != nullptr ? msg : "unknown"));
        return got_any;  // clean EOF; a final unterminated line still counts
      }
      got_any = true;
      out += chunk;
      if (!out.empty() && out.back() == '\n') {
        out.pop_back();
        return true;
      }
      // Buffer filled mid-line; keep appending.
    }
  }

 private:
  static constexpr unsigned kBufSize = 1u << 16;
  gzFile file_ = nullptr;
};

}  // namespace

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string escape_field(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  append_escaped(out, raw);
  return out;
}

std::string unescape_field(std::string_view field, std::uint64_t line_no) {
  std::string out;
  out.reserve(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) {
    char c = field[i];
    if (c != '\\') {
      out += c;
      continue;
    }
    if (i + 1 >= field.size())
      throw FormatError("dangling escape at end of field", line_no);
    char next = field[++i];
    switch (next) {
      case 't': out += '\t'; break;
      case 'n': out += '\n'; break;
      case '\\': out += '\\'; break;
      default:
        throw FormatError(std::string("unknown escape '\\") + next + "'",
                          line_no);
    }
  }
  return out;
}

std::string write_event(const TraceEvent& ev) {
  return std::visit(Renderer{}, ev);
}

TraceEvent read_event(std::string_view line, std::uint64_t line_no) {
  std::vector<std::string_view> fields = split_fields(line);
  std::string_view name = fields[0];
  FieldReader r(name, fields, line_no);

  if (name == EventNames::kProgramStart) {
    ProgramStart e;
    e.name = r.str();
    r.done();
    return e;
  }
  if (name == EventNames::kCallEnter) {
    CallEnter e;
    e.call_id = r.num();
    e.closure_span = r.span();
    e.n_params = r.num32();
    e.n_args = r.num32();
    r.done();
    return e;
  }
  if (name == EventNames::kCallExit) {
    CallExit e;
    e.call_id = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kPromCreate) {
    PromCreate e;
    e.prom_id = r.num();
    e.creating_call = r.num();
    e.param = r.str();
    e.kind = r.kind();
    e.expr_class = r.expr_class();
    e.deparsed_expr = r.str();
    r.done();
    return e;
  }
  if (name == EventNames::kPromForceEnter) {
    PromForceEnter e;
    e.prom_id = r.num();
    e.active_call = r.num();
    e.depth = r.num32();
    r.done();
    return e;
  }
  if (name == EventNames::kPromForceExit) {
    PromForceExit e;
    e.prom_id = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kPromRead) {
    PromRead e;
    e.prom_id = r.num();
    e.active_call = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kPromMeta) {
    PromMeta e;
    e.prom_id = r.num();
    e.active_call = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kEvalEnter) {
    EvalEnter e;
    e.env_loc = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kEvalExit) {
    r.done();
    return EvalExit{};
  }
  if (name == EventNames::kVarDef) {
    VarDef e;
    e.frame = r.num();
    e.name = r.str();
    e.locality = r.locality();
    e.active_prom = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kVarWrite) {
    VarWrite e;
    e.frame = r.num();
    e.name = r.str();
    e.locality = r.locality();
    e.active_prom = r.num();
    r.done();
    return e;
  }
  if (name == EventNames::kVarRead) {
    VarRead e;
    e.frame = r.num();
    e.name = r.str();
    r.done();
    return e;
  }
  if (name == EventNames::kProgramEnd) {
    ProgramEnd e;
    e.steps = r.num();
    e.error = r.status();
    r.done();
    return e;
  }
  throw FormatError("unknown event name '" + std::string(name) + "'", line_no);
}

// ---------------------------------------------------------------------------
// TraceWriter

struct TraceWriter::Impl {
  std::string path;
  std::ofstream plain;
  gzFile gz = nullptr;
  bool open = false;

  void write(const std::string& line) {
    if (!open) throw TraceIoError("write to closed trace file: " + path);
    if (gz != nullptr) {
      if (gzwrite(gz, line.data(), static_cast<unsigned>(line.size())) !=
          static_cast<int>(line.size()))
        throw TraceIoError("error writing " + path);
    } else {
      plain.write(line.data(), static_cast<std::streamsize>(line.size()));
      if (!plain) throw TraceIoError("error writing " + path);
    }
  }
};

TraceWriter::TraceWriter(const std::string& path, bool compress)
    : impl_(std::make_unique<Impl>()) {
  impl_->path = path;
  if (compress) {
    // zlib's gzip header carries a zero timestamp when written this way, so
    // output bytes depend only on the event sequence.
    impl_->gz = gzopen(path.c_str(), "wb9");
    if (impl_->gz == nullptr)
      throw TraceIoError("cannot create trace file: " + path);
  } else {
    impl_->plain.open(path, std::ios::binary | std::ios::trunc);
    if (!impl_->plain)
      throw TraceIoError("cannot create trace file: " + path);
  }
  impl_->open = true;
  impl_->write(std::string(kTraceHeaderLine) + "\n");
}

TraceWriter::~TraceWriter() {
  try {
    close();
  } catch (...) {
    // Destructors must not throw; an explicit close() reports the failure.
  }
}

void TraceWriter::accept(const TraceEvent& ev) {
  impl_->write(write_event(ev));
}

void TraceWriter::close() {
  if (!impl_->open) return;
  impl_->open = false;
  if (impl_->gz != nullptr) {
    int rc = gzclose(impl_->gz);
    impl_->gz = nullptr;
    if (rc != Z_OK) throw TraceIoError("error closing " + impl_->path);
  } else {
    impl_->plain.close();
    if (impl_->plain.fail()) throw TraceIoError("error closing " + impl_->path);
  }
}

// ---------------------------------------------------------------------------
// TraceReader

struct TraceReader::Impl {
  std::string path;
  GzLineSource source;
  std::string line;
  std::uint64_t line_no = 0;

  explicit Impl(const std::string& p) : path(p), source(p) {}
};

TraceReader::TraceReader(const std::string& path)
    : impl_(std::make_unique<Impl>(path)) {
  if (!impl_->source.next_line(impl_->line, path))
    throw FormatError("empty trace file", 1);
  impl_->line_no = 1;
  if (impl_->line != kTraceHeaderLine)
    throw FormatError("bad trace header '" + impl_->line + "'", 1);
}

TraceReader::~TraceReader() = default;

std::optional<TraceEvent> TraceReader::next() {
  if (!impl_->source.next_line(impl_->line, impl_->path)) return std::nullopt;
  ++impl_->line_no;
  return read_event(impl_->line, impl_->line_no);
}

std::uint64_t TraceReader::line_number() const { return impl_->line_no; }

// ---------------------------------------------------------------------------
// Whole-file helpers

std::vector<TraceEvent> read_trace_file(const std::string& path) {
  TraceReader reader(path);
  std::vector<TraceEvent> events;
  bool ended = false;
  while (auto ev = reader.next()) {
    if (ended)
      throw FormatError("event after PROGRAM_END", reader.line_number());
    ended = std::holds_alternative<ProgramEnd>(*ev);
    events.push_back(std::move(*ev));
  }
  if (!ended)
    throw FormatError("trace does not end with PROGRAM_END",
                      reader.line_number());
  return events;
}

void write_trace_file(const std::string& path, const std::vector<TraceEvent>& events,
                      bool compress) {
  TraceWriter writer(path, compress);
  for (const TraceEvent& ev : events) writer.accept(ev);
  writer.close();
}

}  // namespace lazycore
