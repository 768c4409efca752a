#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lazycore/events.hpp"

namespace lazycore {

// Trace files are line-oriented TSV. The first line is a header naming the
// format and its version; every following line is one event: the event name,
// then its payload fields in declaration order, separated by tabs. String
// fields escape tab, newline and backslash; everything else is verbatim.
// A well-formed file ends with a PROGRAM_END line.
inline constexpr std::string_view kTraceHeaderLine = "CRTRACE\t1";

// Raised when trace content cannot be decoded: an unknown event name, a
// missing or extra field, a malformed integer or enum token, or a bad header.
// `line` is the 1-based line number in the offending file, 0 when the text
// did not come from a file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& msg, std::uint64_t line_no)
      : std::runtime_error(line_no == 0
                               ? msg
                               : "line " + std::to_string(line_no) + ": " + msg),
        line(line_no) {}

  std::uint64_t line = 0;
};

// Raised when the underlying file cannot be opened, read or written. Distinct
// from FormatError so callers can tell a broken environment from broken data.
class TraceIoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Escape a string field for embedding in a trace line: tab becomes "\t",
// newline "\n", backslash "\\". All other bytes pass through untouched.
std::string escape_field(std::string_view raw);

// Inverse of escape_field. Throws FormatError (tagged with line_no) on a
// dangling or unknown escape sequence.
std::string unescape_field(std::string_view field, std::uint64_t line_no = 0);

// Split one line into its tab-separated fields. Escaped tabs inside string
// fields are two-byte "\t" sequences, so splitting on raw tab bytes is safe.
std::vector<std::string_view> split_fields(std::string_view line);

// Decode single fields, throwing FormatError tagged with line_no on any
// malformed input. Shared by every line format in this project.
std::uint64_t parse_field_u64(std::string_view field, std::uint64_t line_no);
std::uint32_t parse_field_u32(std::string_view field, std::uint64_t line_no);
SourceSpan parse_field_span(std::string_view field, std::uint64_t line_no);

// Render one event as a single trace line, including the trailing newline.
std::string write_event(const TraceEvent& ev);

// Decode one trace line (without its trailing newline) back into an event.
// Exact inverse of write_event. Throws FormatError on anything it cannot
// decode, tagging the error with line_no.
TraceEvent read_event(std::string_view line, std::uint64_t line_no = 0);

// Streaming trace writer; an EventSink, so a tracer can feed it directly.
// Writes the header line on construction. With compress set the output is
// gzip (the conventional extension is .crtrace.z, plain files use .crtrace);
// the gzip stream carries no timestamp, so identical event sequences produce
// byte-identical files either way. One writer owns its file exclusively.
class TraceWriter : public EventSink {
 public:
  TraceWriter(const std::string& path, bool compress);
  ~TraceWriter() override;

  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void accept(const TraceEvent& ev) override;

  // Flush and close the file. Called by the destructor if not called
  // explicitly, but only an explicit close reports I/O failures; the
  // destructor swallows them.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Streaming trace reader. Detects gzip by the file's leading magic bytes, so
// it reads plain and compressed traces alike. Validates the header line on
// construction, then hands back one event per next() call, holding only the
// current line in memory. Throws FormatError on undecodable content and
// TraceIoError when the file cannot be opened or read. Any number of readers
// may share a file.
class TraceReader {
 public:
  explicit TraceReader(const std::string& path);
  ~TraceReader();

  TraceReader(const TraceReader&) = delete;
  TraceReader& operator=(const TraceReader&) = delete;

  // Next event, or nullopt at end of file.
  std::optional<TraceEvent> next();

  // 1-based line number of the most recently returned event (0 before the
  // first). Useful for error reporting by callers doing their own checks.
  std::uint64_t line_number() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Read a whole trace into memory. On top of per-line decoding this enforces
// file shape: the trace must contain at least one event and end with
// PROGRAM_END, with no events after it. Throws FormatError otherwise.
std::vector<TraceEvent> read_trace_file(const std::string& path);

// Write a whole trace in one call. The events are emitted as given; callers
// are expected to pass a sequence ending in PROGRAM_END.
void write_trace_file(const std::string& path, const std::vector<TraceEvent>& events,
                      bool compress);

}  // namespace lazycore
