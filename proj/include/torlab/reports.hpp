#pragma once

#include <string>
#include <vector>

namespace torlab {

/// RFC 4180 CSV writer: CRLF records, quoting only when needed, floats at 17
/// significant digits for exact round-trips.
class CsvWriter {
 public:
  void row(const std::vector<std::string>& fields);
  void header_comment(const std::string& text);  // emitted as a one-field record
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

std::string format_g17(double v);

/// Minimal single-file SVG line chart (one polyline per series, log-log
/// optional); enough for convergence curves.
struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};
std::string svg_line_chart(const std::vector<SvgSeries>& series, const std::string& title,
                           bool loglog);

void write_file(const std::string& path, const std::string& contents);
void write_file_bytes(const std::string& path, const std::vector<unsigned char>& contents);
std::string read_file(const std::string& path);

/// ISO-8601 UTC timestamp.
std::string timestamp_utc();

}  // namespace torlab
