#include "ilradmm/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <vector>

#include "ilradmm/error.hpp"

namespace ilradmm {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string format_csv(const IterateTrace& trace) {
  std::string out = kTraceHeader;
  out += '\n';
  for (const TraceRow& r : trace.rows) {
    out += std::to_string(r.iter);
    for (double v : {r.alpha, r.r, r.lagrangian, r.primal_residual, r.step_x, r.step_y,
                     r.dual_step, r.kkt, r.weight_min, r.weight_max, r.snr}) {
      out += ',';
      out += format_number(v);
    }
    out += '\n';
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

void emit_csv(const IterateTrace& trace, const std::string& path) {
  write_text_file(path, format_csv(trace));
}

namespace {

double parse_number(const std::string& field, long offset) {
  if (field == "nan") return kNaN;
  if (field == "inf") return std::numeric_limits<double>::infinity();
  if (field == "-inf") return -std::numeric_limits<double>::infinity();
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size())
    throw ParseError("trace CSV: bad number '" + field + "'", offset);
  return v;
}

}  // namespace

IterateTrace parse_csv(const std::string& text) {
  IterateTrace trace;
  size_t pos = 0;
  auto next_line = [&](std::string& line) {
    if (pos >= text.size()) return false;
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pos = end + 1;
    return true;
  };
  std::string line;
  if (!next_line(line) || line != kTraceHeader)
    throw ParseError("trace CSV: missing or unexpected header", 0);
  while (true) {
    const long line_start = static_cast<long>(pos);
    if (!next_line(line)) break;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 12)
      throw ParseError("trace CSV: expected 12 columns, got " + std::to_string(fields.size()),
                       line_start);
    TraceRow r;
    r.iter = static_cast<long>(parse_number(fields[0], line_start));
    double* targets[] = {&r.alpha, &r.r, &r.lagrangian, &r.primal_residual, &r.step_x, &r.step_y,
                         &r.dual_step, &r.kkt, &r.weight_min, &r.weight_max, &r.snr};
    for (size_t i = 0; i < 11; ++i) *targets[i] = parse_number(fields[i + 1], line_start);
    trace.rows.push_back(r);
  }
  return trace;
}

IterateTrace read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_csv(text);
}

}  // namespace ilradmm
