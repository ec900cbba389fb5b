#pragma once

#include <string>

#include "ilradmm/problem.hpp"

namespace ilradmm {

inline constexpr const char* kTraceHeader =
    "iter,alpha,r,lagrangian,primal_residual,step_x,step_y,dual_step,kkt,weight_min,weight_max,snr";

// Formats a number with 12 significant digits; "nan" / "inf" / "-inf" for
// non-finite values.
std::string format_number(double v);

std::string format_csv(const IterateTrace& trace);
void emit_csv(const IterateTrace& trace, const std::string& path);

// Inverse of format_csv for the twelve CSV columns.
IterateTrace parse_csv(const std::string& text);
IterateTrace read_csv(const std::string& path);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace ilradmm
