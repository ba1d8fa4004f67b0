#include "stokesctrl/io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace stokesctrl {

namespace {

std::string g6(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.6g", v);
  return b;
}

std::ofstream open_or_throw(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  return out;
}

void write_rows(std::ofstream& out, const std::vector<ErrorRow>& rows,
                const std::vector<std::pair<double ErrorRow::*, double ErrorRow::*>>& cols) {
  for (const ErrorRow& r : rows) {
    out << g6(r.h) << "," << g6(r.H) << "," << g6(r.spacing);
    for (const auto& [err, ord] : cols) out << "," << g6(r.*err) << "," << g6(r.*ord);
    out << "\n";
  }
}

}  // namespace

void write_state_table(const std::vector<ErrorRow>& rows, const std::string& path) {
  auto out = open_or_throw(path);
  out << "#schema=1\n";
  out << "h,H,spacing,err_state,ord_state,err_pressure,ord_pressure\n";
  write_rows(out, rows, {{&ErrorRow::err_u, &ErrorRow::ord_u},
                         {&ErrorRow::err_p, &ErrorRow::ord_p}});
}

void write_adjoint_table(const std::vector<ErrorRow>& rows, const std::string& path) {
  auto out = open_or_throw(path);
  out << "#schema=1\n";
  out << "h,H,spacing,err_adjoint,ord_adjoint,err_adjoint_pressure,ord_adjoint_pressure\n";
  write_rows(out, rows, {{&ErrorRow::err_phi, &ErrorRow::ord_phi},
                         {&ErrorRow::err_r, &ErrorRow::ord_r}});
}

void write_control_table(const std::vector<ErrorRow>& rows, const std::string& path) {
  auto out = open_or_throw(path);
  out << "#schema=1\n";
  out << "h,H,spacing,err_control,ord_control\n";
  write_rows(out, rows, {{&ErrorRow::err_y, &ErrorRow::ord_y}});
}

void print_error_tables(std::ostream& out, const std::string& title,
                        const std::vector<ErrorRow>& rows) {
  char line[256];
  out << title << "\n";
  out << "  state / pressure\n";
  std::snprintf(line, sizeof line, "    %-12s %-12s %-7s %-12s %-7s\n", "h",
                "|u-u_h|_1", "order", "|p-p_H|_0", "order");
  out << line;
  for (const ErrorRow& r : rows) {
    std::snprintf(line, sizeof line, "    %-12.6g %-12.6g %-7.4f %-12.6g %-7.4f\n",
                  r.h, r.err_u, r.ord_u, r.err_p, r.ord_p);
    out << line;
  }
  out << "  adjoint / adjoint pressure\n";
  std::snprintf(line, sizeof line, "    %-12s %-12s %-7s %-12s %-7s\n", "h",
                "|phi-phi_h|_1", "order", "|r-r_H|_0", "order");
  out << line;
  for (const ErrorRow& r : rows) {
    std::snprintf(line, sizeof line, "    %-12.6g %-12.6g %-7.4f %-12.6g %-7.4f\n",
                  r.h, r.err_phi, r.ord_phi, r.err_r, r.ord_r);
    out << line;
  }
  out << "  control\n";
  std::snprintf(line, sizeof line, "    %-12s %-12s %-7s\n", "h", "|y-y_h|_1", "order");
  out << line;
  for (const ErrorRow& r : rows) {
    std::snprintf(line, sizeof line, "    %-12.6g %-12.6g %-7.4f\n", r.h, r.err_y,
                  r.ord_y);
    out << line;
  }
}

}  // namespace stokesctrl
